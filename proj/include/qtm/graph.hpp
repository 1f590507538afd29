#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "qtm/emulator.hpp"
#include "qtm/model.hpp"
#include "qtm/numeric.hpp"
#include "qtm/types.hpp"

namespace qtm {

// Undirected transition channel with direction-resolved rates.
// `fwd` is the u -> v rate, `bwd` the v -> u rate, `gap` is E_v - E_u.
template <class Scalar>
struct GraphEdge {
  int u = 0;
  int v = 0;
  Scalar fwd = Scalar(0);
  Scalar bwd = Scalar(0);
  Scalar gap = Scalar(0);
  std::string label;  // bath label, or "work" for the eliminated drive
};

// Channel-resolved view of the emulator: cycle edges in cycle order, the leak
// (if any) last. Parallel channels stay distinct here even though they merge
// in the rate matrix.
template <class Scalar>
struct RateGraph {
  int num_vertices = 0;
  std::vector<GraphEdge<Scalar>> edges;
  int work_edge = -1;
  int leak_edge = -1;  // -1 when absent
  std::vector<BathParams> baths;
};

// Builds the channel graph after certifying that `w` is exactly the channel
// sum of the machine (refuses an uncertified matrix).
template <class Scalar>
RateGraph<Scalar> from_rate_matrix(const MachineSpec& spec, const Matrix<Scalar>& w) {
  const BalanceCertificate cert = certify_balance(spec, w);
  if (!cert.ok) {
    std::string what = "rate matrix failed balance certification:";
    for (const std::string& v : cert.violations) what += " " + v + ";";
    throw ConfigError(what);
  }
  RateGraph<Scalar> g;
  g.num_vertices = spec.num_levels;
  g.baths = spec.baths;
  for (const CycleEdge& e : spec.cycle) {
    GraphEdge<Scalar> edge;
    edge.u = e.from;
    edge.v = e.to;
    edge.gap = Scalar(edge_gap(spec, e));
    if (e.kind == EdgeKind::Work) {
      edge.fwd = edge.bwd = work_edge_rate<Scalar>(spec);
      edge.label = "work";
      g.work_edge = static_cast<int>(g.edges.size());
    } else {
      const BathParams& bath = bath_by_label(spec, e.bath);
      edge.fwd = signed_rate(-edge.gap, bath);
      edge.bwd = signed_rate(edge.gap, bath);
      edge.label = e.bath;
    }
    g.edges.push_back(edge);
  }
  if (spec.leak.has_value()) {
    const CycleEdge& e = *spec.leak;
    const BathParams& bath = bath_by_label(spec, e.bath);
    GraphEdge<Scalar> edge;
    edge.u = e.from;
    edge.v = e.to;
    edge.gap = Scalar(edge_gap(spec, e));
    edge.fwd = signed_rate(-edge.gap, bath);
    edge.bwd = signed_rate(edge.gap, bath);
    edge.label = e.bath;
    g.leak_edge = static_cast<int>(g.edges.size());
    g.edges.push_back(edge);
  }
  return g;
}

template <class Scalar>
RateGraph<Scalar> build_rate_graph(const MachineSpec& spec) {
  return from_rate_matrix(spec, build_rate_matrix<Scalar>(spec));
}

// Channel sum as a generator matrix (column convention, zero column sums).
template <class Scalar>
Matrix<Scalar> graph_rate_matrix(const RateGraph<Scalar>& g) {
  Matrix<Scalar> w = Matrix<Scalar>::Zero(g.num_vertices, g.num_vertices);
  for (const GraphEdge<Scalar>& e : g.edges) {
    w(e.v, e.u) += e.fwd;
    w(e.u, e.v) += e.bwd;
  }
  for (int j = 0; j < g.num_vertices; ++j) {
    Scalar column = Scalar(0);
    for (int i = 0; i < g.num_vertices; ++i)
      if (i != j) column += w(i, j);
    w(j, j) = -column;
  }
  return w;
}

namespace detail {

struct UnionFind {
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
  std::vector<int> parent;
};

}  // namespace detail

// All spanning trees as sorted edge-index sets, in lexicographic order.
// Parallel channels count as distinct edges (the graph is a multigraph).
template <class Scalar>
std::vector<std::vector<int>> enumerate_maximal_trees(const RateGraph<Scalar>& g) {
  const int n = g.num_vertices;
  const int m = static_cast<int>(g.edges.size());
  const int need = n - 1;
  std::vector<std::vector<int>> trees;
  if (need < 0 || need > m) return trees;
  std::vector<int> pick(need);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    detail::UnionFind uf(n);
    int merges = 0;
    bool acyclic = true;
    for (int idx : pick) {
      const GraphEdge<Scalar>& e = g.edges[idx];
      if (!uf.unite(e.u, e.v)) {
        acyclic = false;
        break;
      }
      merges += 1;
    }
    if (acyclic && merges == need) trees.push_back(pick);
    // next lexicographic combination
    int i = need - 1;
    while (i >= 0 && pick[i] == m - need + i) --i;
    if (i < 0) break;
    pick[i] += 1;
    for (int j = i + 1; j < need; ++j) pick[j] = pick[j - 1] + 1;
  }
  return trees;
}

// Weight of a spanning tree rooted at `root`: the product of the directed
// rates with every edge oriented toward the root. Factors are multiplied in
// ascending edge-index order; the closed-form evaluator walks the identical
// sequence, so the two agree bit for bit.
template <class Scalar>
ScaledProduct<Scalar> tree_weight(const RateGraph<Scalar>& g,
                                  const std::vector<int>& tree, int root) {
  const int n = g.num_vertices;
  std::vector<std::vector<std::pair<int, int>>> adjacency(n);  // (neighbor, edge)
  for (int idx : tree) {
    const GraphEdge<Scalar>& e = g.edges[idx];
    adjacency[e.u].push_back({e.v, idx});
    adjacency[e.v].push_back({e.u, idx});
  }
  // BFS from the root; each tree edge is traversed toward the root by its
  // child endpoint.
  std::vector<int> parent_edge(n, -1);
  std::vector<int> order = {root};
  std::vector<char> seen(n, 0);
  seen[root] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const int u = order[head];
    for (const auto& [v, idx] : adjacency[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      parent_edge[v] = idx;
      order.push_back(v);
    }
  }
  if (static_cast<int>(order.size()) != n)
    throw TopologyError("edge set does not span the graph");
  std::vector<int> child_of(g.edges.size(), -1);
  for (int v = 0; v < n; ++v)
    if (parent_edge[v] >= 0) child_of[parent_edge[v]] = v;

  ScaledProduct<Scalar> weight;
  for (int idx : tree) {  // `tree` is sorted ascending by construction
    const GraphEdge<Scalar>& e = g.edges[idx];
    if (child_of[idx] < 0) throw TopologyError("edge set contains a cycle");
    weight *= (child_of[idx] == e.u) ? e.fwd : e.bwd;
  }
  return weight;
}

// Normalization D: the sum of all rooted spanning-tree weights (every tree,
// every root).
template <class Scalar>
ScaledSum<Scalar> graph_denominator_scaled(const RateGraph<Scalar>& g) {
  ScaledSum<Scalar> d;
  const auto trees = enumerate_maximal_trees(g);
  for (const auto& tree : trees)
    for (int root = 0; root < g.num_vertices; ++root)
      d += tree_weight(g, tree, root);
  return d;
}

template <class Scalar>
Scalar graph_denominator(const RateGraph<Scalar>& g) {
  return graph_denominator_scaled(g).value();
}

// Stationary populations from rooted tree weights: p_i proportional to the
// sum of tree weights rooted at i.
template <class Scalar>
Vector<Scalar> graph_steady_populations(const RateGraph<Scalar>& g) {
  const auto trees = enumerate_maximal_trees(g);
  if (trees.empty()) throw TopologyError("graph has no spanning tree");
  Vector<Scalar> p(g.num_vertices);
  for (int root = 0; root < g.num_vertices; ++root) {
    ScaledSum<Scalar> rooted;
    for (const auto& tree : trees) rooted += tree_weight(g, tree, root);
    p(root) = rooted.value();
  }
  const Scalar total = p.sum();
  if (!(total > Scalar(0))) throw SolverError("tree weights sum to zero");
  return p / total;
}

// Closed-form weight of the ring tree obtained by deleting ring edge
// `removed_edge`, rooted at `root_vertex`: on the broken ring every remaining
// edge points toward the root, which resolves to "forward along the cycle
// before the root, backward after it" in the linear order starting just past
// the deleted edge. Only defined for a pure ring (no leak channel).
template <class Scalar>
ScaledProduct<Scalar> ring_tree_weight_closed_form(const RateGraph<Scalar>& g,
                                                   int removed_edge, int root_vertex) {
  const int n = g.num_vertices;
  if (static_cast<int>(g.edges.size()) != n || g.leak_edge >= 0)
    throw TopologyError("closed-form tree weights apply to a single-cycle graph only");
  if (removed_edge < 0 || removed_edge >= n)
    throw ConfigError("removed edge index out of range");
  int root_pos = -1;
  for (int i = 0; i < n; ++i)
    if (g.edges[i].u == root_vertex) root_pos = i;
  if (root_pos < 0) throw ConfigError("root vertex not on the ring");

  const auto linear = [&](int pos) { return ((pos - removed_edge - 1) % n + n) % n; };
  ScaledProduct<Scalar> weight;
  for (int e = 0; e < n; ++e) {
    if (e == removed_edge) continue;
    weight *= (linear(e) < linear(root_pos)) ? g.edges[e].fwd : g.edges[e].bwd;
  }
  return weight;
}

// One traversal step of a circuit: edge index plus direction (`along` means
// u -> v).
struct CircuitStep {
  int edge = 0;
  bool along = true;
};

struct Circuit {
  std::string name;
  std::vector<CircuitStep> steps;
};

// The independent circuits of the supported topologies: a bare ring has one
// ("cycle"); a ring with a leak parallel to the work edge has three ("cycle",
// "drive_leak_pair" traversing the drive forward and the leak back, and
// "leak_cycle" with the drive replaced by the leak). Anything else is
// unsupported.
template <class Scalar>
std::vector<Circuit> circuit_decomposition(const RateGraph<Scalar>& g) {
  const int n = g.num_vertices;
  const int m = static_cast<int>(g.edges.size());
  if (g.work_edge < 0) throw TopologyError("graph has no work edge");
  for (int i = 0; i < n; ++i)
    if (g.edges[i].v != g.edges[(i + 1) % n].u)
      throw TopologyError("the first " + std::to_string(n) + " edges do not form a cycle");

  Circuit ring;
  ring.name = "cycle";
  for (int i = 0; i < n; ++i) ring.steps.push_back({i, true});
  if (m == n && g.leak_edge < 0) return {ring};

  if (m != n + 1 || g.leak_edge != n)
    throw TopologyError("unsupported topology: expected a single cycle plus "
                        "at most one leak channel");
  const GraphEdge<Scalar>& work = g.edges[g.work_edge];
  const GraphEdge<Scalar>& leak = g.edges[g.leak_edge];
  const bool same_direction = (leak.u == work.u && leak.v == work.v);
  const bool opposite = (leak.u == work.v && leak.v == work.u);
  if (!same_direction && !opposite)
    throw TopologyError("unsupported topology: leak channel is not parallel "
                        "to the work edge");

  Circuit pair;
  pair.name = "drive_leak_pair";
  pair.steps.push_back({g.work_edge, true});
  pair.steps.push_back({g.leak_edge, !same_direction});

  Circuit leak_ring;
  leak_ring.name = "leak_cycle";
  for (int i = 0; i < n; ++i)
    leak_ring.steps.push_back(i == g.work_edge ? CircuitStep{g.leak_edge, same_direction}
                                               : CircuitStep{i, true});
  return {ring, pair, leak_ring};
}

// Product of directed rates along the circuit; `positive` traverses the
// stored step directions, otherwise the reverse orientation.
template <class Scalar>
ScaledProduct<Scalar> cycle_weight(const RateGraph<Scalar>& g, const Circuit& circuit,
                                   bool positive = true) {
  ScaledProduct<Scalar> weight;
  for (const CircuitStep& step : circuit.steps) {
    const GraphEdge<Scalar>& e = g.edges[step.edge];
    const bool along = positive ? step.along : !step.along;
    weight *= along ? e.fwd : e.bwd;
  }
  return weight;
}

// Thermodynamic force of bath `label` around the circuit, in the circuit's
// positive orientation:
//   X = sum over the bath's steps of log(rate along / rate against).
// It obeys the energy identity sum(gaps along) = -T X. The reversed
// orientation flips the sign; pass `positive = false` for the convention that
// labels the opposite traversal as positive.
template <class Scalar>
Scalar thermo_force(const RateGraph<Scalar>& g, const Circuit& circuit,
                    const std::string& label, bool positive = true) {
  using std::log;
  Scalar force = Scalar(0);
  for (const CircuitStep& step : circuit.steps) {
    const GraphEdge<Scalar>& e = g.edges[step.edge];
    if (e.label != label) continue;
    const bool along = positive ? step.along : !step.along;
    force += along ? (log(e.fwd) - log(e.bwd)) : (log(e.bwd) - log(e.fwd));
  }
  return force;
}

// Sum of energy gaps crossed by the bath's steps, along the positive
// orientation (the left side of the identity above).
template <class Scalar>
Scalar circuit_gap_sum(const RateGraph<Scalar>& g, const Circuit& circuit,
                       const std::string& label) {
  Scalar sum = Scalar(0);
  for (const CircuitStep& step : circuit.steps) {
    const GraphEdge<Scalar>& e = g.edges[step.edge];
    if (e.label != label) continue;
    sum += step.along ? e.gap : -e.gap;
  }
  return sum;
}

namespace detail {

// (a - b) / d with all three at explicit power-of-two scales.
template <class Scalar>
Scalar scaled_flux(const ScaledProduct<Scalar>& a, const ScaledProduct<Scalar>& b,
                   const ScaledSum<Scalar>& d) {
  using std::ldexp;
  const long e = std::max(a.exponent(), b.exponent());
  const Scalar diff = ldexp(a.mantissa(), static_cast<int>(std::max(a.exponent() - e, -100000L))) -
                      ldexp(b.mantissa(), static_cast<int>(std::max(b.exponent() - e, -100000L)));
  const long shift = e - d.exponent();
  const long lo = -1000000, hi = 1000000;
  const long clamped = shift < lo ? lo : (shift > hi ? hi : shift);
  return ldexp(diff / d.mantissa(), static_cast<int>(clamped));
}

}  // namespace detail

// Net probability current around a single-cycle graph:
//   J = [A(C) - A(-C)] / D.
// Multi-circuit graphs have no single current; use circuit_currents there.
template <class Scalar>
Scalar circuit_flux(const RateGraph<Scalar>& g) {
  const auto circuits = circuit_decomposition(g);
  if (circuits.size() != 1)
    throw TopologyError("graph carries several circuits; use circuit_currents");
  const ScaledProduct<Scalar> forward = cycle_weight(g, circuits[0], true);
  const ScaledProduct<Scalar> backward = cycle_weight(g, circuits[0], false);
  return detail::scaled_flux(forward, backward, graph_denominator_scaled(g));
}

template <class Scalar>
struct CircuitCurrents {
  std::string name;
  Scalar flux = Scalar(0);       // circulation of this circuit
  Scalar force_cold = Scalar(0); // X^cold(C)
  Scalar force_hot = Scalar(0);
  Scalar heat_cold = Scalar(0);  // -T_c X^cold(C) * flux
  Scalar heat_hot = Scalar(0);
  Scalar power = Scalar(0);      // -(heat_cold + heat_hot)
};

template <class Scalar>
struct CurrentDecomposition {
  std::vector<CircuitCurrents<Scalar>> circuits;
  Scalar heat_cold = Scalar(0);
  Scalar heat_hot = Scalar(0);
  Scalar power = Scalar(0);
  Scalar denominator = Scalar(0);
};

// Circuit-resolved stationary heat currents:
//   Qdot_alpha(C) = -T_alpha X^alpha(C) * det(-W restricted off C) *
//                   [A(C) - A(-C)] / D,
// summed over the circuit decomposition. The restricted determinant is 1 for
// circuits covering every vertex.
template <class Scalar>
CurrentDecomposition<Scalar> circuit_currents(const RateGraph<Scalar>& g) {
  if (g.baths.size() != 2) throw ConfigError("graph must carry exactly two baths");
  const BathParams& cold = g.baths[0].temperature < g.baths[1].temperature ? g.baths[0]
                                                                           : g.baths[1];
  const BathParams& hot = g.baths[0].temperature < g.baths[1].temperature ? g.baths[1]
                                                                          : g.baths[0];
  const auto circuits = circuit_decomposition(g);
  const ScaledSum<Scalar> denominator = graph_denominator_scaled(g);
  const Matrix<Scalar> w = graph_rate_matrix(g);

  CurrentDecomposition<Scalar> out;
  out.denominator = denominator.value();
  for (const Circuit& circuit : circuits) {
    std::vector<char> on_circuit(g.num_vertices, 0);
    for (const CircuitStep& step : circuit.steps) {
      on_circuit[g.edges[step.edge].u] = 1;
      on_circuit[g.edges[step.edge].v] = 1;
    }
    std::vector<int> complement;
    for (int i = 0; i < g.num_vertices; ++i)
      if (!on_circuit[i]) complement.push_back(i);
    Scalar restricted_det = Scalar(1);
    if (!complement.empty()) {
      const int k = static_cast<int>(complement.size());
      Matrix<Scalar> block(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) block(i, j) = -w(complement[i], complement[j]);
      restricted_det = block.determinant();
    }

    CircuitCurrents<Scalar> c;
    c.name = circuit.name;
    const ScaledProduct<Scalar> forward = cycle_weight(g, circuit, true);
    const ScaledProduct<Scalar> backward = cycle_weight(g, circuit, false);
    c.flux = restricted_det * detail::scaled_flux(forward, backward, denominator);
    c.force_cold = thermo_force(g, circuit, cold.label);
    c.force_hot = thermo_force(g, circuit, hot.label);
    c.heat_cold = -Scalar(cold.temperature) * c.force_cold * c.flux;
    c.heat_hot = -Scalar(hot.temperature) * c.force_hot * c.flux;
    c.power = -(c.heat_cold + c.heat_hot);
    out.heat_cold += c.heat_cold;
    out.heat_hot += c.heat_hot;
    out.power += c.power;
    out.circuits.push_back(c);
  }
  return out;
}

// Sum over levels of the principal minors of -W: by the matrix-tree theorem
// this equals the rooted-tree normalization D.
template <class Scalar>
Scalar kirchhoff_denominator(const Matrix<Scalar>& w) {
  const int n = static_cast<int>(w.rows());
  Scalar total = Scalar(0);
  for (int drop = 0; drop < n; ++drop) {
    Matrix<Scalar> minor(n - 1, n - 1);
    for (int i = 0, mi = 0; i < n; ++i) {
      if (i == drop) continue;
      for (int j = 0, mj = 0; j < n; ++j) {
        if (j == drop) continue;
        minor(mi, mj) = -w(i, j);
        ++mj;
      }
      ++mi;
    }
    total += minor.determinant();
  }
  return total;
}

// Number of spanning trees by the unweighted matrix-tree determinant
// (parallel channels counted separately).
template <class Scalar>
long spanning_tree_count(const RateGraph<Scalar>& g) {
  const int n = g.num_vertices;
  Matrix<Real> laplacian = Matrix<Real>::Zero(n, n);
  for (const GraphEdge<Scalar>& e : g.edges) {
    laplacian(e.u, e.u) += 1;
    laplacian(e.v, e.v) += 1;
    laplacian(e.u, e.v) -= 1;
    laplacian(e.v, e.u) -= 1;
  }
  Matrix<Real> minor = laplacian.bottomRightCorner(n - 1, n - 1);
  return std::llround(double(minor.determinant()));
}

}  // namespace qtm
