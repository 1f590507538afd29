#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qtm/model.hpp"
#include "qtm/numeric.hpp"
#include "qtm/rates.hpp"
#include "qtm/types.hpp"

namespace qtm {

namespace detail {

// Every dissipative channel of the machine: the bath cycle edges plus the
// leak. The work edge is excluded (it carries the coherent drive).
inline std::vector<const CycleEdge*> dissipative_edges(const MachineSpec& spec) {
  std::vector<const CycleEdge*> edges;
  for (const CycleEdge& e : spec.cycle)
    if (e.kind == EdgeKind::Bath) edges.push_back(&e);
  if (spec.leak.has_value()) edges.push_back(&*spec.leak);
  return edges;
}

// Rate of leaving `level` along dissipative edge `e` (0 if e does not touch it).
template <class Scalar>
Scalar out_rate(const MachineSpec& spec, const CycleEdge& e, int level) {
  const Scalar gap = Scalar(edge_gap(spec, e));
  const BathParams& bath = bath_by_label(spec, e.bath);
  if (e.from == level) return signed_rate(-gap, bath);  // climb toward e.to
  if (e.to == level) return signed_rate(gap, bath);     // descend toward e.from
  return Scalar(0);
}

}  // namespace detail

// Total damping rate of the driven-edge coherence: the sum of all dissipative
// escape rates out of both work levels. Exact adiabatic elimination; in
// particular a leak parallel to the work edge contributes the rates of both
// of its directions (dropping them reproduces only the leading order and
// shifts steady populations at relative order gamma/omega).
template <class Scalar>
Scalar coherence_damping(const MachineSpec& spec) {
  const CycleEdge& work = spec.cycle[work_edge_index(spec)];
  Scalar total = Scalar(0);
  for (const CycleEdge* e : detail::dissipative_edges(spec)) {
    total += detail::out_rate<Scalar>(spec, *e, work.from);
    total += detail::out_rate<Scalar>(spec, *e, work.to);
  }
  return total;
}

// Classical transition rate across the driven edge after eliminating the
// stationary coherence: 4 lambda^2 / coherence_damping, the same in both
// directions.
template <class Scalar>
Scalar work_edge_rate(const MachineSpec& spec) {
  if (spec.lambda == 0.0) return Scalar(0);
  const Scalar lam = Scalar(spec.lambda);
  return Scalar(4) * lam * lam / coherence_damping<Scalar>(spec);
}

// Generator of the emulating Markov jump process, column convention:
// W(i, j) is the rate j -> i for i != j, and each column sums to zero.
template <class Scalar>
Matrix<Scalar> build_rate_matrix(const MachineSpec& spec) {
  validate_structure(spec);
  const int n = spec.num_levels;
  Matrix<Scalar> w = Matrix<Scalar>::Zero(n, n);
  for (const CycleEdge* e : detail::dissipative_edges(spec)) {
    const Scalar gap = Scalar(edge_gap(spec, *e));
    const BathParams& bath = bath_by_label(spec, e->bath);
    w(e->to, e->from) += signed_rate(-gap, bath);
    w(e->from, e->to) += signed_rate(gap, bath);
  }
  const CycleEdge& work = spec.cycle[work_edge_index(spec)];
  const Scalar pair_rate = work_edge_rate<Scalar>(spec);
  w(work.to, work.from) += pair_rate;
  w(work.from, work.to) += pair_rate;
  for (int j = 0; j < n; ++j) {
    Scalar column = Scalar(0);
    for (int i = 0; i < n; ++i)
      if (i != j) column += w(i, j);
    w(j, j) = -column;
  }
  return w;
}

namespace detail {

// Connected components of the support graph of W (an edge wherever either
// direction has a positive rate; supported machines always have symmetric
// support, so this equals the strongly connected partition).
template <class Scalar>
std::vector<std::vector<int>> support_components(const Matrix<Scalar>& w) {
  const int n = static_cast<int>(w.rows());
  std::vector<int> component(n, -1);
  int count = 0;
  for (int start = 0; start < n; ++start) {
    if (component[start] >= 0) continue;
    std::vector<int> stack = {start};
    component[start] = count;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (v == u || component[v] >= 0) continue;
        if (w(v, u) > Scalar(0) || w(u, v) > Scalar(0)) {
          component[v] = count;
          stack.push_back(v);
        }
      }
    }
    count += 1;
  }
  std::vector<std::vector<int>> blocks(count);
  for (int i = 0; i < n; ++i) blocks[component[i]].push_back(i);
  return blocks;
}

inline std::string format_blocks(const std::vector<std::vector<int>>& blocks) {
  std::ostringstream os;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    os << (b == 0 ? "{" : " {");
    for (std::size_t i = 0; i < blocks[b].size(); ++i)
      os << (i == 0 ? "" : ",") << blocks[b][i] + 1;
    os << "}";
  }
  return os.str();
}

}  // namespace detail

// Unique stationary distribution of W. Requires an irreducible process; the
// error otherwise names the disconnected blocks (1-based levels). The kernel
// equation is closed by replacing the last row with normalization.
template <class Scalar>
Vector<Scalar> classical_steady_state(const Matrix<Scalar>& w) {
  const int n = static_cast<int>(w.rows());
  if (n == 0 || w.cols() != n) throw SolverError("rate matrix must be square and non-empty");
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (i != j && w(i, j) < Scalar(0))
        throw SolverError("rate matrix has a negative transition rate");
  const auto blocks = detail::support_components(w);
  if (blocks.size() != 1)
    throw SolverError("stationary state is not unique: transition graph splits into blocks " +
                      detail::format_blocks(blocks));

  const Vector<Scalar> ones = Vector<Scalar>::Ones(n);
  Vector<Scalar> p = solve_with_replaced_row(w, n - 1, ones);

  const Scalar scale = detail::max_abs(w);
  const Scalar residual = detail::max_abs(Vector<Scalar>((w * p)));
  if (!(residual <= Scalar(1e-12) * scale))
    throw SolverError("stationary solve residual too large");
  for (int i = 0; i < n; ++i)
    if (!(p(i) > Scalar(0)))
      throw SolverError("stationary solve produced a non-positive probability");
  p /= p.sum();
  return p;
}

// p(t) = exp(W t) p0.
template <class Scalar>
Vector<Scalar> classical_propagate(const Matrix<Scalar>& w, const Vector<Scalar>& p0,
                                   Scalar t) {
  ComplexVector<Scalar> v = p0.template cast<std::complex<Scalar>>();
  const ComplexMatrix<Scalar> m = w.template cast<std::complex<Scalar>>();
  return apply_exponential(m, t, v).real();
}

// Certificate that W faithfully emulates the machine. Three checks:
//   1. W is a proper generator (non-negative rates, vanishing column sums);
//   2. every dissipative channel satisfies detailed balance against its own
//      bath temperature (checked on the channel rates; parallel channels of
//      different temperatures legitimately break balance of the summed entry);
//   3. W equals the channel sum, including the symmetric eliminated-drive
//      pair on the work edge.
// Worst violations are reported in relative terms.
struct BalanceCertificate {
  bool ok = false;
  Real worst_column_sum = 0;       // |column sum| / max rate
  Real worst_detailed_balance = 0; // relative deviation from the Boltzmann factor
  Real worst_reconstruction = 0;   // max |W - channel sum| / max rate
  std::vector<std::string> violations;
};

template <class Scalar>
BalanceCertificate certify_balance(const MachineSpec& spec, const Matrix<Scalar>& w) {
  validate_structure(spec);
  const int n = spec.num_levels;
  if (w.rows() != n || w.cols() != n)
    throw ConfigError("rate matrix size does not match the machine");
  BalanceCertificate cert;
  cert.ok = true;
  const Real scale = Real(detail::max_abs(w));
  if (!(scale > Real(0))) {
    cert.ok = false;
    cert.violations.push_back("rate matrix is identically zero");
    return cert;
  }

  for (int j = 0; j < n; ++j) {
    Real column = 0;
    for (int i = 0; i < n; ++i) {
      column += Real(w(i, j));
      if (i != j && w(i, j) < Scalar(0)) {
        cert.ok = false;
        cert.violations.push_back("negative rate at (" + std::to_string(i + 1) + "," +
                                  std::to_string(j + 1) + ")");
      }
    }
    cert.worst_column_sum = std::max(cert.worst_column_sum, std::abs(column) / scale);
  }
  if (!(cert.worst_column_sum <= Real(1e-14))) {
    cert.ok = false;
    cert.violations.push_back("column sums do not vanish");
  }

  for (const CycleEdge* e : detail::dissipative_edges(spec)) {
    const Real gap = std::abs(edge_gap(spec, *e));
    const BathParams& bath = bath_by_label(spec, e->bath);
    const Real dev = Real(check_detailed_balance(Scalar(gap), bath));
    cert.worst_detailed_balance = std::max(cert.worst_detailed_balance, dev);
    if (!(dev <= Real(1e-13))) {
      cert.ok = false;
      cert.violations.push_back("detailed balance violated on bath '" + bath.label +
                                "' edge " + std::to_string(e->from + 1) + "-" +
                                std::to_string(e->to + 1));
    }
  }

  const Matrix<Scalar> expected = build_rate_matrix<Scalar>(spec);
  cert.worst_reconstruction =
      Real(detail::max_abs(Matrix<Scalar>(w - expected))) / scale;
  if (!(cert.worst_reconstruction <= Real(1e-14))) {
    cert.ok = false;
    cert.violations.push_back("rate matrix does not match the machine's channel sum");
  }
  return cert;
}

// Net stationary flux along each cycle edge (in the edge's stored direction),
// work edge included. Tight coupling makes these equal on a single cycle.
template <class Scalar>
std::vector<Scalar> edge_fluxes(const MachineSpec& spec, const Matrix<Scalar>& w,
                                const Vector<Scalar>& p) {
  std::vector<Scalar> fluxes;
  fluxes.reserve(spec.cycle.size());
  for (const CycleEdge& e : spec.cycle)
    fluxes.push_back(w(e.to, e.from) * p(e.from) - w(e.from, e.to) * p(e.to));
  return fluxes;
}

}  // namespace qtm
