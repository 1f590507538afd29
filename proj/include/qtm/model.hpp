#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qtm/rates.hpp"
#include "qtm/types.hpp"

namespace qtm {

enum class EdgeKind { Bath, Work };

// Directed edge of the machine cycle. `from`/`to` are 0-based level indices;
// the stored direction fixes the sign of the gap E_to - E_from but carries no
// physical asymmetry (both transition directions always occur).
struct CycleEdge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::Bath;
  std::string bath;  // bath label; empty for the work edge
};

// Complete description of a cyclic N-level machine: a single closed cycle of
// transitions, each coupled to one bath except a single coherently driven
// work edge, plus an optional bath-mediated leak parallel to the work edge.
struct MachineSpec {
  int num_levels = 0;
  std::vector<double> energies;   // size num_levels
  std::vector<CycleEdge> cycle;   // size num_levels, in cycle order
  std::optional<CycleEdge> leak;  // parallel to the work edge if present
  double lambda = 0.0;            // drive amplitude (weak: lambda << gamma)
  std::vector<BathParams> baths;  // exactly two, distinct temperatures
};

inline Real edge_gap(const MachineSpec& spec, const CycleEdge& edge) {
  return Real(spec.energies.at(edge.to)) - Real(spec.energies.at(edge.from));
}

inline int work_edge_index(const MachineSpec& spec) {
  for (std::size_t i = 0; i < spec.cycle.size(); ++i)
    if (spec.cycle[i].kind == EdgeKind::Work) return static_cast<int>(i);
  throw ConfigError("machine has no work edge");
}

inline const BathParams& bath_by_label(const MachineSpec& spec, const std::string& label) {
  for (const BathParams& bath : spec.baths)
    if (bath.label == label) return bath;
  throw ConfigError("unknown bath label '" + label + "'");
}

// Colder of the two baths.
inline const BathParams& cold_bath(const MachineSpec& spec) {
  if (spec.baths.size() != 2) throw ConfigError("machine must have exactly two baths");
  return spec.baths[0].temperature < spec.baths[1].temperature ? spec.baths[0]
                                                               : spec.baths[1];
}

inline const BathParams& hot_bath(const MachineSpec& spec) {
  if (spec.baths.size() != 2) throw ConfigError("machine must have exactly two baths");
  return spec.baths[0].temperature < spec.baths[1].temperature ? spec.baths[1]
                                                               : spec.baths[0];
}

// Throws ConfigError unless the spec describes a supported machine: one ring
// visiting every level once, exactly one work edge, nonzero gaps, two baths
// with positive distinct temperatures, pairwise distinct |gap| per bath (the
// local master equation needs spectrally resolvable transitions), and at most
// one leak edge parallel to the work edge.
inline void validate_structure(const MachineSpec& spec) {
  const int n = spec.num_levels;
  if (n < 3) throw ConfigError("machine needs at least three levels");
  if (static_cast<int>(spec.energies.size()) != n)
    throw ConfigError("energies list must have one entry per level");
  if (static_cast<int>(spec.cycle.size()) != n)
    throw ConfigError("cycle must have exactly one edge per level");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (spec.energies[i] == spec.energies[j])
        throw ConfigError("degenerate spectrum: levels " + std::to_string(i + 1) +
                          " and " + std::to_string(j + 1) + " share an energy");

  // The edge sequence must close into a single cycle covering every level.
  std::vector<int> seen(n, 0);
  for (int i = 0; i < n; ++i) {
    const CycleEdge& e = spec.cycle[i];
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
      throw ConfigError("cycle edge " + std::to_string(i + 1) + " references an unknown level");
    seen[e.from] += 1;
    if (e.to != spec.cycle[(i + 1) % n].from)
      throw ConfigError("cycle edge " + std::to_string(i + 1) +
                        " does not chain into the next edge");
  }
  for (int i = 0; i < n; ++i)
    if (seen[i] != 1)
      throw ConfigError("cycle must visit level " + std::to_string(i + 1) + " exactly once");

  int work_count = 0;
  for (const CycleEdge& e : spec.cycle) {
    if (edge_gap(spec, e) == Real(0))
      throw ConfigError("cycle edge between levels " + std::to_string(e.from + 1) + " and " +
                        std::to_string(e.to + 1) + " has zero gap");
    if (e.kind == EdgeKind::Work) {
      work_count += 1;
      if (!e.bath.empty()) throw ConfigError("work edge must not name a bath");
    } else {
      bath_by_label(spec, e.bath);  // throws on unknown label
    }
  }
  if (work_count != 1) throw ConfigError("machine must have exactly one work edge");

  if (spec.baths.size() != 2) throw ConfigError("machine must have exactly two baths");
  for (const BathParams& bath : spec.baths) {
    if (bath.label.empty()) throw ConfigError("bath labels must be non-empty");
    if (!(bath.temperature > 0.0))
      throw ConfigError("bath '" + bath.label + "': temperature must be positive");
    if (!(bath.dissipation_rate > 0.0))
      throw ConfigError("bath '" + bath.label + "': dissipation rate must be positive");
    if (bath.dimension < 1)
      throw ConfigError("bath '" + bath.label + "': spectral dimension must be >= 1");
    if (!(bath.reference_frequency > 0.0))
      throw ConfigError("bath '" + bath.label + "': reference frequency must be positive");
  }
  if (spec.baths[0].label == spec.baths[1].label)
    throw ConfigError("bath labels must be distinct");
  if (spec.baths[0].temperature == spec.baths[1].temperature)
    throw ConfigError("bath temperatures must be distinct");
  if (!(spec.lambda >= 0.0)) throw ConfigError("drive amplitude must be non-negative");

  // A leak may join any two levels (the cycle-decomposition machinery only
  // supports one parallel to the work edge, but that is a topology concern,
  // not a validity concern).
  if (spec.leak.has_value()) {
    const CycleEdge& leak = *spec.leak;
    if (leak.kind != EdgeKind::Bath) throw ConfigError("leak edge must couple to a bath");
    bath_by_label(spec, leak.bath);
    if (leak.from < 0 || leak.from >= n || leak.to < 0 || leak.to >= n)
      throw ConfigError("leak edge references an unknown level");
    if (leak.from == leak.to || edge_gap(spec, *spec.leak) == Real(0))
      throw ConfigError("leak edge must join two levels with distinct energies");
  }

  // Transitions handled by the same bath must have pairwise distinct |gap|,
  // otherwise the local dissipators are not individually addressable.
  for (const BathParams& bath : spec.baths) {
    std::vector<Real> gaps;
    for (const CycleEdge& e : spec.cycle)
      if (e.kind == EdgeKind::Bath && e.bath == bath.label)
        gaps.push_back(std::abs(edge_gap(spec, e)));
    if (spec.leak.has_value() && spec.leak->bath == bath.label)
      gaps.push_back(std::abs(edge_gap(spec, *spec.leak)));
    for (std::size_t i = 0; i < gaps.size(); ++i)
      for (std::size_t j = i + 1; j < gaps.size(); ++j)
        if (gaps[i] == gaps[j])
          throw ConfigError("bath '" + bath.label +
                            "' drives two transitions with equal |gap|");
  }
}

// Time scales underlying the local weak-drive master equation, eq-by-eq:
//   tau_bath        slowest bath correlation time, 1/min T
//   tau_system      slowest distinguishing system oscillation,
//                   1/min{|w_k-w_l|, w_k+w_l, 2 w_k} over dissipative gaps
//   tau_dissipation fastest relaxation, 1/max gamma
//   tau_drive       drive time, 1/lambda
// Validity needs tau_bath, tau_system << tau_dissipation and the slowest
// relaxation 1/min gamma << tau_drive, each by `separation_factor`.
struct ValidationReport {
  Real tau_bath = 0;
  Real tau_system = 0;
  Real tau_dissipation = 0;
  Real tau_drive = 0;
  double separation_factor = 10.0;
  bool ok = false;
  std::vector<std::string> warnings;
};

inline ValidationReport validate_spec(const MachineSpec& spec,
                                      double separation_factor = 10.0) {
  validate_structure(spec);
  if (!(separation_factor >= 1.0))
    throw ConfigError("separation factor must be >= 1");

  const Real inf = std::numeric_limits<Real>::infinity();
  ValidationReport report;
  report.separation_factor = separation_factor;

  Real min_temp = inf;
  Real max_gamma = 0;
  Real min_gamma = inf;
  for (const BathParams& bath : spec.baths) {
    min_temp = std::min(min_temp, Real(bath.temperature));
    max_gamma = std::max(max_gamma, Real(bath.dissipation_rate));
    min_gamma = std::min(min_gamma, Real(bath.dissipation_rate));
  }
  report.tau_bath = Real(1) / min_temp;
  report.tau_dissipation = Real(1) / max_gamma;
  report.tau_drive = spec.lambda > 0.0 ? Real(1) / Real(spec.lambda) : inf;

  std::vector<Real> freqs;
  for (const CycleEdge& e : spec.cycle)
    if (e.kind == EdgeKind::Bath) freqs.push_back(std::abs(edge_gap(spec, e)));
  if (spec.leak.has_value()) freqs.push_back(std::abs(edge_gap(spec, *spec.leak)));
  Real min_split = inf;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    min_split = std::min(min_split, 2 * freqs[i]);
    for (std::size_t j = i + 1; j < freqs.size(); ++j) {
      min_split = std::min(min_split, freqs[i] + freqs[j]);
      min_split = std::min(min_split, std::abs(freqs[i] - freqs[j]));
    }
  }
  report.tau_system = min_split > Real(0) ? Real(1) / min_split : inf;

  const Real f = Real(separation_factor);
  const Real tau_relax_slow = Real(1) / min_gamma;
  report.ok = true;
  auto warn = [&](const std::string& msg, Real lhs, Real rhs) {
    std::ostringstream os;
    os << msg << " (" << double(lhs) << " vs " << double(rhs) << ")";
    report.warnings.push_back(os.str());
    report.ok = false;
  };
  if (!(report.tau_bath * f <= report.tau_dissipation))
    warn("bath correlation time is not well separated from the dissipation time",
         report.tau_bath, report.tau_dissipation);
  if (!(report.tau_system * f <= report.tau_dissipation))
    warn("system oscillation time is not well separated from the dissipation time"
         " (near-degenerate transition frequencies violate the secular regime)",
         report.tau_system, report.tau_dissipation);
  if (!(tau_relax_slow * f <= report.tau_drive))
    warn("drive is not weak compared to the slowest relaxation",
         tau_relax_slow, report.tau_drive);
  return report;
}

// Three-level machine: ground 0, cold level omega_c, hot level omega_h.
// Cycle: cold edge 1->2, driven work edge 2->3 (gap omega_h - omega_c),
// hot edge 3->1.
inline MachineSpec build_three_level(double omega_c, double omega_h, double lambda,
                                     BathParams cold, BathParams hot) {
  if (!(omega_c > 0.0) || !(omega_h > omega_c))
    throw ConfigError("three-level machine requires 0 < omega_c < omega_h");
  MachineSpec spec;
  spec.num_levels = 3;
  spec.energies = {0.0, omega_c, omega_h};
  spec.cycle = {
      {0, 1, EdgeKind::Bath, cold.label},
      {1, 2, EdgeKind::Work, ""},
      {2, 0, EdgeKind::Bath, hot.label},
  };
  spec.lambda = lambda;
  spec.baths = {std::move(cold), std::move(hot)};
  validate_structure(spec);
  return spec;
}

// Four-level machine: the hot transition of the three-level cycle is split by
// an auxiliary level at omega_h + eps. Cycle: cold edge 1->2, work edge 2->4
// (gap omega_h - omega_c + eps), hot edge 4->3 (gap -eps), hot edge 3->1
// (gap -omega_h). eps may take either sign.
inline MachineSpec build_four_level(double omega_c, double omega_h, double eps,
                                    double lambda, BathParams cold, BathParams hot) {
  if (!(omega_c > 0.0) || !(omega_h > omega_c))
    throw ConfigError("four-level machine requires 0 < omega_c < omega_h");
  if (eps == 0.0)
    throw ConfigError("four-level machine requires eps != 0 (use the three-level builder)");
  if (!(omega_h + eps > omega_c))
    throw ConfigError("four-level machine requires omega_h + eps > omega_c");
  if (std::abs(eps) == omega_h)
    throw ConfigError("four-level machine requires |eps| != omega_h"
                      " (hot transitions must stay spectrally distinct)");
  MachineSpec spec;
  spec.num_levels = 4;
  spec.energies = {0.0, omega_c, omega_h, omega_h + eps};
  spec.cycle = {
      {0, 1, EdgeKind::Bath, cold.label},
      {1, 3, EdgeKind::Work, ""},
      {3, 2, EdgeKind::Bath, hot.label},
      {2, 0, EdgeKind::Bath, hot.label},
  };
  spec.lambda = lambda;
  spec.baths = {std::move(cold), std::move(hot)};
  validate_structure(spec);
  return spec;
}

// Adds a bath-mediated decay channel parallel to the work edge (a heat leak
// short-circuiting the drive). Defaults to the hot bath.
inline MachineSpec build_heat_leak_variant(const MachineSpec& base,
                                           const std::string& bath_label = "") {
  validate_structure(base);
  if (base.leak.has_value())
    throw ConfigError("machine already has a heat leak edge");
  MachineSpec spec = base;
  const CycleEdge& work = spec.cycle[work_edge_index(spec)];
  CycleEdge leak;
  leak.from = work.from;
  leak.to = work.to;
  leak.kind = EdgeKind::Bath;
  leak.bath = bath_label.empty() ? hot_bath(spec).label : bath_label;
  spec.leak = leak;
  validate_structure(spec);
  return spec;
}

}  // namespace qtm
