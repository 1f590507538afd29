#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qtm/graph.hpp"
#include "qtm/lindblad.hpp"
#include "qtm/model.hpp"
#include "qtm/types.hpp"

namespace qtm {

// Refrigeration window of the drive cycle: cooling requires
//   0 < (cold gap sum) < -(T_c / T_h) * (hot gap sum),
// with gaps summed along the cycle orientation. For the standard machines
// this reads omega_c < omega_h T_c/T_h (three-level) and
// omega_c < (omega_h + eps) T_c/T_h (four-level).
struct CoolingWindow {
  double cold_gap = 0;
  double boundary = 0;
  bool in_window = false;
};

inline CoolingWindow cooling_window(const MachineSpec& spec) {
  validate_structure(spec);
  const BathParams& cold = cold_bath(spec);
  const BathParams& hot = hot_bath(spec);
  Real cold_sum = 0, hot_sum = 0;
  for (const CycleEdge& e : spec.cycle) {
    if (e.kind != EdgeKind::Bath) continue;
    if (e.bath == cold.label)
      cold_sum += edge_gap(spec, e);
    else
      hot_sum += edge_gap(spec, e);
  }
  CoolingWindow window;
  window.cold_gap = double(cold_sum);
  window.boundary = double(-(Real(cold.temperature) / Real(hot.temperature)) * hot_sum);
  window.in_window = cold_sum > 0 && cold_sum < Real(window.boundary);
  return window;
}

// Scalar parameters of the standard four-level layout (levels 0, omega_c,
// omega_h, omega_h + eps; cycle cold, work, hot, hot).
struct FourLevelParams {
  double omega_c = 0;
  double omega_h = 0;
  double eps = 0;
  double lambda = 0;
  BathParams cold;
  BathParams hot;
};

inline FourLevelParams extract_four_level_params(const MachineSpec& spec) {
  validate_structure(spec);
  const auto fail = []() {
    throw ConfigError("machine does not have the standard four-level layout"
                      " (ground, cold level, two hot-split levels)");
  };
  if (spec.num_levels != 4 || spec.leak.has_value()) fail();
  const BathParams& cold = cold_bath(spec);
  const BathParams& hot = hot_bath(spec);
  const std::vector<CycleEdge>& c = spec.cycle;
  const bool layout = c[0].from == 0 && c[0].to == 1 && c[0].kind == EdgeKind::Bath &&
                      c[0].bath == cold.label && c[1].from == 1 && c[1].to == 3 &&
                      c[1].kind == EdgeKind::Work && c[2].from == 3 && c[2].to == 2 &&
                      c[2].kind == EdgeKind::Bath && c[2].bath == hot.label &&
                      c[3].from == 2 && c[3].to == 0 && c[3].kind == EdgeKind::Bath &&
                      c[3].bath == hot.label;
  if (!layout || spec.energies[0] != 0.0) fail();
  FourLevelParams params;
  params.omega_c = spec.energies[1];
  params.omega_h = spec.energies[2];
  params.eps = spec.energies[3] - spec.energies[2];
  params.lambda = spec.lambda;
  params.cold = cold;
  params.hot = hot;
  return params;
}

// Three-level machine with the auxiliary splitting removed: same omega_c,
// omega_h, drive amplitude, and baths.
inline MachineSpec derive_benchmark(const MachineSpec& spec4) {
  const FourLevelParams p = extract_four_level_params(spec4);
  return build_three_level(p.omega_c, p.omega_h, p.lambda, p.cold, p.hot);
}

// Cooling-power ratio of the two machines, from the stationary circuit
// currents of their emulating graphs, together with the ratio of stationary
// quantum coherences.
struct PerformanceRatio {
  Real ratio = 0;            // Qc(four-level) / Qc(three-level), graph currents
  Real coherence_ratio = 0;  // l1 coherence ratio from the full quantum solves
  Real qc3 = 0;
  Real qc4 = 0;
};

inline PerformanceRatio performance_ratio(const MachineSpec& spec3,
                                          const MachineSpec& spec4) {
  PerformanceRatio out;
  const auto dec3 = circuit_currents(build_rate_graph<Real>(spec3));
  const auto dec4 = circuit_currents(build_rate_graph<Real>(spec4));
  out.qc3 = dec3.heat_cold;
  out.qc4 = dec4.heat_cold;
  if (out.qc3 == 0) throw SolverError("benchmark cooling power vanishes; ratio undefined");
  out.ratio = out.qc4 / out.qc3;
  const Real c3 = coherence_l1(steady_state(build_generator<Real>(spec3)));
  const Real c4 = coherence_l1(steady_state(build_generator<Real>(spec4)));
  if (c3 == 0) throw SolverError("benchmark coherence vanishes; ratio undefined");
  out.coherence_ratio = c4 / c3;
  return out;
}

// Weak-drive closed form for the cooling-power ratio, R ~ A * D, in terms of
// the per-transition entropic factors X_c = omega_c/T_c, X_h = omega_h/T_h,
// X_eps = eps/T_h:
//   A = [1 + e^{X_c} + e^{X_c-X_h}] / [1 + e^{X_c} + e^{X_c-X_h} + e^{X_c-X_h-X_eps}]
//       * [1 - e^{X_c-X_h-X_eps}] / [1 - e^{X_c-X_h}]
// (population and force reshuffling; independent of the dissipation scales)
//   D = [G^c(omega_c) + G^h(omega_h)] / [G^c(omega_c) + G^h(eps)]
// (ratio of the coherence-damping denominators; G^h is evaluated at the
// signed splitting, absorption rate for eps < 0).
struct RatioApprox {
  Real a_factor = 0;
  Real d_factor = 0;
  Real product = 0;
};

inline RatioApprox ratio_approximation(const MachineSpec& spec4) {
  const FourLevelParams p = extract_four_level_params(spec4);
  const Real xc = Real(p.omega_c) / Real(p.cold.temperature);
  const Real xh = Real(p.omega_h) / Real(p.hot.temperature);
  const Real xe = Real(p.eps) / Real(p.hot.temperature);
  RatioApprox out;
  const Real base = std::exp(xc - xh);
  const Real split = std::exp(xc - xh - xe);
  const Real populated = 1 + std::exp(xc) + base;
  out.a_factor = (populated / (populated + split)) * ((1 - split) / (1 - base));
  const Real cold_rate = signed_rate(Real(p.omega_c), p.cold);
  const Real hot_rate = signed_rate(Real(p.omega_h), p.hot);
  const Real split_rate = signed_rate(Real(p.eps), p.hot);
  out.d_factor = (cold_rate + hot_rate) / (cold_rate + split_rate);
  out.product = out.a_factor * out.d_factor;
  return out;
}

// Exact counterpart of the D factor: the ratio of coherence-damping sums
// (equivalently the inverse ratio of the eliminated work rates), with the
// approximation error and the premise flag that the work rate is the
// smallest rate in both networks.
struct DenominatorApprox {
  Real exact = 0;   // damping(three-level) / damping(four-level)
  Real approx = 0;  // closed-form D factor
  Real ratio = 0;   // approx / exact
  bool work_rate_smallest = false;
};

inline DenominatorApprox denominator_approx(const MachineSpec& spec3,
                                            const MachineSpec& spec4) {
  DenominatorApprox out;
  const Real s3 = coherence_damping<Real>(spec3);
  const Real s4 = coherence_damping<Real>(spec4);
  out.exact = s3 / s4;
  out.approx = ratio_approximation(spec4).d_factor;
  out.ratio = out.approx / out.exact;
  const auto smallest = [](const MachineSpec& spec) {
    const auto g = build_rate_graph<Real>(spec);
    const Real w = g.edges[g.work_edge].fwd;
    Real min_rate = std::numeric_limits<Real>::infinity();
    for (const auto& e : g.edges)
      if (e.label != "work") min_rate = std::min({min_rate, e.fwd, e.bwd});
    return w < min_rate;
  };
  out.work_rate_smallest = smallest(spec3) && smallest(spec4);
  return out;
}

// Tight-coupling coefficients of performance (one quantum exchanged with the
// cold bath per work quantum through the drive): cop = cold gap / drive gap.
struct CopRatio {
  Real cop3 = 0;
  Real cop4 = 0;
  Real ratio = 0;  // cop4 / cop3 = 1 / (1 + eps/omega_w)
};

inline CopRatio ideal_cop_ratio(const MachineSpec& spec3, const MachineSpec& spec4) {
  const auto ideal = [](const MachineSpec& spec) {
    const BathParams& cold = cold_bath(spec);
    Real cold_sum = 0;
    for (const CycleEdge& e : spec.cycle)
      if (e.kind == EdgeKind::Bath && e.bath == cold.label)
        cold_sum += edge_gap(spec, e);
    return cold_sum / edge_gap(spec, spec.cycle[work_edge_index(spec)]);
  };
  CopRatio out;
  out.cop3 = ideal(spec3);
  out.cop4 = ideal(spec4);
  out.ratio = out.cop4 / out.cop3;
  return out;
}

// One evaluated comparison between a four-level machine and its three-level
// benchmark. All quantities are serialized as double.
struct ComparisonPoint {
  double value = 0;  // swept parameter value (equals eps for a single compare)
  double eps = 0;
  double x_eps = 0;
  double ratio = 0;     // R, graph cooling-power ratio
  double a_factor = 0;  // closed-form A
  double d_factor = 0;  // closed-form D
  double ad = 0;
  double cop3 = 0;  // quantum COP; NaN outside refrigeration
  double cop4 = 0;
  double cop_ratio = 0;  // tight-coupling closed form
  double qc3 = 0, qc4 = 0;
  double p3 = 0, p4 = 0;
  double coherence3 = 0, coherence4 = 0;
  bool in_window3 = false, in_window4 = false;
  bool secular_ok = false;    // time-scale separation of both machines
  bool approx_valid = false;  // work rate smallest in both networks
  bool ok = false;            // point evaluated without error
  std::string error;
};

inline ComparisonPoint compare_machines(const MachineSpec& spec3,
                                        const MachineSpec& spec4) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ComparisonPoint point;
  const FourLevelParams params = extract_four_level_params(spec4);
  point.eps = params.eps;
  point.x_eps = double(Real(params.eps) / Real(params.hot.temperature));
  point.value = params.eps;

  const PerformanceRatio perf = performance_ratio(spec3, spec4);
  point.ratio = double(perf.ratio);
  point.qc3 = double(perf.qc3);
  point.qc4 = double(perf.qc4);

  const RatioApprox approx = ratio_approximation(spec4);
  point.a_factor = double(approx.a_factor);
  point.d_factor = double(approx.d_factor);
  point.ad = double(approx.product);
  point.approx_valid = denominator_approx(spec3, spec4).work_rate_smallest;

  const ThermoReport report3 = thermo_report(spec3, steady_state(build_generator<Real>(spec3)));
  const ThermoReport report4 = thermo_report(spec4, steady_state(build_generator<Real>(spec4)));
  point.p3 = double(report3.power);
  point.p4 = double(report4.power);
  point.cop3 = report3.mode == OperationMode::Refrigerator ? double(*report3.cop) : nan;
  point.cop4 = report4.mode == OperationMode::Refrigerator ? double(*report4.cop) : nan;
  point.coherence3 = double(report3.coherence);
  point.coherence4 = double(report4.coherence);
  point.cop_ratio = double(ideal_cop_ratio(spec3, spec4).ratio);

  point.in_window3 = cooling_window(spec3).in_window;
  point.in_window4 = cooling_window(spec4).in_window;
  point.secular_ok = validate_spec(spec3).ok && validate_spec(spec4).ok;
  point.ok = true;
  return point;
}

enum class SweepParameter { Epsilon, XEpsilon, Lambda, GammaHot, OmegaCold };

inline const char* sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::Epsilon: return "epsilon";
    case SweepParameter::XEpsilon: return "X_eps";
    case SweepParameter::Lambda: return "lambda";
    case SweepParameter::GammaHot: return "gamma_h";
    default: return "omega_c";
  }
}

inline SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "epsilon") return SweepParameter::Epsilon;
  if (name == "X_eps") return SweepParameter::XEpsilon;
  if (name == "lambda") return SweepParameter::Lambda;
  if (name == "gamma_h") return SweepParameter::GammaHot;
  if (name == "omega_c") return SweepParameter::OmegaCold;
  throw ConfigError("unknown sweep parameter '" + name +
                    "' (expected epsilon, X_eps, lambda, gamma_h, or omega_c)");
}

struct SweepGrid {
  SweepParameter parameter = SweepParameter::XEpsilon;
  double min = -1.0;
  double max = 1.0;
  int count = 201;
};

struct SweepResult {
  SweepGrid grid;
  std::vector<ComparisonPoint> points;
};

// Evaluates the comparison on a uniform grid, in grid order. A point whose
// machine cannot be built or solved is recorded with ok = false and the
// error message; the sweep continues.
inline SweepResult sweep(const MachineSpec& spec4, const SweepGrid& grid) {
  const FourLevelParams base = extract_four_level_params(spec4);
  if (grid.count < 1) throw ConfigError("sweep needs at least one point");
  if (!(grid.min <= grid.max)) throw ConfigError("sweep range must have min <= max");
  SweepResult result;
  result.grid = grid;
  result.points.reserve(grid.count);
  for (int i = 0; i < grid.count; ++i) {
    const double value =
        grid.count == 1
            ? grid.min
            : grid.min + (grid.max - grid.min) * double(i) / double(grid.count - 1);
    ComparisonPoint point;
    point.value = value;
    FourLevelParams p = base;
    switch (grid.parameter) {
      case SweepParameter::Epsilon: p.eps = value; break;
      case SweepParameter::XEpsilon: p.eps = value * p.hot.temperature; break;
      case SweepParameter::Lambda: p.lambda = value; break;
      case SweepParameter::GammaHot: p.hot.dissipation_rate = value; break;
      case SweepParameter::OmegaCold: p.omega_c = value; break;
    }
    try {
      const MachineSpec four =
          build_four_level(p.omega_c, p.omega_h, p.eps, p.lambda, p.cold, p.hot);
      point = compare_machines(derive_benchmark(four), four);
      point.value = value;
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      point = ComparisonPoint{};
      point.value = value;
      point.ok = false;
      point.error = e.what();
      point.eps = p.eps;
      point.x_eps = double(Real(p.eps) / Real(p.hot.temperature));
      point.ratio = point.a_factor = point.d_factor = point.ad = nan;
      point.cop3 = point.cop4 = point.cop_ratio = nan;
      point.qc3 = point.qc4 = point.p3 = point.p4 = nan;
      point.coherence3 = point.coherence4 = nan;
    }
    result.points.push_back(point);
  }
  return result;
}

}  // namespace qtm
