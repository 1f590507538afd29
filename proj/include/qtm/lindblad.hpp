#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "qtm/emulator.hpp"
#include "qtm/model.hpp"
#include "qtm/numeric.hpp"
#include "qtm/types.hpp"

namespace qtm {

// Generator of the local master equation in the rotating frame, acting on
// column-major vectorized density matrices (index i + N j for element ij):
//   d sigma/dt = -i [h, sigma] + sum_k r_k (A_k sigma A_k^dag
//                - {A_k^dag A_k, sigma} / 2),
// with h = lambda (|u><v| + |v><u|) on the work edge and one jump operator
// per direction of every dissipative channel.
template <class Scalar>
ComplexMatrix<Scalar> build_generator(const MachineSpec& spec) {
  validate_structure(spec);
  using CMat = ComplexMatrix<Scalar>;
  using C = std::complex<Scalar>;
  const int n = spec.num_levels;
  const CMat id = CMat::Identity(n, n);

  CMat h = CMat::Zero(n, n);
  const CycleEdge& work = spec.cycle[work_edge_index(spec)];
  h(work.from, work.to) = C(Scalar(spec.lambda), Scalar(0));
  h(work.to, work.from) = C(Scalar(spec.lambda), Scalar(0));

  CMat generator = CMat::Zero(n * n, n * n);
  const C minus_i = C(Scalar(0), Scalar(-1));
  generator += minus_i * (Eigen::kroneckerProduct(id, h) -
                          Eigen::kroneckerProduct(h.transpose(), id));

  auto add_jump = [&](int from_level, int to_level, Scalar rate) {
    CMat a = CMat::Zero(n, n);
    a(to_level, from_level) = C(Scalar(1), Scalar(0));
    const CMat number = a.adjoint() * a;  // projector on from_level
    generator += C(rate, Scalar(0)) *
                 (Eigen::kroneckerProduct(a.conjugate(), a) -
                  Scalar(0.5) * Eigen::kroneckerProduct(id, number) -
                  Scalar(0.5) * Eigen::kroneckerProduct(number.transpose(), id));
  };
  for (const CycleEdge* e : detail::dissipative_edges(spec)) {
    const Scalar gap = Scalar(edge_gap(spec, *e));
    const BathParams& bath = bath_by_label(spec, e->bath);
    add_jump(e->to, e->from, signed_rate(gap, bath));   // descend (emission for gap > 0)
    add_jump(e->from, e->to, signed_rate(-gap, bath));  // climb
  }
  return generator;
}

// Stationary density matrix of the generator. The kernel must be exactly
// one-dimensional (counted by full-pivot LU at relative pivot threshold
// 1e-10, which separates rounding-floor pivots from the slowest physical
// mode as long as the drive is not pathologically weak, i.e.
// 4 lambda^2 / damping > 1e-10 * max rate). The kernel equation is closed by
// replacing the (0,0)-element row with the trace constraint, and the
// unnormalized residual is required to stay below 1e-12 * max|L|.
template <class Scalar>
ComplexMatrix<Scalar> steady_state(const ComplexMatrix<Scalar>& generator) {
  using CMat = ComplexMatrix<Scalar>;
  using CVec = ComplexVector<Scalar>;
  using C = std::complex<Scalar>;
  const int dim = static_cast<int>(generator.rows());
  const int n = static_cast<int>(std::lround(std::sqrt(double(dim))));
  if (n * n != dim || generator.cols() != dim)
    throw SolverError("generator must act on vectorized square matrices");

  const int kernel = kernel_dimension(generator, Scalar(1e-10));
  if (kernel != 1)
    throw SolverError("stationary kernel has dimension " + std::to_string(kernel) +
                      ", expected 1");

  CVec trace_row = CVec::Zero(dim);
  for (int i = 0; i < n; ++i) trace_row(i + n * i) = C(Scalar(1), Scalar(0));
  const CVec x = solve_with_replaced_row(generator, 0, trace_row);

  const Scalar scale = detail::max_abs(generator);
  const Scalar residual = detail::max_abs(CVec(generator * x));
  if (!(residual <= Scalar(1e-12) * scale))
    throw SolverError("stationary solve residual too large");

  CMat rho(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) rho(i, j) = x(i + n * j);
  rho = (rho + rho.adjoint()).eval() / Scalar(2);  // remove rounding asymmetry
  for (int i = 0; i < n; ++i)
    if (!(rho(i, i).real() > -Scalar(1e-13)))
      throw SolverError("stationary state has a negative population");
  return rho;
}

// sigma(t) = exp(L t) applied to sigma0.
template <class Scalar>
ComplexMatrix<Scalar> propagate(const ComplexMatrix<Scalar>& generator,
                                const ComplexMatrix<Scalar>& sigma0, Scalar t) {
  const int n = static_cast<int>(sigma0.rows());
  ComplexVector<Scalar> v(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) v(i + n * j) = sigma0(i, j);
  const ComplexVector<Scalar> out = apply_exponential(generator, t, v);
  ComplexMatrix<Scalar> sigma(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) sigma(i, j) = out(i + n * j);
  return sigma;
}

// Stationary work-edge coherence from the populations, by exact elimination:
//   <u| sigma |v> = 2 i lambda (p_u - p_v) / damping.
template <class Scalar>
std::complex<Scalar> stationary_coherence(const MachineSpec& spec,
                                          const Vector<Scalar>& populations) {
  const CycleEdge& work = spec.cycle[work_edge_index(spec)];
  if (spec.lambda == 0.0) return std::complex<Scalar>(0, 0);
  const Scalar damping = coherence_damping<Scalar>(spec);
  const Scalar value =
      Scalar(2) * Scalar(spec.lambda) * (populations(work.from) - populations(work.to)) / damping;
  return std::complex<Scalar>(Scalar(0), value);
}

// Reduced steady state: populations from the classical emulator kernel plus
// the eliminated coherence on the work edge. Exact for this model class (the
// work-edge coherence is the only one generated).
template <class Scalar>
ComplexMatrix<Scalar> steady_state_reduced(const MachineSpec& spec) {
  const Matrix<Scalar> w = build_rate_matrix<Scalar>(spec);
  const Vector<Scalar> p = classical_steady_state(w);
  const int n = spec.num_levels;
  ComplexMatrix<Scalar> rho = ComplexMatrix<Scalar>::Zero(n, n);
  for (int i = 0; i < n; ++i) rho(i, i) = std::complex<Scalar>(p(i), Scalar(0));
  const CycleEdge& work = spec.cycle[work_edge_index(spec)];
  const std::complex<Scalar> c = stationary_coherence(spec, p);
  rho(work.from, work.to) = c;
  rho(work.to, work.from) = std::conj(c);
  return rho;
}

// l1 coherence monotone: sum of the magnitudes of all off-diagonal elements.
template <class Scalar>
Scalar coherence_l1(const ComplexMatrix<Scalar>& rho) {
  Scalar total = Scalar(0);
  for (int j = 0; j < rho.cols(); ++j)
    for (int i = 0; i < rho.rows(); ++i)
      if (i != j) total += std::abs(rho(i, j));
  return total;
}

enum class OperationMode { Refrigerator, Engine, Dissipator };

inline const char* mode_name(OperationMode mode) {
  switch (mode) {
    case OperationMode::Refrigerator: return "refrigerator";
    case OperationMode::Engine: return "engine";
    default: return "dissipator";
  }
}

// Stationary energy bookkeeping. Heat currents are positive when energy
// flows out of the bath into the machine; power is positive when work is
// injected by the drive. cop is the coefficient of performance Qc/P for a
// refrigerator and the efficiency -P/Qh for an engine.
struct ThermoReport {
  Real heat_cold = 0;
  Real heat_hot = 0;
  Real power = 0;
  Real flux = 0;  // net population current through the driven edge
  Real entropy_rate = 0;
  Real coherence = 0;
  OperationMode mode = OperationMode::Dissipator;
  std::optional<Real> cop;
};

template <class Scalar>
ThermoReport thermo_report(const MachineSpec& spec, const ComplexMatrix<Scalar>& rho) {
  validate_structure(spec);
  const BathParams& cold = cold_bath(spec);
  const BathParams& hot = hot_bath(spec);
  ThermoReport report;

  // Heat from each bath: sum over its channels of gap * net upward flux.
  for (const CycleEdge* e : detail::dissipative_edges(spec)) {
    const Scalar gap = Scalar(edge_gap(spec, *e));
    const BathParams& bath = bath_by_label(spec, e->bath);
    const Scalar up = signed_rate(-gap, bath);
    const Scalar down = signed_rate(gap, bath);
    const Scalar flux = up * rho(e->from, e->from).real() - down * rho(e->to, e->to).real();
    const Real heat = Real(gap) * Real(flux);
    if (bath.label == cold.label)
      report.heat_cold += heat;
    else
      report.heat_hot += heat;
  }

  const CycleEdge& work = spec.cycle[work_edge_index(spec)];
  const Scalar gap_w = Scalar(edge_gap(spec, work));
  const Scalar drive_flux =
      Scalar(2) * Scalar(spec.lambda) * rho(work.from, work.to).imag();
  report.flux = Real(drive_flux);
  report.power = Real(gap_w) * Real(drive_flux);
  report.entropy_rate = -report.heat_cold / Real(cold.temperature) -
                        report.heat_hot / Real(hot.temperature);
  report.coherence = Real(coherence_l1(rho));

  if (report.heat_cold > 0 && report.power > 0) {
    report.mode = OperationMode::Refrigerator;
    report.cop = report.heat_cold / report.power;
  } else if (report.power < 0 && report.heat_hot > 0) {
    report.mode = OperationMode::Engine;
    report.cop = -report.power / report.heat_hot;
  } else {
    report.mode = OperationMode::Dissipator;
  }
  return report;
}

}  // namespace qtm
