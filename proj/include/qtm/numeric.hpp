#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "qtm/types.hpp"

namespace qtm {

// Product of many positive factors with an explicit power-of-two exponent so
// extreme magnitudes never underflow or overflow. Scaling by powers of two is
// exact, so in the normal range value() is bit-identical to the plain product
// taken in the same factor order. That exactness is load-bearing: closed-form
// spanning-tree weights are checked for exact equality against first
// principles, which a log-space accumulator would break.
template <class Scalar>
class ScaledProduct {
 public:
  ScaledProduct& operator*=(Scalar factor) {
    int e = 0;
    using std::frexp;
    mantissa_ *= frexp(factor, &e);
    exponent_ += e;
    normalize();
    return *this;
  }

  Scalar mantissa() const { return mantissa_; }
  long exponent() const { return exponent_; }
  bool is_zero() const { return mantissa_ == Scalar(0); }

  Scalar value() const {
    using std::ldexp;
    return ldexp(mantissa_, clamp_exponent());
  }

  // log(product), valid for positive products of any magnitude.
  Scalar log_value() const {
    using std::log;
    return log(mantissa_) + Scalar(exponent_) * Scalar(0.693147180559945309417232121458176568L);
  }

 private:
  void normalize() {
    int e = 0;
    using std::frexp;
    mantissa_ = frexp(mantissa_, &e);
    exponent_ += e;
  }
  int clamp_exponent() const {
    const long lo = -1000000, hi = 1000000;  // ldexp saturates well before these
    const long e = exponent_ < lo ? lo : (exponent_ > hi ? hi : exponent_);
    return static_cast<int>(e);
  }
  Scalar mantissa_ = Scalar(1);
  long exponent_ = 0;
};

// Sum of ScaledProduct terms, accumulated at a shared power-of-two scale.
// Rounding matches plain addition in the same order whenever the plain sum
// stays in the normal range.
template <class Scalar>
class ScaledSum {
 public:
  ScaledSum& operator+=(const ScaledProduct<Scalar>& term) {
    if (term.is_zero()) return *this;
    using std::frexp;
    using std::ldexp;
    if (empty_) {
      mantissa_ = term.mantissa();
      exponent_ = term.exponent();
      empty_ = false;
      return *this;
    }
    if (term.exponent() > exponent_) {
      mantissa_ = ldexp(mantissa_, shift(exponent_ - term.exponent()));
      exponent_ = term.exponent();
      mantissa_ += term.mantissa();
    } else {
      mantissa_ += ldexp(term.mantissa(), shift(term.exponent() - exponent_));
    }
    int e = 0;
    mantissa_ = frexp(mantissa_, &e);
    exponent_ += e;
    return *this;
  }

  Scalar value() const {
    using std::ldexp;
    if (empty_) return Scalar(0);
    const long lo = -1000000, hi = 1000000;
    const long e = exponent_ < lo ? lo : (exponent_ > hi ? hi : exponent_);
    return ldexp(mantissa_, static_cast<int>(e));
  }

  Scalar mantissa() const { return mantissa_; }
  long exponent() const { return exponent_; }

 private:
  static int shift(long delta) {
    // A shift past the mantissa width flushes the term, as plain addition would.
    const long lo = -100000;
    return static_cast<int>(delta < lo ? lo : delta);
  }
  Scalar mantissa_ = Scalar(0);
  long exponent_ = 0;
  bool empty_ = true;
};

namespace detail {

template <class Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.rows() == 0 ? typename Derived::RealScalar(0) : m.cwiseAbs().maxCoeff();
}

}  // namespace detail

// Kernel dimension of a square matrix under FullPivLU with a relative pivot
// threshold. The stationary kernel of a sound generator shows pivots at the
// rounding floor (~1e-19 relative in extended precision) while the slowest
// physical mode stays orders above `rel_threshold`; the gap is what makes the
// count meaningful.
template <class MatrixType>
int kernel_dimension(const MatrixType& m,
                     typename MatrixType::RealScalar rel_threshold) {
  Eigen::FullPivLU<MatrixType> lu(m);
  lu.setThreshold(rel_threshold);
  return static_cast<int>(m.cols() - lu.rank());
}

// Solves M' x = e_row where M' is `m` with row `row` replaced by `constraint`.
// This pins the one-dimensional kernel of a generator to a normalized state.
template <class MatrixType, class VectorType>
VectorType solve_with_replaced_row(const MatrixType& m, int row,
                                   const VectorType& constraint) {
  MatrixType pinned = m;
  pinned.row(row) = constraint.transpose();
  VectorType rhs = VectorType::Zero(m.rows());
  rhs(row) = typename MatrixType::Scalar(1);
  Eigen::FullPivLU<MatrixType> lu(pinned);
  if (!lu.isInvertible())
    throw SolverError("normalized stationary system is singular");
  return lu.solve(rhs);
}

// exp(m * t) * v. Diagonalization is attempted first; if the eigenbasis does
// not reconstruct the matrix to working accuracy (defective or ill-conditioned
// generator), falls back to scaling-and-squaring on the full matrix.
template <class Scalar>
ComplexVector<Scalar> apply_exponential(const ComplexMatrix<Scalar>& m, Scalar t,
                                        const ComplexVector<Scalar>& v) {
  using CMat = ComplexMatrix<Scalar>;
  using CVec = ComplexVector<Scalar>;
  const Scalar scale = detail::max_abs(m);
  Eigen::ComplexEigenSolver<CMat> eigen(m, /*computeEigenvectors=*/true);
  if (eigen.info() == Eigen::Success && scale > Scalar(0)) {
    const CMat& basis = eigen.eigenvectors();
    Eigen::FullPivLU<CMat> lu(basis);
    if (lu.isInvertible()) {
      const CMat reconstructed =
          basis * eigen.eigenvalues().asDiagonal() * lu.inverse();
      using std::sqrt;
      const Scalar tol =
          sqrt(std::numeric_limits<Scalar>::epsilon()) * scale * Scalar(m.rows());
      if (detail::max_abs(CMat(reconstructed - m)) <= tol) {
        CVec coeffs = lu.solve(v);
        for (Eigen::Index i = 0; i < coeffs.size(); ++i)
          coeffs(i) *= std::exp(eigen.eigenvalues()(i) * t);
        return basis * coeffs;
      }
    }
  }
  const CMat propagator = CMat(m * t).exp();
  return propagator * v;
}

}  // namespace qtm
