#pragma once

#include <cmath>
#include <string>

#include "qtm/types.hpp"

namespace qtm {

// Equilibrium bosonic bath with a power-law spectral density of dimension d.
// Stored as double so machine descriptions round-trip through JSON exactly.
struct BathParams {
  std::string label;          // e.g. "cold", "hot"
  double temperature = 0.0;   // T > 0 (units k_B = 1)
  double dissipation_rate = 0.0;  // overall coupling scale gamma > 0
  int dimension = 1;          // spectral exponent d >= 1
  double reference_frequency = 1.0;  // omega0 > 0, normalizes (omega/omega0)^d
};

// Downward (emission, into the bath) and upward (absorption) rates of one
// transition of frequency omega > 0.
template <class Scalar>
struct RatePair {
  Scalar down = Scalar(0);
  Scalar up = Scalar(0);
};

namespace detail {

// Small integer power, exact factor ordering (no pow() rounding surprises).
template <class Scalar>
Scalar pow_int(Scalar base, int exponent) {
  Scalar out = Scalar(1);
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

}  // namespace detail

// Bath-induced rate at signed frequency x:
//   x > 0: gamma (x/omega0)^d / (1 - e^{-x/T})   (emission of a quantum x)
//   x < 0: e^{x/T} * signed_rate(-x)             (absorption of a quantum -x)
// x = 0 has no meaning for these transitions and is rejected.
// The two branches satisfy detailed balance by construction:
//   signed_rate(-x) / signed_rate(x) = e^{-x/T}.
template <class Scalar>
Scalar signed_rate(Scalar x, const BathParams& bath) {
  if (!(bath.temperature > 0.0))
    throw ConfigError("bath '" + bath.label + "': temperature must be positive");
  if (!(bath.dissipation_rate >= 0.0))
    throw ConfigError("bath '" + bath.label + "': dissipation rate must be non-negative");
  if (bath.dimension < 1)
    throw ConfigError("bath '" + bath.label + "': spectral dimension must be >= 1");
  if (!(bath.reference_frequency > 0.0))
    throw ConfigError("bath '" + bath.label + "': reference frequency must be positive");
  if (x == Scalar(0))
    throw ConfigError("bath '" + bath.label + "': rate requested at zero frequency");
  const Scalar T = Scalar(bath.temperature);
  if (x < Scalar(0)) {
    using std::exp;
    return exp(x / T) * signed_rate(-x, bath);
  }
  using std::expm1;
  const Scalar planck = -expm1(-x / T);  // 1 - e^{-x/T}, stable for small x/T
  const Scalar spectral =
      detail::pow_int(x / Scalar(bath.reference_frequency), bath.dimension);
  return Scalar(bath.dissipation_rate) * spectral / planck;
}

// Emission/absorption pair for a transition frequency omega > 0.
template <class Scalar>
RatePair<Scalar> decay_rates(Scalar omega, const BathParams& bath) {
  if (!(omega > Scalar(0)))
    throw ConfigError("bath '" + bath.label +
                      "': decay_rates requires a positive transition frequency");
  RatePair<Scalar> pair;
  pair.down = signed_rate(omega, bath);
  pair.up = signed_rate(-omega, bath);
  return pair;
}

// Relative deviation of up/down from the Boltzmann factor e^{-omega/T}.
template <class Scalar>
Scalar check_detailed_balance(Scalar omega, const BathParams& bath) {
  const RatePair<Scalar> pair = decay_rates(omega, bath);
  using std::abs;
  using std::exp;
  const Scalar boltzmann = exp(-omega / Scalar(bath.temperature));
  return abs(pair.up / pair.down - boltzmann) / boltzmann;
}

}  // namespace qtm
