#pragma once

#include <cmath>

#include "psifrac/errors.hpp"

namespace psifrac {

/// log Gamma on the positive axis.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw input_error("log_gamma requires a positive argument");
  return std::lgamma(x);
}

inline double gamma_fn(double x) { return std::exp(log_gamma(x)); }

/// Gamma(a)/Gamma(b) for positive a, b, evaluated as exp(lgamma(a)-lgamma(b))
/// so that moderate arguments never overflow on the way.
inline double gamma_ratio(double a, double b) {
  return std::exp(log_gamma(a) - log_gamma(b));
}

}  // namespace psifrac
