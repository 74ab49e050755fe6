#pragma once

#include <cmath>
#include <limits>

#include "slicevol/error.hpp"
#include "slicevol/rng.hpp"

namespace slicevol {

// Gamma distribution in shape/rate form.
struct GammaSpec {
  double shape = 1.0;
  double rate = 1.0;

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

// Log density; -inf for x <= 0 (densities here are only ever evaluated
// on positive observations, log-space to survive large areas).
inline double gamma_log_pdf(double x, const GammaSpec& d) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return d.shape * std::log(d.rate) - std::lgamma(d.shape) + (d.shape - 1.0) * std::log(x) -
         d.rate * x;
}

inline double sample_gamma(RngStream& rng, const GammaSpec& d) {
  return rng.gamma(d.shape, d.rate);
}

}  // namespace slicevol
