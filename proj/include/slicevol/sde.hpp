#pragma once

#include <cmath>
#include <vector>

#include "slicevol/error.hpp"
#include "slicevol/interpolant.hpp"
#include "slicevol/rng.hpp"

namespace slicevol {

// Parameters of the mean-reverting square-root diffusion
//   dX = (p'(t) - theta(t) (X - p(t))) dt + sqrt(2 alpha theta0 X) dW.
struct SdeParams {
  double theta0 = 1.0;  // 1/slice, minimum mean-reversion rate
  double alpha = 1.0;   // mm², path-variability scale
};

inline void validate(const SdeParams& sp) {
  if (!(sp.theta0 > 0.0) || !std::isfinite(sp.theta0))
    throw Error(Errc::degenerate_params, "theta0 must be positive");
  if (!(sp.alpha > 0.0) || !std::isfinite(sp.alpha))
    throw Error(Errc::degenerate_params, "alpha must be positive");
}

// Simulated path sampled on a uniform grid over [t_start, t_end].
struct PathGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  std::vector<double> values;
};

// Depth-varying reversion rate theta(t) = max(theta0, (alpha theta0 - p') / p).
// The second branch inflates the pull near small predictions, which is what
// keeps the process strictly positive.
template <PredictionCurve P>
double reversion_rate(double t, const P& p, const SdeParams& sp) {
  const double pt = p(t);
  if (!(pt > 0.0))
    throw Error(Errc::domain_error, "prediction must be positive inside the SDE region");
  return std::max(sp.theta0, (sp.alpha * sp.theta0 - p.slope(t)) / pt);
}

template <PredictionCurve P>
double drift(double x, double t, const P& p, const SdeParams& sp) {
  return p.slope(t) - reversion_rate(t, p, sp) * (x - p(t));
}

// State-dependent diffusion, zero-padded for non-positive states.
inline double diffusion(double x, const SdeParams& sp) {
  return std::sqrt(2.0 * sp.alpha * sp.theta0 * std::max(x, 0.0));
}

// Euler-Maruyama with full truncation: the state is clamped at zero inside
// both the drift's x-argument and the square root, while the stored path
// keeps the raw update. Deterministic given the rng stream.
template <PredictionCurve P>
PathGrid simulate_path(const P& p, double t_start, double t_end, double x_start,
                       const SdeParams& sp, double dt, RngStream& rng) {
  if (!(t_end >= t_start)) throw Error(Errc::domain_error, "simulate_path: t_end < t_start");
  if (!(dt > 0.0)) throw Error(Errc::domain_error, "simulate_path: dt must be > 0");
  if (!(x_start > 0.0)) throw Error(Errc::domain_error, "simulate_path: x_start must be > 0");

  const double span = t_end - t_start;
  const long steps = span == 0.0 ? 0 : std::max(1l, std::lround(span / dt));
  const double h = steps == 0 ? dt : span / static_cast<double>(steps);

  PathGrid grid{t_start, t_end, h, {}};
  grid.values.reserve(static_cast<std::size_t>(steps) + 1);
  grid.values.push_back(x_start);

  const double sqrt_h = std::sqrt(h);
  const double diff_coeff = 2.0 * sp.alpha * sp.theta0;
  double x = x_start;
  for (long i = 0; i < steps; ++i) {
    const double t = t_start + static_cast<double>(i) * h;
    const double pt = p(t);
    if (!(pt > 0.0))
      throw Error(Errc::domain_error, "simulate_path: prediction not positive at t");
    const double sl = p.slope(t);
    const double theta = std::max(sp.theta0, (sp.alpha * sp.theta0 - sl) / pt);
    const double x_plus = std::max(x, 0.0);
    const double a = sl - theta * (x_plus - pt);
    const double b = std::sqrt(diff_coeff * x_plus);
    x += a * h + b * sqrt_h * rng.normal();
    grid.values.push_back(x);
  }
  return grid;
}

}  // namespace slicevol
