#pragma once

#include <cmath>

#include "slicevol/error.hpp"
#include "slicevol/gamma.hpp"
#include "slicevol/interpolant.hpp"
#include "slicevol/sde.hpp"

namespace slicevol {

// First two raw moments of the error process V_t = X_t - p_t.
struct MomentState {
  double m1 = 0.0;  // E[V_t], mm²
  double m2 = 0.0;  // E[V_t²], mm⁴
};

// Gamma surrogate transition density, matched in X-space.
struct GammaSurrogate {
  double shape = 1.0;
  double rate = 1.0;  // 1/mm²

  GammaSpec spec() const { return GammaSpec{shape, rate}; }
};

struct MomentDiagnostics {
  long degenerate_variance = 0;
};

// Classic fixed-step RK4 on the linear moment system
//   m1' = -theta(t) m1
//   m2' = -2 theta(t) m2 + 2 alpha theta0 (m1 + p(t)).
// theta uses the left-hand slope at t_end so the whole integration stays
// on the segment being crossed (the matched density is the limit t↑j).
template <PredictionCurve P>
MomentState propagate_moments(double v_start, double t_start, double t_end, const P& p,
                              const SdeParams& sp, int steps) {
  if (!(t_end > t_start)) throw Error(Errc::domain_error, "propagate_moments: empty interval");
  if (steps <= 0) throw Error(Errc::domain_error, "propagate_moments: steps must be positive");

  const double h = (t_end - t_start) / steps;
  const double c = 2.0 * sp.alpha * sp.theta0;

  auto theta_at = [&](double t) {
    const double pt = p(t);
    if (!(pt > 0.0))
      throw Error(Errc::domain_error, "propagate_moments: prediction not positive at t");
    const double sl = t >= t_end ? p.slope_before(t_end) : p.slope(t);
    return std::max(sp.theta0, (sp.alpha * sp.theta0 - sl) / pt);
  };
  auto deriv = [&](double t, const MomentState& m) {
    const double theta = theta_at(t);
    return MomentState{-theta * m.m1, -2.0 * theta * m.m2 + c * m.m1 + c * p(t)};
  };

  MomentState m{v_start, v_start * v_start};
  for (int i = 0; i < steps; ++i) {
    const double t = t_start + i * h;
    const MomentState k1 = deriv(t, m);
    const MomentState k2 = deriv(t + 0.5 * h, {m.m1 + 0.5 * h * k1.m1, m.m2 + 0.5 * h * k1.m2});
    const MomentState k3 = deriv(t + 0.5 * h, {m.m1 + 0.5 * h * k2.m1, m.m2 + 0.5 * h * k2.m2});
    const MomentState k4 = deriv(t + h, {m.m1 + h * k3.m1, m.m2 + h * k3.m2});
    m.m1 += h / 6.0 * (k1.m1 + 2.0 * k2.m1 + 2.0 * k3.m1 + k4.m1);
    m.m2 += h / 6.0 * (k1.m2 + 2.0 * k2.m2 + 2.0 * k3.m2 + k4.m2);
  }
  return m;
}

// Shift back to X-space (mu = m1 + p_end; the variance is location
// invariant) and match a gamma by its first two moments.
inline GammaSurrogate match_gamma(const MomentState& m, double p_end) {
  const double mu = m.m1 + p_end;
  const double var = m.m2 - m.m1 * m.m1;
  if (!(mu > 0.0)) throw Error(Errc::nonpositive_mean, "surrogate mean is not positive");
  if (!(var > 0.0)) throw Error(Errc::degenerate_variance, "surrogate variance is not positive");
  return GammaSurrogate{mu * mu / var, mu / var};
}

// Likelihood-path variant: a collapsed variance (possible from rounding on
// tiny intervals) is floored instead of thrown, keeping optimizer line
// searches alive; occurrences are counted for the fit report.
inline GammaSurrogate match_gamma_floored(const MomentState& m, double p_end,
                                          MomentDiagnostics* diag) {
  const double mu = m.m1 + p_end;
  if (!(mu > 0.0)) throw Error(Errc::nonpositive_mean, "surrogate mean is not positive");
  double var = m.m2 - m.m1 * m.m1;
  const double floor = 1e-12 * mu * mu;
  if (!(var > floor)) {
    var = floor;
    if (diag != nullptr) ++diag->degenerate_variance;
  }
  return GammaSurrogate{mu * mu / var, mu / var};
}

}  // namespace slicevol
