#pragma once

#include <cmath>
#include <limits>

#include "slicevol/error.hpp"
#include "slicevol/gamma.hpp"
#include "slicevol/rng.hpp"

namespace slicevol {

// Hierarchical distribution for the two outermost slices at each end of
// the stack. A categorical layer picks one of three admissible error
// modes; the continuous layers are gamma distributions whose means are
// tied to the prediction at slice one.
struct JumpParams {
  double lambda_u = 0.0;  // jump-up probability
  double lambda_d = 0.0;  // jump-down probability
  double beta_u0 = 1.0;   // 1/mm², rate of the outer jump-up component
  double beta_u1 = 1.0;   // rate of the inner jump-up component
  double beta_n = 1.0;    // rate of the no-jump component
};

enum class JumpCase { no_jump, jump_up, jump_down };

inline const char* jump_case_name(JumpCase c) {
  switch (c) {
    case JumpCase::no_jump: return "no_jump";
    case JumpCase::jump_up: return "jump_up";
    case JumpCase::jump_down: return "jump_down";
  }
  return "?";
}

struct JumpSample {
  double x0 = 0.0;  // outermost slice, mm²
  double x1 = 0.0;  // its inner neighbour, mm²
  JumpCase kase = JumpCase::no_jump;
};

inline void validate(const JumpParams& jp) {
  if (!(jp.lambda_u >= 0.0) || !(jp.lambda_d >= 0.0) || !(jp.lambda_u + jp.lambda_d <= 1.0))
    throw Error(Errc::degenerate_params, "jump probabilities must satisfy 0 <= l_u + l_d <= 1");
}

// Gamma with a prescribed mean: shape = mu * beta, so mean is exactly mu.
inline GammaSpec gamma_for_mean(double mu, double beta) {
  if (!(mu > 0.0) || !(beta > 0.0))
    throw Error(Errc::domain_error, "gamma_for_mean requires mu > 0 and beta > 0");
  return GammaSpec{mu * beta, beta};
}

namespace detail {

inline void check_jump_coherent(const JumpParams& jp) {
  validate(jp);
  // The mean constraint for the jump-up outer component divides by
  // lambda_u, so downs without ups have no admissible distribution.
  if (jp.lambda_u == 0.0 && jp.lambda_d > 0.0)
    throw Error(Errc::degenerate_params,
                "lambda_u = 0 with lambda_d > 0 leaves the jump-up mean constraint unsolvable");
}

}  // namespace detail

// Draw (x0, x1) for one edge. The jump-up outer mean is (l_d / l_u) p1 so
// the edge stays bias-free: E[X0 + X1] = p1.
inline JumpSample sample_jump(double p1, const JumpParams& jp, RngStream& rng) {
  if (!(p1 > 0.0)) throw Error(Errc::domain_error, "sample_jump requires p1 > 0");
  detail::check_jump_coherent(jp);
  if (jp.lambda_u > 0.0 && jp.lambda_d == 0.0)
    throw Error(Errc::degenerate_params,
                "lambda_d = 0 with lambda_u > 0 forces a zero-mean jump-up outer component");

  const double u = rng.uniform();
  if (u <= jp.lambda_d) return JumpSample{0.0, 0.0, JumpCase::jump_down};
  if (u <= jp.lambda_d + jp.lambda_u) {
    const double x0 = sample_gamma(rng, gamma_for_mean(jp.lambda_d / jp.lambda_u * p1, jp.beta_u0));
    const double x1 = sample_gamma(rng, gamma_for_mean(p1, jp.beta_u1));
    return JumpSample{x0, x1, JumpCase::jump_up};
  }
  return JumpSample{0.0, sample_gamma(rng, gamma_for_mean(p1, jp.beta_n)), JumpCase::no_jump};
}

// Log density/mass of one observed edge configuration.
inline double jump_log_density(double x0, double x1, double p1, const JumpParams& jp) {
  if (!(p1 > 0.0)) throw Error(Errc::domain_error, "jump_log_density requires p1 > 0");
  if (!(x0 >= 0.0) || !(x1 >= 0.0))
    throw Error(Errc::inadmissible_config, "edge areas must be non-negative");
  if (x0 > 0.0 && x1 == 0.0)
    throw Error(Errc::inadmissible_config,
                "x0 > 0 with x1 = 0 would disconnect the volume; this case is not modeled");
  detail::check_jump_coherent(jp);

  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (x0 == 0.0 && x1 == 0.0) return jp.lambda_d > 0.0 ? std::log(jp.lambda_d) : neg_inf;
  if (x0 > 0.0) {
    if (jp.lambda_u == 0.0 || jp.lambda_d == 0.0) return neg_inf;
    return std::log(jp.lambda_u) +
           gamma_log_pdf(x0, gamma_for_mean(jp.lambda_d / jp.lambda_u * p1, jp.beta_u0)) +
           gamma_log_pdf(x1, gamma_for_mean(p1, jp.beta_u1));
  }
  const double lambda_n = 1.0 - jp.lambda_d - jp.lambda_u;
  if (lambda_n <= 0.0) return neg_inf;
  return std::log(lambda_n) + gamma_log_pdf(x1, gamma_for_mean(p1, jp.beta_n));
}

struct JumpMoments {
  double e_x0 = 0.0;
  double e_x1 = 0.0;
  double e_sum = 0.0;
};

// Closed-form marginal means under the mean constraints:
// E[X0] = l_d p1, E[X1] = (1 - l_d) p1, and their sum is exactly p1.
inline JumpMoments jump_marginal_moments(double p1, const JumpParams& jp) {
  if (!(p1 > 0.0)) throw Error(Errc::domain_error, "jump_marginal_moments requires p1 > 0");
  detail::check_jump_coherent(jp);
  return JumpMoments{jp.lambda_d * p1, (1.0 - jp.lambda_d) * p1, p1};
}

}  // namespace slicevol
