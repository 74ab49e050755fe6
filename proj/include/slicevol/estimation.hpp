#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicevol/error.hpp"
#include "slicevol/gamma.hpp"
#include "slicevol/interpolant.hpp"
#include "slicevol/jump.hpp"
#include "slicevol/moments.hpp"
#include "slicevol/nelder_mead.hpp"
#include "slicevol/parallel.hpp"
#include "slicevol/rng.hpp"
#include "slicevol/sde.hpp"
#include "slicevol/slice_data.hpp"

namespace slicevol {

// The full eight-parameter model: SDE pair, five jump parameters, and the
// bridge length delta that warms the SDE up ahead of slice two.
struct ModelParams {
  SdeParams sde;
  JumpParams jump;
  double delta = 0.5;  // slice units
};

struct FitConfig {
  double xatol = 1e-4;             // simplex diameter tolerance, log units
  double fatol = 1e-6;
  int max_iters = 500;
  int moment_steps = 64;           // RK4 sub-steps per unit slice interval
  double delta_max = 5.0;
  double log_beta_min = std::log(1e-8);
  double log_beta_max = std::log(1e8);
  int threads = 1;
  std::optional<SdeParams> sde_init;   // override the method-of-moments start
  std::optional<double> delta_init;
};

struct StageDiagnostics {
  int iterations = 0;
  bool converged = true;
  bool ran = false;
};

struct FitReport {
  ModelParams params;
  bool beta_u0_present = false;
  bool beta_u1_present = false;
  bool beta_n_present = false;

  double loglik_jump = 0.0;
  double loglik_sde = 0.0;
  double loglik_delta = 0.0;

  std::size_t count_no_jump = 0;
  std::size_t count_jump_up = 0;
  std::size_t count_jump_down = 0;
  std::size_t edge_total = 0;  // 2M

  StageDiagnostics beta_u0_stage, beta_u1_stage, beta_n_stage, sde_stage, delta_stage;
  long degenerate_variance_events = 0;

  double total_loglik() const { return loglik_jump + loglik_sde + loglik_delta; }
  bool all_converged() const {
    auto ok = [](const StageDiagnostics& s) { return !s.ran || s.converged; };
    return ok(beta_u0_stage) && ok(beta_u1_stage) && ok(beta_n_stage) && ok(sde_stage) &&
           ok(delta_stage);
  }
};

// ---------------------------------------------------------------------------
// Edge classification and the closed-form lambda estimates
// ---------------------------------------------------------------------------

struct EdgeObservation {
  double g0 = 0.0;  // outermost ground-truth slice
  double g1 = 0.0;  // inner neighbour
  double p1 = 0.0;  // prediction at the inner neighbour
};

struct EdgeClassification {
  std::vector<EdgeObservation> edges;  // both ends of every series, reindexed
  std::vector<JumpCase> cases;
  std::size_t n_no_jump = 0;
  std::size_t n_jump_up = 0;
  std::size_t n_jump_down = 0;

  std::size_t total() const { return edges.size(); }
};

inline JumpCase classify_edge(const EdgeObservation& e) {
  if (e.g0 > 0.0 && e.g1 == 0.0)
    throw Error(Errc::inadmissible_edge,
                "edge with g0 > 0 and g1 = 0: the volume cannot be interrupted");
  if (e.g0 == 0.0 && e.g1 == 0.0) return JumpCase::jump_down;
  if (e.g0 > 0.0) return JumpCase::jump_up;
  return JumpCase::no_jump;
}

inline EdgeClassification classify_edges(const std::vector<SliceSeries>& dataset) {
  EdgeClassification out;
  out.edges.reserve(dataset.size() * 2);
  out.cases.reserve(dataset.size() * 2);
  for (const auto& s : dataset) {
    if (!s.g)
      throw Error(Errc::schema_error, "series '" + s.id + "' has no ground truth");
    const auto& g = *s.g;
    const int n = s.last_index();
    const EdgeObservation start{g[0], g[1], s.p[1]};
    const EdgeObservation end{g[n], g[n - 1], s.p[n - 1]};
    for (const auto& e : {start, end}) {
      const JumpCase c = classify_edge(e);
      out.edges.push_back(e);
      out.cases.push_back(c);
      switch (c) {
        case JumpCase::no_jump: ++out.n_no_jump; break;
        case JumpCase::jump_up: ++out.n_jump_up; break;
        case JumpCase::jump_down: ++out.n_jump_down; break;
      }
    }
  }
  return out;
}

// Closed-form maximum likelihood: the categorical probabilities equal the
// observed case frequencies.
inline std::pair<double, double> fit_lambdas(std::size_t n_jump_up, std::size_t n_jump_down,
                                             std::size_t edge_total) {
  if (edge_total == 0) throw Error(Errc::domain_error, "fit_lambdas: no edges");
  return {static_cast<double>(n_jump_up) / static_cast<double>(edge_total),
          static_cast<double>(n_jump_down) / static_cast<double>(edge_total)};
}

inline double lambda_log_objective(double lambda_u, double lambda_d, std::size_t n_jump_up,
                                   std::size_t n_jump_down, std::size_t edge_total) {
  const double lambda_n = 1.0 - lambda_u - lambda_d;
  const std::size_t n_no = edge_total - n_jump_up - n_jump_down;
  auto term = [](std::size_t n, double l) {
    if (n == 0) return 0.0;
    return l > 0.0 ? static_cast<double>(n) * std::log(l)
                   : -std::numeric_limits<double>::infinity();
  };
  return term(n_jump_down, lambda_d) + term(n_jump_up, lambda_u) + term(n_no, lambda_n);
}

// ---------------------------------------------------------------------------
// Per-case gamma rate fits (mean tied to the prediction)
// ---------------------------------------------------------------------------

struct RateFitResult {
  double beta = 0.0;
  double loglik = 0.0;
  StageDiagnostics diag;
};

// Maximizes sum_i log f_gamma(obs_i; shape = mean_i * beta, rate = beta)
// over log beta with Nelder-Mead. A single observation sitting exactly on
// its mean pushes beta to the upper bound; that is reported as
// non-convergence rather than hidden.
inline RateFitResult fit_tied_gamma_rate(std::span<const double> obs,
                                         std::span<const double> means, const FitConfig& cfg) {
  if (obs.empty()) throw Error(Errc::empty_case, "no observations for this jump case");
  if (obs.size() != means.size())
    throw Error(Errc::domain_error, "observation/mean size mismatch");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(obs[i] > 0.0)) throw Error(Errc::domain_error, "tied-gamma observations must be > 0");
    if (!(means[i] > 0.0)) throw Error(Errc::domain_error, "tied means must be > 0");
  }

  auto neg_loglik = [&](double beta) {
    double nll = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i)
      nll -= gamma_log_pdf(obs[i], gamma_for_mean(means[i], beta));
    return std::isnan(nll) ? std::numeric_limits<double>::infinity() : nll;
  };

  auto objective = [&](const std::vector<double>& x) {
    double lb = x[0];
    double penalty = 0.0;
    if (lb < cfg.log_beta_min) {
      penalty = 1e6 * (cfg.log_beta_min - lb) * (cfg.log_beta_min - lb);
      lb = cfg.log_beta_min;
    } else if (lb > cfg.log_beta_max) {
      penalty = 1e6 * (lb - cfg.log_beta_max) * (lb - cfg.log_beta_max);
      lb = cfg.log_beta_max;
    }
    return neg_loglik(std::exp(lb)) + penalty;
  };

  // Method-of-moments start: Var_i = mean_i / beta pooled over the case.
  double sq = 0.0, mean_sum = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    sq += (obs[i] - means[i]) * (obs[i] - means[i]);
    mean_sum += means[i];
  }
  double log_beta0 = sq > 0.0 ? std::log(mean_sum / sq) : cfg.log_beta_max;
  log_beta0 = std::clamp(log_beta0, cfg.log_beta_min, cfg.log_beta_max);

  NelderMeadOptions nm{cfg.xatol, cfg.fatol, cfg.max_iters, 0.5};
  const NelderMeadResult res = nelder_mead(objective, {log_beta0}, nm);

  RateFitResult out;
  const double log_beta = std::clamp(res.x[0], cfg.log_beta_min, cfg.log_beta_max);
  out.beta = std::exp(log_beta);
  out.loglik = -neg_loglik(out.beta);
  out.diag.ran = true;
  out.diag.iterations = res.iterations;
  const bool at_bound = log_beta > cfg.log_beta_max - 1e-3 || log_beta < cfg.log_beta_min + 1e-3;
  out.diag.converged = res.converged && !at_bound;
  return out;
}

// ---------------------------------------------------------------------------
// Approximate SDE likelihood via moment-matched gamma transitions
// ---------------------------------------------------------------------------

struct SdeNllResult {
  double value = 0.0;
  long degenerate_variance = 0;
  std::size_t transitions = 0;
};

namespace detail {

inline double heart_sde_nll(const SliceSeries& s, const LinearInterpolant& curve,
                            const SdeParams& sp, int moment_steps, MomentDiagnostics* diag,
                            std::size_t* transitions) {
  const auto& g = *s.g;
  const int n = s.last_index();
  double nll = 0.0;
  for (int j = 3; j <= n - 2; ++j) {
    const double v_prev = g[j - 1] - s.p[j - 1];
    MomentState m;
    try {
      m = propagate_moments(v_prev, j - 1.0, j, curve, sp, moment_steps);
      const GammaSurrogate surr = match_gamma_floored(m, s.p[j], diag);
      nll -= gamma_log_pdf(g[j], surr.spec());
    } catch (const Error& e) {
      if (e.code() == Errc::nonpositive_mean) return std::numeric_limits<double>::infinity();
      throw;
    }
    if (transitions != nullptr) ++*transitions;
  }
  return std::isnan(nll) ? std::numeric_limits<double>::infinity() : nll;
}

}  // namespace detail

// Negative log of the approximate SDE likelihood: per heart, transitions
// j = 3..N-2 conditioned on the previous ground-truth slice. Hearts are
// evaluated in parallel and reduced with a pairwise tree sum, so the result
// does not depend on the thread count.
inline SdeNllResult sde_neg_loglik(const SdeParams& sp, const std::vector<SliceSeries>& dataset,
                                   const FitConfig& cfg) {
  std::vector<double> per_heart(dataset.size(), 0.0);
  std::vector<MomentDiagnostics> diags(dataset.size());
  std::vector<std::size_t> trans(dataset.size(), 0);
  parallel_for(dataset.size(), cfg.threads, [&](std::size_t i) {
    const auto& s = dataset[i];
    if (!s.g) throw Error(Errc::schema_error, "series '" + s.id + "' has no ground truth");
    const LinearInterpolant curve = interpolate(s);
    per_heart[i] = detail::heart_sde_nll(s, curve, sp, cfg.moment_steps, &diags[i], &trans[i]);
  });
  SdeNllResult out;
  out.value = tree_sum(per_heart);
  for (const auto& d : diags) out.degenerate_variance += d.degenerate_variance;
  for (std::size_t t : trans) out.transitions += t;
  return out;
}

struct SdeFitResult {
  SdeParams params;
  double neg_loglik = 0.0;
  long degenerate_variance = 0;
  StageDiagnostics diag;
};

inline SdeParams sde_moment_start(const std::vector<SliceSeries>& dataset) {
  // Stationary-variance heuristic: Var[X - p] ~ alpha * p on the interior.
  double sq = 0.0, p_sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : dataset) {
    if (!s.g) continue;
    const int n = s.last_index();
    for (int j = 2; j <= n - 2; ++j) {
      const double v = (*s.g)[j] - s.p[j];
      sq += v * v;
      p_sum += s.p[j];
      ++count;
    }
  }
  SdeParams init{1.0, 1.0};
  if (count > 0 && p_sum > 0.0) init.alpha = std::max(sq / p_sum, 1e-6);
  return init;
}

inline SdeFitResult fit_sde(const std::vector<SliceSeries>& dataset, const FitConfig& cfg) {
  bool any_transitions = false;
  for (const auto& s : dataset)
    if (s.last_index() >= 5) any_transitions = true;
  if (dataset.empty() || !any_transitions)
    throw Error(Errc::domain_error, "fit_sde: dataset has no interior transitions");

  auto objective = [&](const std::vector<double>& x) {
    double lt = std::clamp(x[0], -30.0, 30.0);
    double la = std::clamp(x[1], -30.0, 30.0);
    const double penalty = 1e4 * ((x[0] - lt) * (x[0] - lt) + (x[1] - la) * (x[1] - la));
    const double v = sde_neg_loglik(SdeParams{std::exp(lt), std::exp(la)}, dataset, cfg).value;
    return (std::isnan(v) ? std::numeric_limits<double>::infinity() : v) + penalty;
  };

  const SdeParams init = cfg.sde_init.value_or(sde_moment_start(dataset));
  const NelderMeadOptions nm{cfg.xatol, cfg.fatol, cfg.max_iters, 0.25};
  const NelderMeadResult res =
      nelder_mead(objective, {std::log(init.theta0), std::log(init.alpha)}, nm);

  SdeFitResult out;
  out.params = SdeParams{std::exp(res.x[0]), std::exp(res.x[1])};
  const SdeNllResult nll = sde_neg_loglik(out.params, dataset, cfg);
  out.neg_loglik = nll.value;
  out.degenerate_variance = nll.degenerate_variance;
  out.diag.ran = true;
  out.diag.iterations = res.iterations;
  out.diag.converged = res.converged;
  return out;
}

// ---------------------------------------------------------------------------
// Delta calibration
// ---------------------------------------------------------------------------

struct DeltaFitResult {
  double delta = 0.0;
  double neg_loglik = 0.0;
  long degenerate_variance = 0;
  StageDiagnostics diag;
};

inline double delta_neg_loglik(double delta, const std::vector<SliceSeries>& dataset,
                               const SdeParams& sp, const FitConfig& cfg,
                               MomentDiagnostics* diag = nullptr) {
  if (!(delta > 0.0)) throw Error(Errc::domain_error, "delta must be positive");
  double nll = 0.0;
  for (const auto& s : dataset) {
    if (!s.g) throw Error(Errc::schema_error, "series '" + s.id + "' has no ground truth");
    const double p2 = s.p[2];
    const ConstantCurve bridge(p2);
    const int steps = std::max(8, static_cast<int>(std::ceil(cfg.moment_steps * delta)));
    try {
      const MomentState m = propagate_moments(0.0, 2.0 - delta, 2.0, bridge, sp, steps);
      const GammaSurrogate surr = match_gamma_floored(m, p2, diag);
      nll -= gamma_log_pdf((*s.g)[2], surr.spec());
    } catch (const Error& e) {
      if (e.code() == Errc::nonpositive_mean) return std::numeric_limits<double>::infinity();
      throw;
    }
  }
  return std::isnan(nll) ? std::numeric_limits<double>::infinity() : nll;
}

inline DeltaFitResult fit_delta(const std::vector<SliceSeries>& dataset, const SdeParams& sp,
                                const FitConfig& cfg) {
  if (dataset.empty()) throw Error(Errc::domain_error, "fit_delta: empty dataset");
  const double log_delta_max = std::log(cfg.delta_max);

  auto objective = [&](const std::vector<double>& x) {
    double ld = x[0];
    double penalty = 0.0;
    if (ld > log_delta_max) {
      penalty = 1e4 * (ld - log_delta_max) * (ld - log_delta_max);
      ld = log_delta_max;
    }
    const double v = delta_neg_loglik(std::exp(ld), dataset, sp, cfg);
    return (std::isnan(v) ? std::numeric_limits<double>::infinity() : v) + penalty;
  };

  const double init = std::min(cfg.delta_init.value_or(0.5), cfg.delta_max);
  const NelderMeadOptions nm{cfg.xatol, cfg.fatol, cfg.max_iters, 0.5};
  const NelderMeadResult res = nelder_mead(objective, {std::log(init)}, nm);

  DeltaFitResult out;
  out.delta = std::min(std::exp(res.x[0]), cfg.delta_max);
  MomentDiagnostics diag;
  out.neg_loglik = delta_neg_loglik(out.delta, dataset, sp, cfg, &diag);
  out.degenerate_variance = diag.degenerate_variance;
  out.diag.ran = true;
  out.diag.iterations = res.iterations;
  out.diag.converged = res.converged;
  return out;
}

// ---------------------------------------------------------------------------
// The full staged fit
// ---------------------------------------------------------------------------

inline FitReport fit_all(const std::vector<SliceSeries>& dataset, const FitConfig& cfg = {}) {
  if (dataset.empty()) throw Error(Errc::schema_error, "fit_all: empty dataset");

  FitReport report;
  const EdgeClassification edges = classify_edges(dataset);
  report.count_no_jump = edges.n_no_jump;
  report.count_jump_up = edges.n_jump_up;
  report.count_jump_down = edges.n_jump_down;
  report.edge_total = edges.total();

  const auto [lambda_u, lambda_d] = fit_lambdas(edges.n_jump_up, edges.n_jump_down, edges.total());
  report.params.jump.lambda_u = lambda_u;
  report.params.jump.lambda_d = lambda_d;
  report.loglik_jump =
      lambda_log_objective(lambda_u, lambda_d, edges.n_jump_up, edges.n_jump_down, edges.total());

  // Separable per-case rate fits; an empty case leaves its beta absent and
  // the corresponding simulation branch disabled.
  std::vector<double> up_outer, up_inner, up_outer_mean, up_inner_mean, no_jump_obs, no_jump_mean;
  for (std::size_t i = 0; i < edges.total(); ++i) {
    const auto& e = edges.edges[i];
    if (edges.cases[i] == JumpCase::jump_up) {
      up_outer.push_back(e.g0);
      up_outer_mean.push_back(lambda_d / lambda_u * e.p1);
      up_inner.push_back(e.g1);
      up_inner_mean.push_back(e.p1);
    } else if (edges.cases[i] == JumpCase::no_jump) {
      no_jump_obs.push_back(e.g1);
      no_jump_mean.push_back(e.p1);
    }
  }

  report.params.jump.beta_u0 = std::numeric_limits<double>::quiet_NaN();
  report.params.jump.beta_u1 = std::numeric_limits<double>::quiet_NaN();
  report.params.jump.beta_n = std::numeric_limits<double>::quiet_NaN();
  if (!up_outer.empty() && lambda_d > 0.0) {
    const RateFitResult r = fit_tied_gamma_rate(up_outer, up_outer_mean, cfg);
    report.params.jump.beta_u0 = r.beta;
    report.beta_u0_present = true;
    report.beta_u0_stage = r.diag;
    report.loglik_jump += r.loglik;
  }
  if (!up_inner.empty()) {
    const RateFitResult r = fit_tied_gamma_rate(up_inner, up_inner_mean, cfg);
    report.params.jump.beta_u1 = r.beta;
    report.beta_u1_present = true;
    report.beta_u1_stage = r.diag;
    report.loglik_jump += r.loglik;
  }
  if (!no_jump_obs.empty()) {
    const RateFitResult r = fit_tied_gamma_rate(no_jump_obs, no_jump_mean, cfg);
    report.params.jump.beta_n = r.beta;
    report.beta_n_present = true;
    report.beta_n_stage = r.diag;
    report.loglik_jump += r.loglik;
  }

  const SdeFitResult sde = fit_sde(dataset, cfg);
  report.params.sde = sde.params;
  report.loglik_sde = -sde.neg_loglik;
  report.sde_stage = sde.diag;
  report.degenerate_variance_events += sde.degenerate_variance;

  const DeltaFitResult delta = fit_delta(dataset, sde.params, cfg);
  report.params.delta = delta.delta;
  report.loglik_delta = -delta.neg_loglik;
  report.delta_stage = delta.diag;
  report.degenerate_variance_events += delta.degenerate_variance;

  return report;
}

// ---------------------------------------------------------------------------
// Bernoulli-voxel baseline (for comparison only)
// ---------------------------------------------------------------------------

// Treating voxel outputs as independent Bernoulli probabilities gives
// mean = nu * sum(o) and variance = nu^2 * sum(o (1 - o)).
inline std::pair<double, double> naive_baseline_std(std::span<const double> voxel_probs,
                                                    double voxel_volume) {
  if (!(voxel_volume > 0.0))
    throw Error(Errc::domain_error, "voxel volume must be positive");
  double sum = 0.0, var = 0.0;
  for (double o : voxel_probs) {
    if (!(o >= 0.0 && o <= 1.0))
      throw Error(Errc::domain_error, "voxel probabilities must lie in [0, 1]");
    sum += o;
    var += o * (1.0 - o);
  }
  return {voxel_volume * sum, voxel_volume * std::sqrt(var)};
}

// ---------------------------------------------------------------------------
// Volume-binned fitting and the NLL grid / stability harnesses
// ---------------------------------------------------------------------------

struct VolumeBinFit {
  double vol_lo_ml = 0.0;
  double vol_hi_ml = 0.0;
  std::size_t n_hearts = 0;
  FitReport report;
};

// Equal-count bins by predicted volume; all eight parameters are refit per
// bin so size-dependent regimes can be inspected (and used at inference,
// where only the prediction is available).
inline std::vector<VolumeBinFit> fit_binned(const std::vector<SliceSeries>& dataset, int bins,
                                            const FitConfig& cfg = {}) {
  if (bins <= 0) throw Error(Errc::domain_error, "bins must be positive");
  if (dataset.size() < static_cast<std::size_t>(bins))
    throw Error(Errc::domain_error, "fewer hearts than bins");

  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return point_prediction_ml(dataset[a]) < point_prediction_ml(dataset[b]);
  });

  std::vector<VolumeBinFit> out;
  out.reserve(bins);
  for (int b = 0; b < bins; ++b) {
    const std::size_t lo = dataset.size() * b / bins;
    const std::size_t hi = dataset.size() * (b + 1) / bins;
    std::vector<SliceSeries> subset;
    subset.reserve(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) subset.push_back(dataset[idx[k]]);
    VolumeBinFit fit;
    fit.n_hearts = subset.size();
    fit.vol_lo_ml = point_prediction_ml(subset.front());
    fit.vol_hi_ml = point_prediction_ml(subset.back());
    fit.report = fit_all(subset, cfg);
    out.push_back(std::move(fit));
  }
  return out;
}

struct NllGridPoint {
  double theta0 = 0.0;
  double alpha = 0.0;
  double nll = 0.0;
};

inline std::vector<NllGridPoint> sde_nll_grid(const std::vector<SliceSeries>& dataset,
                                              double theta0_lo, double theta0_hi, double alpha_lo,
                                              double alpha_hi, int resolution,
                                              const FitConfig& cfg = {}) {
  if (resolution < 2) throw Error(Errc::domain_error, "grid resolution must be >= 2");
  std::vector<NllGridPoint> grid;
  grid.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    const double lt = std::log(theta0_lo) +
                      (std::log(theta0_hi) - std::log(theta0_lo)) * i / (resolution - 1);
    for (int j = 0; j < resolution; ++j) {
      const double la =
          std::log(alpha_lo) + (std::log(alpha_hi) - std::log(alpha_lo)) * j / (resolution - 1);
      const SdeParams sp{std::exp(lt), std::exp(la)};
      grid.push_back({sp.theta0, sp.alpha, sde_neg_loglik(sp, dataset, cfg).value});
    }
  }
  return grid;
}

struct StabilityEntry {
  int repeat = 0;
  int part = 0;
  bool reversed_order = false;
  SdeParams params;
  double nll_on_full = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct StabilityResult {
  SdeParams full_params;
  double full_nll = 0.0;
  int splits = 0;
  int repeats = 0;
  std::vector<StabilityEntry> entries;
};

// Repeated disjoint splits (forward and slice-reversed), SDE parameters
// refit per subset, each evaluated against the full standard-order NLL.
inline StabilityResult stability_analysis(const std::vector<SliceSeries>& dataset, int splits,
                                          int repeats, std::uint64_t seed,
                                          const FitConfig& cfg = {}) {
  if (splits < 2 || repeats < 1)
    throw Error(Errc::domain_error, "need splits >= 2 and repeats >= 1");
  if (dataset.size() < static_cast<std::size_t>(splits))
    throw Error(Errc::domain_error, "fewer hearts than splits");

  StabilityResult out;
  out.splits = splits;
  out.repeats = repeats;
  const SdeFitResult full = fit_sde(dataset, cfg);
  out.full_params = full.params;
  out.full_nll = full.neg_loglik;

  for (int rep = 0; rep < repeats; ++rep) {
    for (const bool rev : {false, true}) {
      RngStream rng(seed, fnv1a64("stability-split"), static_cast<std::uint32_t>(rep * 2 + rev));
      std::vector<std::size_t> perm(dataset.size());
      std::iota(perm.begin(), perm.end(), 0u);
      for (std::size_t i = perm.size() - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_below(i + 1)]);

      for (int part = 0; part < splits; ++part) {
        const std::size_t lo = dataset.size() * part / splits;
        const std::size_t hi = dataset.size() * (part + 1) / splits;
        std::vector<SliceSeries> subset;
        subset.reserve(hi - lo);
        for (std::size_t k = lo; k < hi; ++k) {
          const auto& s = dataset[perm[k]];
          subset.push_back(rev ? reversed(s) : s);
        }
        const SdeFitResult fit = fit_sde(subset, cfg);
        StabilityEntry e;
        e.repeat = rep;
        e.part = part;
        e.reversed_order = rev;
        e.params = fit.params;
        e.nll_on_full = sde_neg_loglik(fit.params, dataset, cfg).value;
        e.iterations = fit.diag.iterations;
        e.converged = fit.diag.converged;
        out.entries.push_back(e);
      }
    }
  }
  return out;
}

}  // namespace slicevol
