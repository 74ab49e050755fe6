#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "slicevol/error.hpp"
#include "slicevol/estimation.hpp"
#include "slicevol/interpolant.hpp"
#include "slicevol/jump.hpp"
#include "slicevol/parallel.hpp"
#include "slicevol/rng.hpp"
#include "slicevol/sde.hpp"
#include "slicevol/slice_data.hpp"

namespace slicevol {

// One simulated area profile over heart depth: linear edge segments from
// the jump draws, an SDE path on the interior, stitched continuously at
// t = 2 through the delta bridge.
struct Trajectory {
  std::string series_id;
  std::vector<double> edge_points;  // x_{-1}=0, x_0, ..., x_N, x_{N+1}=0
  PathGrid interior;                // on [2, N-2]
  double volume_ml = 0.0;
  double slice_spacing = 1.0;
};

struct VolumeDistribution {
  std::string series_id;
  std::vector<double> draws;  // ml
  double mean = 0.0;
  double stddev = 0.0;
  double q01 = 0.0, q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0, q99 = 0.0;
  int n_sims = 0;
  std::uint64_t seed = 0;
};

inline void validate_for_simulation(const ModelParams& mp) {
  validate(mp.sde);
  validate(mp.jump);
  if (!(mp.delta > 0.0) || !std::isfinite(mp.delta))
    throw Error(Errc::degenerate_params, "delta must be positive");
  auto usable = [](double b) { return std::isfinite(b) && b > 0.0; };
  if (mp.jump.lambda_u > 0.0) {
    if (!usable(mp.jump.beta_u0) || !usable(mp.jump.beta_u1))
      throw Error(Errc::degenerate_params,
                  "jump-up branch enabled but beta_u0/beta_u1 are unavailable");
    if (mp.jump.lambda_d == 0.0)
      throw Error(Errc::degenerate_params,
                  "lambda_d = 0 with lambda_u > 0 forces a zero-mean jump-up outer component");
  }
  if (mp.jump.lambda_u + mp.jump.lambda_d < 1.0 && !usable(mp.jump.beta_n))
    throw Error(Errc::degenerate_params, "no-jump branch enabled but beta_n is unavailable");
}

// Trapezoid over the piecewise-linear edges plus the interior grid;
// unit node spacing, scaled to ml by the slice spacing.
inline double integrate_trajectory(const Trajectory& traj) {
  const std::size_t n_nodes = traj.edge_points.size();  // N + 3
  if (n_nodes < 7) throw Error(Errc::domain_error, "trajectory too short to integrate");
  const auto& x = traj.edge_points;

  double area = 0.0;
  // Leading edge segments (-1..2) and trailing (N-2..N+1).
  for (int i = 0; i < 3; ++i) area += 0.5 * (x[i] + x[i + 1]);
  for (std::size_t i = n_nodes - 4; i + 1 < n_nodes; ++i) area += 0.5 * (x[i] + x[i + 1]);

  const auto& grid = traj.interior.values;
  if (grid.size() >= 2) {
    double inner = 0.5 * (grid.front() + grid.back());
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) inner += grid[i];
    area += inner * traj.interior.dt;
  }
  return area * traj.slice_spacing / 1000.0;
}

// One draw of Algorithm-style simulation: jump edges at both ends, the
// delta bridge into slice two, the interior SDE, then the depth integral.
inline Trajectory simulate_trajectory(const SliceSeries& series, const LinearInterpolant& curve,
                                      const ModelParams& mp, double dt, RngStream& rng) {
  const int n = series.last_index();
  const JumpSample near = sample_jump(series.p[1], mp.jump, rng);
  const JumpSample far = sample_jump(series.p[n - 1], mp.jump, rng);

  const double p2 = series.p[2];
  const ConstantCurve bridge_curve(p2);
  const PathGrid bridge = simulate_path(bridge_curve, 2.0 - mp.delta, 2.0, p2, mp.sde, dt, rng);
  const double x2 = bridge.values.back();
  if (!(x2 > 0.0))
    throw Error(Errc::domain_error, "bridge simulation left the positive domain");

  PathGrid interior;
  if (n - 2 > 2) {
    interior = simulate_path(curve, 2.0, static_cast<double>(n - 2), x2, mp.sde, dt, rng);
  } else {
    interior = PathGrid{2.0, 2.0, dt, {x2}};
  }

  Trajectory traj;
  traj.series_id = series.id;
  traj.slice_spacing = series.slice_spacing;
  traj.interior = std::move(interior);
  traj.edge_points.assign(static_cast<std::size_t>(n) + 3, 0.0);
  traj.edge_points[1] = near.x0;                       // t = 0
  traj.edge_points[2] = near.x1;                       // t = 1
  traj.edge_points[static_cast<std::size_t>(n) + 1] = far.x0;  // t = N
  traj.edge_points[static_cast<std::size_t>(n)] = far.x1;      // t = N-1
  // Interior nodes (including x_2 and x_{N-2}) read off the grid.
  const auto& grid = traj.interior.values;
  for (int j = 2; j <= n - 2; ++j) {
    const std::size_t k =
        grid.size() == 1 ? 0 : static_cast<std::size_t>(std::llround((j - 2.0) / traj.interior.dt));
    traj.edge_points[static_cast<std::size_t>(j) + 1] = grid[std::min(k, grid.size() - 1)];
  }

  traj.volume_ml = integrate_trajectory(traj);
  return traj;
}

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
}

inline void finalize_distribution(VolumeDistribution& dist) {
  const std::size_t n = dist.draws.size();
  dist.mean = tree_sum(dist.draws) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = dist.draws[i] - dist.mean;
    sq[i] = d * d;
  }
  dist.stddev = n > 1 ? std::sqrt(tree_sum(sq) / static_cast<double>(n - 1)) : 0.0;
  std::vector<double> sorted = dist.draws;
  std::sort(sorted.begin(), sorted.end());
  dist.q01 = quantile_sorted(sorted, 0.01);
  dist.q05 = quantile_sorted(sorted, 0.05);
  dist.q25 = quantile_sorted(sorted, 0.25);
  dist.q50 = quantile_sorted(sorted, 0.50);
  dist.q75 = quantile_sorted(sorted, 0.75);
  dist.q95 = quantile_sorted(sorted, 0.95);
  dist.q99 = quantile_sorted(sorted, 0.99);
}

}  // namespace detail

// Per-draw edge diagnostics alongside the volume ensemble: the ratio
// (x0 + x1) / p1 at each end, which carries the jump multimodality.
struct HeartSimulation {
  VolumeDistribution dist;
  std::vector<double> edge_ratio_near;
  std::vector<double> edge_ratio_far;
};

// Monte Carlo ensemble for one heart. Each draw owns the stream
// (seed, heart id, draw index); draws fill a preallocated slot, so the
// result is bitwise identical for any thread count.
inline HeartSimulation simulate_heart_detailed(const SliceSeries& series, const ModelParams& mp,
                                               int n_sims, double dt, std::uint64_t seed,
                                               int threads = 1) {
  if (n_sims <= 0) throw Error(Errc::domain_error, "n_sims must be positive");
  if (!(dt > 0.0)) throw Error(Errc::domain_error, "dt must be positive");
  validate(series);
  validate_for_simulation(mp);

  HeartSimulation sim;
  sim.dist.series_id = series.id;
  sim.dist.n_sims = n_sims;
  sim.dist.seed = seed;
  sim.dist.draws.assign(static_cast<std::size_t>(n_sims), 0.0);
  sim.edge_ratio_near.assign(static_cast<std::size_t>(n_sims), 0.0);
  sim.edge_ratio_far.assign(static_cast<std::size_t>(n_sims), 0.0);

  const LinearInterpolant curve = interpolate(series);
  const std::uint64_t stream = fnv1a64(series.id);
  const int n = series.last_index();
  parallel_for(static_cast<std::size_t>(n_sims), threads, [&](std::size_t k) {
    RngStream rng(seed, stream, static_cast<std::uint32_t>(k));
    const Trajectory traj = simulate_trajectory(series, curve, mp, dt, rng);
    sim.dist.draws[k] = traj.volume_ml;
    sim.edge_ratio_near[k] = (traj.edge_points[1] + traj.edge_points[2]) / series.p[1];
    sim.edge_ratio_far[k] =
        (traj.edge_points[static_cast<std::size_t>(n) + 1] +
         traj.edge_points[static_cast<std::size_t>(n)]) /
        series.p[n - 1];
  });

  detail::finalize_distribution(sim.dist);
  return sim;
}

inline VolumeDistribution simulate_heart(const SliceSeries& series, const ModelParams& mp,
                                         int n_sims, double dt, std::uint64_t seed,
                                         int threads = 1) {
  return simulate_heart_detailed(series, mp, n_sims, dt, seed, threads).dist;
}

// ---------------------------------------------------------------------------
// Evaluation against ground truth
// ---------------------------------------------------------------------------

struct HeartEvaluation {
  std::string id;
  double true_ml = 0.0;
  double pred_ml = 0.0;
  double mean_ml = 0.0;
  double std_ml = 0.0;
  double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
  bool cov50 = false;
  bool cov90 = false;
  double normalized_error = 0.0;  // (true - pred) / pred
};

struct CoverageRow {
  double nominal = 0.0;
  double empirical = 0.0;
};

struct EvaluationTable {
  std::vector<HeartEvaluation> hearts;
  std::vector<CoverageRow> calibration;  // central 50% and 90% intervals
  // Pooled histogram source data for external plotting.
  std::vector<double> sim_normalized_errors;
  std::vector<double> true_normalized_errors;
  std::vector<double> sim_edge_ratios;
  std::vector<double> true_edge_ratios;
};

inline EvaluationTable evaluate(const std::vector<SliceSeries>& dataset, const ModelParams& mp,
                                int n_sims, double dt, std::uint64_t seed, int threads = 1) {
  EvaluationTable table;
  table.hearts.reserve(dataset.size());
  std::size_t cov50 = 0, cov90 = 0;

  for (const auto& series : dataset) {
    if (!series.g)
      throw Error(Errc::schema_error, "series '" + series.id + "' has no ground truth");
    const HeartSimulation sim = simulate_heart_detailed(series, mp, n_sims, dt, seed, threads);

    HeartEvaluation h;
    h.id = series.id;
    h.true_ml = truth_volume_ml(series);
    h.pred_ml = point_prediction_ml(series);
    h.mean_ml = sim.dist.mean;
    h.std_ml = sim.dist.stddev;
    h.q05 = sim.dist.q05;
    h.q25 = sim.dist.q25;
    h.q50 = sim.dist.q50;
    h.q75 = sim.dist.q75;
    h.q95 = sim.dist.q95;
    h.cov50 = sim.dist.q25 <= h.true_ml && h.true_ml <= sim.dist.q75;
    h.cov90 = sim.dist.q05 <= h.true_ml && h.true_ml <= sim.dist.q95;
    h.normalized_error = (h.true_ml - h.pred_ml) / h.pred_ml;
    cov50 += h.cov50 ? 1 : 0;
    cov90 += h.cov90 ? 1 : 0;

    for (double v : sim.dist.draws)
      table.sim_normalized_errors.push_back((v - h.pred_ml) / h.pred_ml);
    table.true_normalized_errors.push_back(h.normalized_error);
    table.sim_edge_ratios.insert(table.sim_edge_ratios.end(), sim.edge_ratio_near.begin(),
                                 sim.edge_ratio_near.end());
    table.sim_edge_ratios.insert(table.sim_edge_ratios.end(), sim.edge_ratio_far.begin(),
                                 sim.edge_ratio_far.end());
    const auto& g = *series.g;
    const int n = series.last_index();
    table.true_edge_ratios.push_back((g[0] + g[1]) / series.p[1]);
    table.true_edge_ratios.push_back((g[n] + g[n - 1]) / series.p[n - 1]);

    table.hearts.push_back(std::move(h));
  }

  const double m = static_cast<double>(dataset.size());
  table.calibration = {{0.50, m > 0 ? cov50 / m : 0.0}, {0.90, m > 0 ? cov90 / m : 0.0}};
  return table;
}

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

inline std::vector<HistogramBin> histogram(std::span<const double> data, int bins) {
  if (bins <= 0) throw Error(Errc::domain_error, "histogram needs bins > 0");
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  if (data.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) hi = lo + 1.0;
  const double w = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    out[b].left = lo + b * w;
    out[b].right = lo + (b + 1) * w;
  }
  for (double x : data) {
    int b = static_cast<int>((x - lo) / w);
    b = std::clamp(b, 0, bins - 1);
    ++out[static_cast<std::size_t>(b)].count;
  }
  return out;
}

}  // namespace slicevol
