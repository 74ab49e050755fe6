#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "slicevol/interpolant.hpp"
#include "slicevol/rng.hpp"
#include "slicevol/sde.hpp"

using namespace slicevol;

namespace {

// Fixed value/slope pair for pointwise formula checks.
struct FlatCurve {
  double value = 1.0;
  double slope_value = 0.0;
  double operator()(double) const { return value; }
  double slope(double) const { return slope_value; }
  double slope_before(double) const { return slope_value; }
};

}  // namespace

TEST_CASE("reversion rate takes the positivity-enforcing branch when needed") {
  REQUIRE(reversion_rate(0.0, FlatCurve{2.0, 0.0}, SdeParams{1.0, 1.0}) == Catch::Approx(1.0));
  REQUIRE(reversion_rate(0.0, FlatCurve{2.0, 0.0}, SdeParams{1.0, 4.0}) == Catch::Approx(2.0));
  // Near-zero predictions inflate the pull sharply.
  REQUIRE(reversion_rate(0.0, FlatCurve{0.1, -1.0}, SdeParams{1.0, 1.0}) == Catch::Approx(20.0));
  REQUIRE_THROWS_AS(reversion_rate(0.0, FlatCurve{0.0, 0.0}, SdeParams{1.0, 1.0}), Error);
}

TEST_CASE("drift is the slope on the prediction and mean-reverting off it") {
  const FlatCurve p{2.0, 0.0};
  const SdeParams sp{1.0, 1.0};
  REQUIRE(drift(2.0, 0.0, p, sp) == Catch::Approx(0.0));
  REQUIRE(drift(3.0, 0.0, p, sp) == Catch::Approx(-1.0));
  REQUIRE(drift(1.0, 0.0, p, sp) == Catch::Approx(1.0));
  const FlatCurve sloped{5.0, 0.7};
  REQUIRE(drift(5.0, 0.0, sloped, SdeParams{2.0, 1.0}) == Catch::Approx(0.7));
}

TEST_CASE("diffusion is the truncated square root") {
  REQUIRE(diffusion(0.0, SdeParams{1.0, 1.0}) == 0.0);
  REQUIRE(diffusion(2.0, SdeParams{0.5, 0.5}) == Catch::Approx(std::sqrt(2.0)));
  REQUIRE(diffusion(-1.0, SdeParams{1.0, 1.0}) == 0.0);
}

TEST_CASE("reversion rate bound holds on random profiles") {
  RngStream rng(17, 3, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p{0.0};
    const int n = 6 + static_cast<int>(rng.uniform_below(6));
    for (int i = 0; i < n; ++i) p.push_back(10.0 + rng.uniform() * 500.0);
    p.push_back(0.0);
    const LinearInterpolant curve(p);
    const SdeParams sp{0.5 + rng.uniform() * 2.0, 1.0 + rng.uniform() * 50.0};
    for (double t = 1.0; t <= n; t += 0.01) {
      const double theta = reversion_rate(t, curve, sp);
      REQUIRE(theta >= sp.theta0);
      REQUIRE(theta * curve(t) + curve.slope(t) - sp.alpha * sp.theta0 >= -1e-12);
    }
  }
}

TEST_CASE("path simulation is deterministic per seed") {
  const ConstantCurve p(100.0);
  const SdeParams sp{1.0, 2.0};
  RngStream a(9, 1, 0), b(9, 1, 0), c(9, 1, 1);
  const PathGrid ga = simulate_path(p, 0.0, 5.0, 100.0, sp, 0.01, a);
  const PathGrid gb = simulate_path(p, 0.0, 5.0, 100.0, sp, 0.01, b);
  const PathGrid gc = simulate_path(p, 0.0, 5.0, 100.0, sp, 0.01, c);
  REQUIRE(ga.values == gb.values);
  REQUIRE(ga.values != gc.values);
  REQUIRE(ga.values.size() == 501);
}

TEST_CASE("zero-diffusion limit tracks the prediction") {
  const LinearInterpolant curve({0.0, 80.0, 120.0, 100.0, 90.0, 110.0, 0.0});
  const SdeParams sp{1.0, 1e-8};
  RngStream rng(11, 4, 0);
  const PathGrid grid = simulate_path(curve, 2.0, 4.0, curve(2.0), sp, 0.01, rng);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const double t = grid.t_start + static_cast<double>(i) * grid.dt;
    REQUIRE(std::fabs(grid.values[i] - curve(t)) < 1e-2);
  }
}

TEST_CASE("stationary moments of the constant-prediction path (smoke)") {
  // Full-size oracle runs in the acceptance suite; this checks the same
  // gamma limit with a lighter ensemble.
  const ConstantCurve p(100.0);
  const SdeParams sp{1.0, 2.0};
  const int n_paths = 10000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < n_paths; ++k) {
    RngStream rng(21, fnv1a64("stationary-smoke"), static_cast<std::uint32_t>(k));
    const PathGrid grid = simulate_path(p, 0.0, 50.0, 100.0, sp, 0.01, rng);
    const double x = grid.values.back();
    REQUIRE(x > 0.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n_paths;
  const double var = sq / n_paths - mean * mean;
  REQUIRE(mean == Catch::Approx(100.0).epsilon(0.015));   // Gamma mean p
  REQUIRE(var == Catch::Approx(200.0).epsilon(0.10));     // Gamma variance alpha p
}

TEST_CASE("paths started on the prediction stay unbiased per node") {
  const LinearInterpolant curve({0.0, 150.0, 260.0, 300.0, 260.0, 150.0, 0.0});
  const SdeParams sp{1.0, 10.0};
  const int n_paths = 20000;
  const int nodes = 3;  // t = 2, 3, 4
  std::vector<double> sums(nodes, 0.0), sqs(nodes, 0.0);
  for (int k = 0; k < n_paths; ++k) {
    RngStream rng(33, fnv1a64("bias-smoke"), static_cast<std::uint32_t>(k));
    const PathGrid grid = simulate_path(curve, 2.0, 4.0, curve(2.0), sp, 0.01, rng);
    for (int j = 0; j < nodes; ++j) {
      const double x = grid.values[static_cast<std::size_t>(std::llround(j / grid.dt))];
      sums[j] += x;
      sqs[j] += x * x;
    }
  }
  for (int j = 0; j < nodes; ++j) {
    const double mean = sums[j] / n_paths;
    const double var = sqs[j] / n_paths - mean * mean;
    const double se = std::sqrt(var / n_paths);
    REQUIRE(std::fabs(mean - curve(2.0 + j)) <= 3.0 * se);
  }
}

TEST_CASE("halving dt moves the coupled volume mean by less than one standard error") {
  // Weak-convergence sanity check with common random numbers: the coarse
  // path consumes pairwise sums of the fine path's Gaussian increments.
  const LinearInterpolant curve({0.0, 150.0, 260.0, 300.0, 260.0, 150.0, 0.0});
  const SdeParams sp{1.0, 20.0};
  const double t0 = 2.0, t1 = 4.0;
  const double dt_fine = 0.005;
  const int steps_fine = static_cast<int>(std::llround((t1 - t0) / dt_fine));
  const int n_paths = 4000;

  auto step = [&](double x, double t, double h, double z) {
    const double pt = curve(t);
    const double sl = curve.slope(t);
    const double theta = std::max(sp.theta0, (sp.alpha * sp.theta0 - sl) / pt);
    const double xp = std::max(x, 0.0);
    return x + (sl - theta * (xp - pt)) * h +
           std::sqrt(2.0 * sp.alpha * sp.theta0 * xp) * std::sqrt(h) * z;
  };
  auto trapezoid = [](const std::vector<double>& v, double h) {
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return s * h;
  };

  double sum_fine = 0.0, sum_coarse = 0.0, sq_fine = 0.0;
  for (int k = 0; k < n_paths; ++k) {
    RngStream rng(77, fnv1a64("dt-refinement"), static_cast<std::uint32_t>(k));
    std::vector<double> z(static_cast<std::size_t>(steps_fine));
    for (auto& v : z) v = rng.normal();

    std::vector<double> fine{curve(t0)};
    for (int i = 0; i < steps_fine; ++i)
      fine.push_back(step(fine.back(), t0 + i * dt_fine, dt_fine, z[static_cast<std::size_t>(i)]));
    std::vector<double> coarse{curve(t0)};
    for (int i = 0; i < steps_fine / 2; ++i) {
      const double zc = (z[static_cast<std::size_t>(2 * i)] +
                         z[static_cast<std::size_t>(2 * i + 1)]) / std::sqrt(2.0);
      coarse.push_back(step(coarse.back(), t0 + i * 2.0 * dt_fine, 2.0 * dt_fine, zc));
    }
    const double vf = trapezoid(fine, dt_fine);
    sum_fine += vf;
    sq_fine += vf * vf;
    sum_coarse += trapezoid(coarse, 2.0 * dt_fine);
  }
  const double mean_fine = sum_fine / n_paths;
  const double mean_coarse = sum_coarse / n_paths;
  const double se = std::sqrt((sq_fine / n_paths - mean_fine * mean_fine) / n_paths);
  REQUIRE(std::fabs(mean_fine - mean_coarse) < se);
}
