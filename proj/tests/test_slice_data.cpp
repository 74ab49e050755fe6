#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "slicevol/rng.hpp"
#include "slicevol/slice_data.hpp"

using namespace slicevol;

namespace {

RawHeart make_raw(std::vector<double> pred, double spacing = 10.0) {
  RawHeart h;
  h.id = "t";
  h.pred_areas = std::move(pred);
  h.slice_spacing = spacing;
  return h;
}

auto has_code(Errc code) {
  return Catch::Matchers::Predicate<Error>(
      [code](const Error& e) { return e.code() == code; });
}

}  // namespace

TEST_CASE("preprocess thresholds and collapses zero brackets") {
  // 10 mm^2 threshold; sub-threshold ends become the zero bracket.
  const SliceSeries s = preprocess(make_raw({0.5, 12.0, 300.0, 280.0, 7.0, 0.2}), 10.0);
  REQUIRE(s.p == std::vector<double>{0.0, 12.0, 300.0, 280.0, 0.0});
}

TEST_CASE("preprocess appends zeros where none exist") {
  const SliceSeries s = preprocess(make_raw({20.0, 30.0, 40.0}), 10.0);
  REQUIRE(s.p == std::vector<double>{0.0, 20.0, 30.0, 40.0, 0.0});
}

TEST_CASE("preprocess rejects interior zeros") {
  REQUIRE_THROWS_MATCHES(preprocess(make_raw({0.0, 0.0, 50.0, 0.0, 40.0, 0.0}), 10.0), Error,
                         has_code(Errc::interior_zero));
}

TEST_CASE("preprocess rejects too-short series") {
  // Two positive slices bracket to N = 3, below the minimum of 4.
  REQUIRE_THROWS_MATCHES(preprocess(make_raw({20.0, 30.0}), 10.0), Error,
                         has_code(Errc::too_few_slices));
  REQUIRE_THROWS_MATCHES(preprocess(make_raw({5.0, 5.0, 5.0}), 10.0), Error,
                         has_code(Errc::too_few_slices));
}

TEST_CASE("preprocess keeps truth aligned with the kept bracket") {
  RawHeart h = make_raw({0.0, 2.0, 50.0, 60.0, 70.0, 3.0});
  h.truth_areas = std::vector<double>{0.0, 9.0, 48.0, 61.0, 69.0, 11.0};
  const SliceSeries s = preprocess(h, 10.0);
  REQUIRE(s.p == std::vector<double>{0.0, 50.0, 60.0, 70.0, 0.0});
  // The bracketing zero slices keep their labels.
  REQUIRE(*s.g == std::vector<double>{9.0, 48.0, 61.0, 69.0, 11.0});
}

TEST_CASE("preprocess is idempotent") {
  RngStream rng(99, 1, 0);
  int checked = 0;
  for (int trial = 0; trial < 80; ++trial) {
    std::vector<double> pred;
    const int n = 5 + static_cast<int>(rng.uniform_below(8));
    for (int i = 0; i < n; ++i) pred.push_back(rng.uniform() * 400.0);
    SliceSeries once;
    try {
      once = preprocess(make_raw(pred), 10.0);
    } catch (const Error&) {
      continue;  // interior zero or too short: nothing to re-run
    }
    RawHeart again;
    again.id = once.id;
    again.pred_areas = once.p;
    again.slice_spacing = once.slice_spacing;
    const SliceSeries twice = preprocess(again, 10.0);
    REQUIRE(twice.p == once.p);
    ++checked;
  }
  REQUIRE(checked > 10);
}

TEST_CASE("reverse flips the series and is an involution") {
  SliceSeries s;
  s.id = "r";
  s.p = {0.0, 1.0, 2.0, 3.0, 0.0};
  s.g = std::vector<double>{0.0, 1.5, 2.5, 3.5, 4.5};
  s.slice_spacing = 10.0;
  const SliceSeries rev = reversed(s);
  REQUIRE(rev.p == std::vector<double>{0.0, 3.0, 2.0, 1.0, 0.0});
  REQUIRE(*rev.g == std::vector<double>{4.5, 3.5, 2.5, 1.5, 0.0});
  const SliceSeries back = reversed(rev);
  REQUIRE(back.p == s.p);
  REQUIRE(back.g == s.g);

  double sum_fwd = 0.0, sum_rev = 0.0;
  for (double v : s.p) sum_fwd += v;
  for (double v : rev.p) sum_rev += v;
  REQUIRE(sum_fwd == sum_rev);

  SliceSeries pal;
  pal.id = "p";
  pal.p = {0.0, 1.0, 2.0, 1.0, 0.0};
  REQUIRE(reversed(pal).p == pal.p);
}

TEST_CASE("interpolation integral equals the node sum") {
  REQUIRE(LinearInterpolant({0.0, 2.0, 4.0, 0.0}).integral() == Catch::Approx(6.0).epsilon(1e-12));
  REQUIRE(LinearInterpolant({0.0, 10.0, 0.0}).integral() == Catch::Approx(10.0).epsilon(1e-12));
  REQUIRE(LinearInterpolant({0.0, 1.0, 2.0, 3.0, 0.0}).integral() ==
          Catch::Approx(6.0).epsilon(1e-12));

  RngStream rng(123, 5, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p;
    const int n = 2 + static_cast<int>(rng.uniform_below(12));
    for (int i = 0; i < n; ++i) p.push_back(rng.uniform() * 500.0);
    const LinearInterpolant curve(p);
    REQUIRE(std::fabs(curve.integral() - curve.node_sum()) <= 1e-9 * curve.node_sum());
  }
}

TEST_CASE("interpolant values and one-sided slopes") {
  const LinearInterpolant curve({0.0, 4.0, 8.0, 0.0});  // N = 3
  REQUIRE(curve(-1.0) == 0.0);
  REQUIRE(curve(0.5) == Catch::Approx(2.0));
  REQUIRE(curve(1.0) == Catch::Approx(4.0));
  REQUIRE(curve(1.5) == Catch::Approx(6.0));
  REQUIRE(curve(4.0) == 0.0);
  REQUIRE(curve(17.0) == 0.0);
  REQUIRE(curve.slope(0.5) == Catch::Approx(4.0));
  REQUIRE(curve.slope(1.0) == Catch::Approx(4.0));  // right-hand at the node
  REQUIRE(curve.slope_before(1.0) == Catch::Approx(4.0));
  REQUIRE(curve.slope(2.0) == Catch::Approx(-8.0));
  REQUIRE(curve.slope_before(2.0) == Catch::Approx(4.0));
}

TEST_CASE("series validation catches invariant violations") {
  SliceSeries bad_end;
  bad_end.id = "x";
  bad_end.p = {0.0, 1.0, 2.0, 3.0, 4.0};
  REQUIRE_THROWS_AS(validate(bad_end), Error);

  SliceSeries disconnected;
  disconnected.id = "y";
  disconnected.p = {0.0, 1.0, 2.0, 3.0, 0.0};
  disconnected.g = std::vector<double>{0.0, 5.0, 0.0, 5.0, 0.0};
  REQUIRE_THROWS_MATCHES(validate(disconnected), Error, has_code(Errc::schema_error));
}
