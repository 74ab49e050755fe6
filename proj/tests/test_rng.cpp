#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "slicevol/rng.hpp"

using namespace slicevol;

TEST_CASE("identical stream identity reproduces the sequence bitwise") {
  RngStream a(42, fnv1a64("heart-1"), 7);
  RngStream b(42, fnv1a64("heart-1"), 7);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  RngStream c(42, fnv1a64("heart-1"), 7);
  RngStream d(42, fnv1a64("heart-1"), 7);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(c.normal() == d.normal());
    REQUIRE(c.gamma(3.5, 0.2) == d.gamma(3.5, 0.2));
  }
}

TEST_CASE("distinct streams and substreams decorrelate") {
  RngStream a(42, 1, 0);
  RngStream b(42, 2, 0);
  RngStream c(42, 1, 1);
  RngStream d(43, 1, 0);
  int equal_ab = 0, equal_ac = 0, equal_ad = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next_u64();
    equal_ab += va == b.next_u64();
    equal_ac += va == c.next_u64();
    equal_ad += va == d.next_u64();
  }
  REQUIRE(equal_ab == 0);
  REQUIRE(equal_ac == 0);
  REQUIRE(equal_ad == 0);
}

TEST_CASE("uniform lies in (0, 1]") {
  RngStream rng(1, 2, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
  }
}

TEST_CASE("normal and gamma sample moments") {
  RngStream rng(7, 11, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  REQUIRE(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  REQUIRE(var == Catch::Approx(1.0).margin(0.02));

  for (const double shape : {0.5, 2.0, 17.0}) {
    const double rate = 0.25;
    double gsum = 0.0, gsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape, rate);
      REQUIRE(g > 0.0);
      gsum += g;
      gsq += g * g;
    }
    const double gmean = gsum / n;
    const double gvar = gsq / n - gmean * gmean;
    REQUIRE(gmean == Catch::Approx(shape / rate).epsilon(0.02));
    REQUIRE(gvar == Catch::Approx(shape / (rate * rate)).epsilon(0.06));
  }
}

TEST_CASE("uniform_below covers the range") {
  RngStream rng(5, 6, 7);
  std::vector<int> counts(8, 0);
  for (int i = 0; i < 8000; ++i) ++counts[static_cast<std::size_t>(rng.uniform_below(8))];
  for (int c : counts) REQUIRE(c > 800);
}
