#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <vector>

#include "slicevol/error.hpp"

namespace slicevol {

// Depth-dependent prediction curve: value plus one-sided slopes. The
// interior SDE and the moment ODEs are both driven through this interface.
template <class P>
concept PredictionCurve = requires(const P& p, double t) {
  { p(t) } -> std::convertible_to<double>;
  { p.slope(t) } -> std::convertible_to<double>;
  { p.slope_before(t) } -> std::convertible_to<double>;
};

// Piecewise-linear interpolation of per-slice values p_0..p_N at integer
// depths, zero-extended with virtual nodes at t = -1 and t = N+1. The
// integral over [-1, N+1] equals the plain node sum, so distributional
// volumes stay directly comparable with the point prediction.
class LinearInterpolant {
 public:
  explicit LinearInterpolant(const std::vector<double>& node_values) {
    if (node_values.empty())
      throw Error(Errc::domain_error, "interpolant needs at least one node");
    values_.reserve(node_values.size() + 2);
    values_.push_back(0.0);
    values_.insert(values_.end(), node_values.begin(), node_values.end());
    values_.push_back(0.0);
    last_ = static_cast<int>(node_values.size()) - 1;
  }

  // Value at depth t; zero outside [-1, N+1].
  double operator()(double t) const {
    if (t <= -1.0 || t >= last_ + 1.0) return 0.0;
    const int k = segment_of(t);
    const double a = values_[k + 1];
    const double b = values_[k + 2];
    return a + (t - k) * (b - a);
  }

  // Right-hand derivative (constant per segment).
  double slope(double t) const {
    if (t < -1.0 || t >= last_ + 1.0) return 0.0;
    const int k = segment_of(t);
    return values_[k + 2] - values_[k + 1];
  }

  // Left-hand derivative; differs from slope() only at integer nodes.
  double slope_before(double t) const {
    if (t <= -1.0 || t > last_ + 1.0) return 0.0;
    int k = segment_of(t);
    if (t == std::floor(t) && t > -1.0) k = static_cast<int>(t) - 1;
    if (k < -1) k = -1;
    return values_[k + 2] - values_[k + 1];
  }

  double node(int i) const { return values_[i + 1]; }  // i in [-1, N+1]
  int last_index() const { return last_; }

  double node_sum() const {
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < values_.size(); ++i) s += values_[i];
    return s;
  }

  // Trapezoid integral over [-1, N+1]; analytically equal to node_sum().
  double integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i)
      s += 0.5 * (values_[i] + values_[i + 1]);
    return s;
  }

 private:
  int segment_of(double t) const {
    int k = static_cast<int>(std::floor(t));
    if (k < -1) k = -1;
    if (k > last_) k = last_;
    return k;
  }

  std::vector<double> values_;  // index i ↔ depth i-1
  int last_ = 0;                // N
};

// Flat prediction used for the delta bridge, where p_t ≡ p_2.
class ConstantCurve {
 public:
  explicit ConstantCurve(double value) : value_(value) {}
  double operator()(double) const { return value_; }
  double slope(double) const { return 0.0; }
  double slope_before(double) const { return 0.0; }

 private:
  double value_;
};

static_assert(PredictionCurve<LinearInterpolant>);
static_assert(PredictionCurve<ConstantCurve>);

}  // namespace slicevol
