#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "slicevol/error.hpp"
#include "slicevol/interpolant.hpp"
#include "slicevol/log.hpp"

namespace slicevol {

// One heart as ingested: per-slice LV areas in mm², apex-to-base order.
struct RawHeart {
  std::string id;
  std::vector<double> pred_areas;                  // mm² per slice
  std::optional<std::vector<double>> truth_areas;  // mm², same length when present
  double slice_spacing = 1.0;                      // mm between slice planes
  double pixel_area = 1.0;                         // mm², in-plane resolution product
};

// Canonical zero-bracketed series: p_0 = p_N = 0, p_1..p_{N-1} > 0.
struct SliceSeries {
  std::string id;
  std::vector<double> p;                 // p_0..p_N
  std::optional<std::vector<double>> g;  // ground truth, same length
  double slice_spacing = 1.0;

  int last_index() const { return static_cast<int>(p.size()) - 1; }
  bool has_truth() const { return g.has_value(); }
};

inline void validate(const RawHeart& raw) {
  if (raw.pred_areas.empty())
    throw Error(Errc::schema_error, "heart '" + raw.id + "': no slice predictions");
  for (double a : raw.pred_areas) {
    if (!std::isfinite(a) || a < 0.0)
      throw Error(Errc::schema_error,
                  "heart '" + raw.id + "': prediction areas must be finite and >= 0");
  }
  if (raw.truth_areas) {
    if (raw.truth_areas->size() != raw.pred_areas.size())
      throw Error(Errc::schema_error,
                  "heart '" + raw.id + "': truth/prediction length mismatch");
    for (double a : *raw.truth_areas) {
      if (!std::isfinite(a) || a < 0.0)
        throw Error(Errc::schema_error,
                    "heart '" + raw.id + "': truth areas must be finite and >= 0");
    }
  }
  if (!(raw.slice_spacing > 0.0) || !std::isfinite(raw.slice_spacing))
    throw Error(Errc::schema_error, "heart '" + raw.id + "': slice_spacing must be > 0");
  if (!(raw.pixel_area > 0.0) || !std::isfinite(raw.pixel_area))
    throw Error(Errc::schema_error, "heart '" + raw.id + "': pixel_area must be > 0");
}

inline void validate(const SliceSeries& s) {
  const int n = s.last_index();
  if (n < 4)
    throw Error(Errc::too_few_slices,
                "series '" + s.id + "': need at least 5 slices, got " + std::to_string(n + 1));
  if (s.p.front() != 0.0 || s.p.back() != 0.0)
    throw Error(Errc::schema_error, "series '" + s.id + "': outermost slices must be zero");
  for (int i = 1; i < n; ++i) {
    if (!(s.p[i] > 0.0))
      throw Error(Errc::interior_zero,
                  "series '" + s.id + "': interior slice " + std::to_string(i) + " is zero");
  }
  if (!(s.slice_spacing > 0.0))
    throw Error(Errc::schema_error, "series '" + s.id + "': slice_spacing must be > 0");
  if (s.g) {
    if (s.g->size() != s.p.size())
      throw Error(Errc::schema_error, "series '" + s.id + "': truth length mismatch");
    // A zero truth slice between two populated ones would mean a
    // disconnected ventricle, which the model excludes.
    bool seen_gap_after_volume = false;
    bool seen_volume = false;
    for (double gi : *s.g) {
      if (gi > 0.0) {
        if (seen_gap_after_volume)
          throw Error(Errc::schema_error,
                      "series '" + s.id + "': ground truth volume is interrupted by a zero slice");
        seen_volume = true;
      } else if (seen_volume) {
        seen_gap_after_volume = true;
      }
    }
  }
}

// Threshold-and-collapse: predictions below epsilon become zero, runs of
// zeros at either end collapse so exactly one zero brackets each side
// (appending one where none exists). A zero strictly between positive
// predictions is an upstream failure, not something to bridge over.
inline SliceSeries preprocess(const RawHeart& raw, double epsilon) {
  validate(raw);
  if (!(epsilon >= 0.0))
    throw Error(Errc::domain_error, "epsilon must be >= 0");

  std::vector<double> p = raw.pred_areas;
  for (double& a : p)
    if (a < epsilon) a = 0.0;

  const auto first_pos = std::find_if(p.begin(), p.end(), [](double a) { return a > 0.0; });
  if (first_pos == p.end())
    throw Error(Errc::too_few_slices, "heart '" + raw.id + "': no prediction above threshold");
  const std::size_t a = static_cast<std::size_t>(first_pos - p.begin());
  std::size_t b = p.size() - 1;
  while (p[b] == 0.0) --b;

  for (std::size_t i = a; i <= b; ++i) {
    if (p[i] == 0.0)
      throw Error(Errc::interior_zero, "heart '" + raw.id + "': zero prediction at slice " +
                                           std::to_string(i) + " splits the volume");
  }

  SliceSeries out;
  out.id = raw.id;
  out.slice_spacing = raw.slice_spacing;
  out.p.reserve(b - a + 3);
  out.p.push_back(0.0);
  out.p.insert(out.p.end(), p.begin() + a, p.begin() + b + 1);
  out.p.push_back(0.0);

  if (raw.truth_areas) {
    const auto& g = *raw.truth_areas;
    std::vector<double> gt;
    gt.reserve(out.p.size());
    gt.push_back(a > 0 ? g[a - 1] : 0.0);
    gt.insert(gt.end(), g.begin() + a, g.begin() + b + 1);
    gt.push_back(b + 1 < g.size() ? g[b + 1] : 0.0);
    if (a > 1 || b + 2 < g.size())
      log_debug("heart '" + raw.id + "': truncated " + std::to_string(a > 1 ? a - 1 : 0) +
                "+" + std::to_string(b + 2 < g.size() ? g.size() - b - 2 : 0) +
                " trailing zero-prediction slices");
    out.g = std::move(gt);
  }

  validate(out);
  return out;
}

inline SliceSeries reversed(const SliceSeries& s) {
  SliceSeries out = s;
  std::reverse(out.p.begin(), out.p.end());
  if (out.g) std::reverse(out.g->begin(), out.g->end());
  return out;
}

inline LinearInterpolant interpolate(const SliceSeries& s) { return LinearInterpolant(s.p); }

inline double point_prediction_ml(const SliceSeries& s) {
  double sum = 0.0;
  for (double v : s.p) sum += v;
  return sum * s.slice_spacing / 1000.0;
}

inline double truth_volume_ml(const SliceSeries& s) {
  if (!s.g) throw Error(Errc::schema_error, "series '" + s.id + "' carries no ground truth");
  double sum = 0.0;
  for (double v : *s.g) sum += v;
  return sum * s.slice_spacing / 1000.0;
}

}  // namespace slicevol
