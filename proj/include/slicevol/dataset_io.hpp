#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "slicevol/error.hpp"
#include "slicevol/slice_data.hpp"
#include "slicevol/version.hpp"

namespace slicevol {

enum class DataFormat { csv, json };

inline DataFormat infer_format(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return DataFormat::json;
  return DataFormat::csv;
}

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

namespace detail {

inline double parse_finite(std::string_view token, const std::string& context) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw Error(Errc::parse_error, context + ": cannot parse number '" + std::string(token) + "'");
  if (!std::isfinite(v))
    throw Error(Errc::schema_error, context + ": non-finite value '" + std::string(token) + "'");
  return v;
}

inline long parse_long(std::string_view token, const std::string& context) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw Error(Errc::parse_error, context + ": cannot parse integer '" + std::string(token) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline constexpr std::string_view kCsvHeader =
    "id,slice_index,pred_area_mm2,truth_area_mm2,slice_spacing_mm";

}  // namespace detail

inline std::vector<RawHeart> load_dataset_csv(std::istream& in) {
  std::vector<RawHeart> hearts;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  RawHeart* current = nullptr;
  bool current_has_truth = false;
  long expected_index = 0;

  auto finish_group = [&] {
    if (current != nullptr && !current_has_truth) current->truth_areas.reset();
    current = nullptr;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string context = "line " + std::to_string(line_no);
    if (line[0] == '#') {
      const auto pos = line.find("format_version=");
      if (pos != std::string::npos)
        check_format_version(line.substr(pos + 15), context);
      continue;
    }
    if (!header_seen) {
      if (line != detail::kCsvHeader)
        throw Error(Errc::parse_error, context + ": expected header '" +
                                           std::string(detail::kCsvHeader) + "'");
      header_seen = true;
      continue;
    }

    const auto fields = detail::split_csv(line);
    if (fields.size() != 5)
      throw Error(Errc::parse_error,
                  context + ": expected 5 fields, got " + std::to_string(fields.size()));

    const std::string id(fields[0]);
    if (id.empty()) throw Error(Errc::schema_error, context + ": empty id");
    const long slice_index = detail::parse_long(fields[1], context);
    const double pred = detail::parse_finite(fields[2], context);
    const bool has_truth = !fields[3].empty();
    const double truth = has_truth ? detail::parse_finite(fields[3], context) : 0.0;
    const double spacing = detail::parse_finite(fields[4], context);
    if (pred < 0.0 || (has_truth && truth < 0.0))
      throw Error(Errc::schema_error, context + ": negative area");
    if (spacing <= 0.0)
      throw Error(Errc::schema_error, context + ": slice_spacing must be positive");

    if (current == nullptr || current->id != id) {
      for (const auto& h : hearts)
        if (h.id == id)
          throw Error(Errc::schema_error, context + ": rows for id '" + id +
                                              "' are not contiguous");
      finish_group();
      hearts.emplace_back();
      current = &hearts.back();
      current->id = id;
      current->slice_spacing = spacing;
      current->truth_areas.emplace();
      current_has_truth = has_truth;
      expected_index = 0;
    }
    if (slice_index != expected_index)
      throw Error(Errc::schema_error, context + ": slice_index " + std::to_string(slice_index) +
                                          " out of order (expected " +
                                          std::to_string(expected_index) + ")");
    if (spacing != current->slice_spacing)
      throw Error(Errc::schema_error, context + ": slice_spacing differs within id '" + id + "'");
    if (has_truth != current_has_truth)
      throw Error(Errc::schema_error,
                  context + ": truth column must be set for all slices of an id or none");
    current->pred_areas.push_back(pred);
    if (has_truth) current->truth_areas->push_back(truth);
    ++expected_index;
  }
  finish_group();
  for (const auto& h : hearts) validate(h);
  return hearts;
}

inline std::vector<RawHeart> load_dataset_json(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("invalid JSON: ") + e.what());
  }
  if (doc.is_object()) {
    if (doc.contains("format_version"))
      check_format_version(doc["format_version"].get<std::string>(), "dataset");
    if (!doc.contains("hearts") || !doc["hearts"].is_array())
      throw Error(Errc::schema_error, "dataset object must contain a 'hearts' array");
    doc = doc["hearts"];
  }
  if (!doc.is_array()) throw Error(Errc::schema_error, "dataset JSON must be an array");

  std::vector<RawHeart> hearts;
  hearts.reserve(doc.size());
  std::size_t index = 0;
  for (const auto& rec : doc) {
    const std::string context = "record " + std::to_string(index++);
    if (!rec.is_object()) throw Error(Errc::schema_error, context + ": not an object");
    for (const char* key : {"id", "slice_spacing_mm", "pred_areas_mm2"})
      if (!rec.contains(key))
        throw Error(Errc::schema_error, context + ": missing field '" + key + "'");

    RawHeart h;
    if (!rec["id"].is_string()) throw Error(Errc::schema_error, context + ": id must be a string");
    h.id = rec["id"].get<std::string>();
    if (!rec["slice_spacing_mm"].is_number())
      throw Error(Errc::schema_error, context + ": slice_spacing_mm must be a number");
    h.slice_spacing = rec["slice_spacing_mm"].get<double>();

    auto read_areas = [&](const nlohmann::json& arr, const char* name) {
      if (!arr.is_array()) throw Error(Errc::schema_error, context + ": " + name + " must be an array");
      std::vector<double> out;
      out.reserve(arr.size());
      for (const auto& v : arr) {
        if (!v.is_number())
          throw Error(Errc::schema_error, context + ": " + name + " must contain numbers");
        const double x = v.get<double>();
        if (!std::isfinite(x) || x < 0.0)
          throw Error(Errc::schema_error,
                      context + ": " + name + " must be finite and non-negative");
        out.push_back(x);
      }
      return out;
    };
    h.pred_areas = read_areas(rec["pred_areas_mm2"], "pred_areas_mm2");
    if (rec.contains("truth_areas_mm2") && !rec["truth_areas_mm2"].is_null())
      h.truth_areas = read_areas(rec["truth_areas_mm2"], "truth_areas_mm2");
    validate(h);
    hearts.push_back(std::move(h));
  }
  return hearts;
}

inline std::vector<RawHeart> load_dataset(const std::string& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  if (format == DataFormat::csv) return load_dataset_csv(in);
  // An empty file is an empty dataset in either format.
  in.seekg(0, std::ios::end);
  if (in.tellg() == 0) return {};
  in.seekg(0);
  return load_dataset_json(in);
}

inline void save_dataset_csv(std::ostream& out, const std::vector<SliceSeries>& dataset) {
  out << "# format_version=" << kFormatVersion << "\n";
  out << detail::kCsvHeader << "\n";
  for (const auto& s : dataset) {
    for (std::size_t i = 0; i < s.p.size(); ++i) {
      out << s.id << ',' << i << ',' << format_double(s.p[i]) << ',';
      if (s.g) out << format_double((*s.g)[i]);
      out << ',' << format_double(s.slice_spacing) << "\n";
    }
  }
}

inline void save_dataset_json(std::ostream& out, const std::vector<SliceSeries>& dataset) {
  nlohmann::json hearts = nlohmann::json::array();
  for (const auto& s : dataset) {
    nlohmann::json rec;
    rec["id"] = s.id;
    rec["slice_spacing_mm"] = s.slice_spacing;
    rec["pred_areas_mm2"] = s.p;
    if (s.g)
      rec["truth_areas_mm2"] = *s.g;
    else
      rec["truth_areas_mm2"] = nullptr;
    hearts.push_back(std::move(rec));
  }
  nlohmann::json doc;
  doc["format_version"] = std::string(kFormatVersion);
  doc["hearts"] = std::move(hearts);
  out << doc.dump(2) << "\n";
}

inline void save_dataset(const std::string& path, const std::vector<SliceSeries>& dataset,
                         DataFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  if (format == DataFormat::csv)
    save_dataset_csv(out, dataset);
  else
    save_dataset_json(out, dataset);
}

inline std::vector<SliceSeries> preprocess_dataset(const std::vector<RawHeart>& raw,
                                                   double epsilon) {
  std::vector<SliceSeries> out;
  out.reserve(raw.size());
  for (const auto& h : raw) out.push_back(preprocess(h, epsilon));
  return out;
}

}  // namespace slicevol
