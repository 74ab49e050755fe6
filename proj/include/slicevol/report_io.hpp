#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "slicevol/dataset_io.hpp"
#include "slicevol/error.hpp"
#include "slicevol/estimation.hpp"
#include "slicevol/pipeline.hpp"
#include "slicevol/synth.hpp"
#include "slicevol/version.hpp"

namespace slicevol {

namespace detail {

inline nlohmann::json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::json stage_json(const StageDiagnostics& s) {
  return {{"ran", s.ran}, {"iterations", s.iterations}, {"converged", s.converged}};
}

}  // namespace detail

inline nlohmann::json model_params_to_json(const ModelParams& p) {
  return {{"theta0", p.sde.theta0},
          {"alpha", p.sde.alpha},
          {"lambda_u", p.jump.lambda_u},
          {"lambda_d", p.jump.lambda_d},
          {"beta_u0", detail::number_or_null(p.jump.beta_u0)},
          {"beta_u1", detail::number_or_null(p.jump.beta_u1)},
          {"beta_n", detail::number_or_null(p.jump.beta_n)},
          {"delta", p.delta}};
}

inline ModelParams model_params_from_json(const nlohmann::json& j) {
  ModelParams p;
  auto require = [&](const char* key) {
    if (!j.contains(key))
      throw Error(Errc::schema_error, std::string("params missing field '") + key + "'");
    return j.at(key);
  };
  auto num_or_nan = [&](const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.at(key).get<double>();
  };
  p.sde.theta0 = require("theta0").get<double>();
  p.sde.alpha = require("alpha").get<double>();
  p.jump.lambda_u = require("lambda_u").get<double>();
  p.jump.lambda_d = require("lambda_d").get<double>();
  p.jump.beta_u0 = num_or_nan("beta_u0");
  p.jump.beta_u1 = num_or_nan("beta_u1");
  p.jump.beta_n = num_or_nan("beta_n");
  p.delta = require("delta").get<double>();
  return p;
}

inline nlohmann::json fit_config_to_json(const FitConfig& cfg) {
  return {{"xatol", cfg.xatol},
          {"fatol", cfg.fatol},
          {"max_iters", cfg.max_iters},
          {"moment_steps", cfg.moment_steps},
          {"delta_max", cfg.delta_max},
          {"threads", cfg.threads}};
}

inline nlohmann::json fit_report_to_json(const FitReport& r, const FitConfig& cfg) {
  nlohmann::json j;
  j["format_version"] = std::string(kFormatVersion);
  j["params"] = model_params_to_json(r.params);
  j["loglik"] = {{"jump", r.loglik_jump},
                 {"sde", r.loglik_sde},
                 {"delta", r.loglik_delta},
                 {"total", r.total_loglik()}};
  j["counts"] = {{"no_jump", r.count_no_jump},
                 {"jump_up", r.count_jump_up},
                 {"jump_down", r.count_jump_down},
                 {"edge_total", r.edge_total}};
  j["stages"] = {{"beta_u0", detail::stage_json(r.beta_u0_stage)},
                 {"beta_u1", detail::stage_json(r.beta_u1_stage)},
                 {"beta_n", detail::stage_json(r.beta_n_stage)},
                 {"sde", detail::stage_json(r.sde_stage)},
                 {"delta", detail::stage_json(r.delta_stage)}};
  j["degenerate_variance_events"] = r.degenerate_variance_events;
  j["config"] = fit_config_to_json(cfg);
  return j;
}

inline void write_fit_report(const std::string& path, const FitReport& r, const FitConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << fit_report_to_json(r, cfg).dump(2) << "\n";
}

// Accepts either a full fit report or a bare parameter object.
inline ModelParams read_model_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("invalid params JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::schema_error, "params file must hold a JSON object");
  if (doc.contains("format_version"))
    check_format_version(doc["format_version"].get<std::string>(), "params file");
  const nlohmann::json& params = doc.contains("params") ? doc["params"] : doc;
  return model_params_from_json(params);
}

// ---------------------------------------------------------------------------
// Distribution / evaluation writers
// ---------------------------------------------------------------------------

inline void write_distributions_csv(const std::string& path,
                                    const std::vector<VolumeDistribution>& dists,
                                    const std::vector<double>& point_predictions) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << "# format_version=" << kFormatVersion << "\n";
  out << "id,pred_ml,mean_ml,std_ml,q01,q05,q25,q50,q75,q95,q99,n_sims\n";
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const auto& d = dists[i];
    out << d.series_id << ',' << format_double(point_predictions[i]) << ','
        << format_double(d.mean) << ',' << format_double(d.stddev) << ','
        << format_double(d.q01) << ',' << format_double(d.q05) << ',' << format_double(d.q25)
        << ',' << format_double(d.q50) << ',' << format_double(d.q75) << ','
        << format_double(d.q95) << ',' << format_double(d.q99) << ',' << d.n_sims << "\n";
  }
}

inline void write_distributions_json(const std::string& path,
                                     const std::vector<VolumeDistribution>& dists,
                                     const std::vector<double>& point_predictions,
                                     bool include_draws) {
  nlohmann::json hearts = nlohmann::json::array();
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const auto& d = dists[i];
    nlohmann::json rec{{"id", d.series_id},
                       {"pred_ml", point_predictions[i]},
                       {"mean_ml", d.mean},
                       {"std_ml", d.stddev},
                       {"quantiles",
                        {{"q01", d.q01},
                         {"q05", d.q05},
                         {"q25", d.q25},
                         {"q50", d.q50},
                         {"q75", d.q75},
                         {"q95", d.q95},
                         {"q99", d.q99}}},
                       {"n_sims", d.n_sims},
                       {"seed", d.seed}};
    if (include_draws) rec["draws_ml"] = d.draws;
    hearts.push_back(std::move(rec));
  }
  nlohmann::json doc{{"format_version", std::string(kFormatVersion)}, {"hearts", std::move(hearts)}};
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

inline void write_evaluation_csv(const std::string& path, const EvaluationTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << "# format_version=" << kFormatVersion << "\n";
  out << "id,true_ml,pred_ml,mean_ml,std_ml,q05,q25,q50,q75,q95,cov50,cov90\n";
  for (const auto& h : table.hearts) {
    out << h.id << ',' << format_double(h.true_ml) << ',' << format_double(h.pred_ml) << ','
        << format_double(h.mean_ml) << ',' << format_double(h.std_ml) << ','
        << format_double(h.q05) << ',' << format_double(h.q25) << ',' << format_double(h.q50)
        << ',' << format_double(h.q75) << ',' << format_double(h.q95) << ',' << (h.cov50 ? 1 : 0)
        << ',' << (h.cov90 ? 1 : 0) << "\n";
  }
}

inline void write_calibration_csv(const std::string& path, const EvaluationTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << "# format_version=" << kFormatVersion << "\n";
  out << "nominal,empirical\n";
  for (const auto& row : table.calibration)
    out << format_double(row.nominal) << ',' << format_double(row.empirical) << "\n";
}

inline void write_histogram_csv(const std::string& path, const std::vector<HistogramBin>& bins) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << "# format_version=" << kFormatVersion << "\n";
  out << "bin_left,bin_right,count\n";
  for (const auto& b : bins)
    out << format_double(b.left) << ',' << format_double(b.right) << ',' << b.count << "\n";
}

inline void write_stability_csv(const std::string& path, const StabilityResult& res) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << "# format_version=" << kFormatVersion << "\n";
  out << "# full_theta0=" << format_double(res.full_params.theta0)
      << " full_alpha=" << format_double(res.full_params.alpha)
      << " full_nll=" << format_double(res.full_nll) << "\n";
  out << "repeat,part,reversed,theta0,alpha,nll_on_full,iterations,converged\n";
  for (const auto& e : res.entries) {
    out << e.repeat << ',' << e.part << ',' << (e.reversed_order ? 1 : 0) << ','
        << format_double(e.params.theta0) << ',' << format_double(e.params.alpha) << ','
        << format_double(e.nll_on_full) << ',' << e.iterations << ',' << (e.converged ? 1 : 0)
        << "\n";
  }
}

inline void write_nll_grid_csv(const std::string& path, const std::vector<NllGridPoint>& grid) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << "# format_version=" << kFormatVersion << "\n";
  out << "theta0,alpha,nll\n";
  for (const auto& pt : grid)
    out << format_double(pt.theta0) << ',' << format_double(pt.alpha) << ','
        << format_double(pt.nll) << "\n";
}

inline void write_binned_fits(const std::string& path, const std::vector<VolumeBinFit>& fits,
                              const FitConfig& cfg) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& f : fits) {
    bins.push_back({{"vol_lo_ml", f.vol_lo_ml},
                    {"vol_hi_ml", f.vol_hi_ml},
                    {"n_hearts", f.n_hearts},
                    {"alpha_theta0", f.report.params.sde.alpha * f.report.params.sde.theta0},
                    {"report", fit_report_to_json(f.report, cfg)}});
  }
  nlohmann::json doc{{"format_version", std::string(kFormatVersion)}, {"bins", std::move(bins)}};
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

inline nlohmann::json recovery_report_to_json(const RecoveryReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"name", row.name},
                    {"truth", row.truth},
                    {"fitted", detail::number_or_null(row.fitted)},
                    {"abs_error", detail::number_or_null(row.abs_error)},
                    {"rel_error", detail::number_or_null(row.rel_error)},
                    {"tolerance", row.tolerance},
                    {"checked", row.checked},
                    {"pass", row.pass}});
  }
  return {{"format_version", std::string(kFormatVersion)},
          {"n_hearts", r.n_hearts},
          {"low_sample", r.low_sample},
          {"all_pass", r.all_pass},
          {"rows", std::move(rows)}};
}

}  // namespace slicevol
