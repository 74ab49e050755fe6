// Command-line surface for the slice-volume uncertainty model:
// preprocess | fit | simulate | evaluate | synth.
//
// Exit codes: 0 success, 2 data/config errors, 3 optimizer non-convergence
// (the report is still written), 4 parameter-file/version mismatch.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slicevol/slicevol.hpp"

namespace {

using namespace slicevol;

constexpr int kExitData = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitParamsMismatch = 4;

DataFormat pick_format(const std::string& path, const std::string& flag) {
  if (flag == "csv") return DataFormat::csv;
  if (flag == "json") return DataFormat::json;
  return infer_format(path);
}

std::vector<SliceSeries> load_preprocessed(const std::string& path, const std::string& format_flag,
                                           double epsilon) {
  const auto raw = load_dataset(path, pick_format(path, format_flag));
  return preprocess_dataset(raw, epsilon);
}

int data_error(const Error& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  switch (e.code()) {
    case Errc::version_mismatch:
    case Errc::degenerate_params:
      return kExitParamsMismatch;
    default:
      return kExitData;
  }
}

struct StabilityArgs {
  int splits = 3;
  int repeats = 3;
};

StabilityArgs parse_stability_tokens(const std::vector<std::string>& tokens) {
  StabilityArgs args;
  for (const auto& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::parse_error, "--stability expects key=value tokens, got '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const int value = std::stoi(tok.substr(eq + 1));
    if (key == "splits")
      args.splits = value;
    else if (key == "repeats")
      args.repeats = value;
    else
      throw Error(Errc::parse_error, "--stability: unknown key '" + key + "'");
  }
  return args;
}

std::string strip_suffix(const std::string& path, const std::string& suffix) {
  if (path.size() > suffix.size() && path.substr(path.size() - suffix.size()) == suffix)
    return path.substr(0, path.size() - suffix.size());
  return path;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributional volume prediction for stacked-slice area series"};
  app.require_subcommand(1);

  // --- preprocess ---------------------------------------------------------
  std::string pre_input, pre_out, pre_format = "auto", pre_out_format = "auto";
  double pre_epsilon = 10.0;
  auto* pre = app.add_subcommand("preprocess", "Threshold and zero-bracket a raw dataset");
  pre->add_option("--input", pre_input, "Input dataset (CSV or JSON)")->required();
  pre->add_option("--out", pre_out, "Output dataset path")->required();
  pre->add_option("--format", pre_format, "Input format: csv|json|auto")
      ->capture_default_str();
  pre->add_option("--out-format", pre_out_format, "Output format: csv|json|auto")
      ->capture_default_str();
  pre->add_option("--epsilon", pre_epsilon, "Zero-prediction threshold, mm^2")
      ->capture_default_str();

  // --- fit ------------------------------------------------------------------
  std::string fit_input, fit_out, fit_format = "auto", fit_nll_grid;
  double fit_epsilon = 10.0;
  int fit_bins = 0;
  int fit_grid_res = 25;
  std::vector<double> fit_grid_theta0, fit_grid_alpha;
  FitConfig fit_cfg;
  std::uint64_t fit_seed = 0;
  auto* fit = app.add_subcommand("fit", "Maximum-likelihood fit of all eight parameters");
  fit->add_option("--input", fit_input, "Dataset with ground truth")->required();
  fit->add_option("--out", fit_out, "Output fit-report JSON")->required();
  fit->add_option("--format", fit_format, "Input format: csv|json|auto")->capture_default_str();
  fit->add_option("--epsilon", fit_epsilon, "Zero-prediction threshold, mm^2")
      ->capture_default_str();
  fit->add_option("--bins", fit_bins,
                  "Refit per equal-count predicted-volume bin (0 = single fit)")
      ->capture_default_str();
  fit->add_option("--nll-grid", fit_nll_grid, "Also write an SDE NLL grid CSV to this path");
  fit->add_option("--grid-res", fit_grid_res, "NLL grid resolution per axis")
      ->capture_default_str();
  fit->add_option("--grid-theta0", fit_grid_theta0, "NLL grid theta0 range: lo hi")
      ->expected(2);
  fit->add_option("--grid-alpha", fit_grid_alpha, "NLL grid alpha range: lo hi")->expected(2);
  fit->add_option("--xatol", fit_cfg.xatol, "Simplex diameter tolerance (log units)")
      ->capture_default_str();
  fit->add_option("--fatol", fit_cfg.fatol, "Simplex function-spread tolerance")
      ->capture_default_str();
  fit->add_option("--max-iters", fit_cfg.max_iters, "Simplex iteration cap")
      ->capture_default_str();
  fit->add_option("--moment-steps", fit_cfg.moment_steps, "RK4 sub-steps per slice interval")
      ->capture_default_str();
  fit->add_option("--delta-max", fit_cfg.delta_max, "Upper bound for the bridge length")
      ->capture_default_str();
  fit->add_option("--threads", fit_cfg.threads, "Worker threads (0 = hardware)")
      ->capture_default_str();
  fit->add_option("--seed", fit_seed, "Unused; accepted for interface uniformity")
      ->capture_default_str();

  // --- simulate -------------------------------------------------------------
  std::string sim_input, sim_params, sim_out, sim_format = "auto", sim_out_format = "auto";
  double sim_epsilon = 10.0, sim_dt = 0.01;
  int sim_n = 1000, sim_threads = 1;
  std::uint64_t sim_seed = 0;
  bool sim_emit_draws = false;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo volume distributions per heart");
  sim->add_option("--input", sim_input, "Input dataset")->required();
  sim->add_option("--params", sim_params, "Fitted parameters JSON")->required();
  sim->add_option("--out", sim_out, "Output distributions file")->required();
  sim->add_option("--format", sim_format, "Input format: csv|json|auto")->capture_default_str();
  sim->add_option("--out-format", sim_out_format, "Output format: csv|json|auto")
      ->capture_default_str();
  sim->add_option("--epsilon", sim_epsilon, "Zero-prediction threshold, mm^2")
      ->capture_default_str();
  sim->add_option("--n-sims", sim_n, "Draws per heart")->capture_default_str();
  sim->add_option("--dt", sim_dt, "SDE step size, slice units")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Global random seed")->required();
  sim->add_option("--threads", sim_threads, "Worker threads (0 = hardware)")
      ->capture_default_str();
  sim->add_flag("--emit-draws", sim_emit_draws, "Include raw draws in JSON output");

  // --- evaluate ---------------------------------------------------------------
  std::string eval_input, eval_params, eval_out, eval_format = "auto";
  double eval_epsilon = 10.0, eval_dt = 0.01;
  int eval_n = 1000, eval_threads = 1, eval_hist_bins = 60;
  std::uint64_t eval_seed = 0;
  std::vector<std::string> eval_stability_tokens;
  auto* eval = app.add_subcommand("evaluate", "Score distributions against ground truth");
  eval->add_option("--input", eval_input, "Dataset with ground truth")->required();
  eval->add_option("--params", eval_params, "Fitted parameters JSON")->required();
  eval->add_option("--out", eval_out, "Output path prefix")->required();
  eval->add_option("--format", eval_format, "Input format: csv|json|auto")->capture_default_str();
  eval->add_option("--epsilon", eval_epsilon, "Zero-prediction threshold, mm^2")
      ->capture_default_str();
  eval->add_option("--n-sims", eval_n, "Draws per heart")->capture_default_str();
  eval->add_option("--dt", eval_dt, "SDE step size, slice units")->capture_default_str();
  eval->add_option("--seed", eval_seed, "Global random seed")->required();
  eval->add_option("--threads", eval_threads, "Worker threads (0 = hardware)")
      ->capture_default_str();
  eval->add_option("--hist-bins", eval_hist_bins, "Histogram bin count")->capture_default_str();
  eval->add_option("--stability", eval_stability_tokens,
                   "Subset-stability harness, e.g. --stability splits=3 repeats=3")
      ->expected(0, -1);

  // --- synth -------------------------------------------------------------------
  SynthConfig synth_cfg;
  synth_cfg.true_params.sde = {1.0, 25.0};
  synth_cfg.true_params.jump = {0.07, 0.054, 0.02, 0.05, 0.5};
  synth_cfg.true_params.delta = 0.5;
  std::string synth_out, synth_out_format = "auto", synth_profile = "parabolic",
              synth_params_path;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from known parameters");
  synth->add_option("--out", synth_out, "Output dataset path")->required();
  synth->add_option("--format", synth_out_format, "Output format: csv|json|auto")
      ->capture_default_str();
  synth->add_option("--n-hearts", synth_cfg.n_hearts, "Number of hearts")->capture_default_str();
  synth->add_option("--slices-min", synth_cfg.slices_min, "Minimum slices per heart (>= 5)")
      ->capture_default_str();
  synth->add_option("--slices-max", synth_cfg.slices_max, "Maximum slices per heart")
      ->capture_default_str();
  synth->add_option("--peak-min", synth_cfg.peak_min, "Minimum peak area, mm^2")
      ->capture_default_str();
  synth->add_option("--peak-max", synth_cfg.peak_max, "Maximum peak area, mm^2")
      ->capture_default_str();
  synth->add_option("--profile", synth_profile, "Profile shape: parabolic|plateau")
      ->capture_default_str();
  synth->add_option("--spacing", synth_cfg.slice_spacing, "Slice spacing, mm")
      ->capture_default_str();
  synth->add_option("--theta0", synth_cfg.true_params.sde.theta0, "True theta0")
      ->capture_default_str();
  synth->add_option("--alpha", synth_cfg.true_params.sde.alpha, "True alpha, mm^2")
      ->capture_default_str();
  synth->add_option("--lambda-u", synth_cfg.true_params.jump.lambda_u, "True jump-up probability")
      ->capture_default_str();
  synth->add_option("--lambda-d", synth_cfg.true_params.jump.lambda_d,
                    "True jump-down probability")
      ->capture_default_str();
  synth->add_option("--beta-u0", synth_cfg.true_params.jump.beta_u0, "True beta_u0, 1/mm^2")
      ->capture_default_str();
  synth->add_option("--beta-u1", synth_cfg.true_params.jump.beta_u1, "True beta_u1, 1/mm^2")
      ->capture_default_str();
  synth->add_option("--beta-n", synth_cfg.true_params.jump.beta_n, "True beta_n, 1/mm^2")
      ->capture_default_str();
  synth->add_option("--delta", synth_cfg.true_params.delta, "True bridge length, slice units")
      ->capture_default_str();
  synth->add_option("--true-params", synth_params_path,
                    "Read true parameters from a fit-report/params JSON (overrides flags)");
  synth->add_option("--seed", synth_seed, "Global random seed")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre) {
      const auto raw = load_dataset(pre_input, pick_format(pre_input, pre_format));
      const auto processed = preprocess_dataset(raw, pre_epsilon);
      save_dataset(pre_out, processed, pick_format(pre_out, pre_out_format));
      log_info("preprocessed " + std::to_string(processed.size()) + " hearts -> " + pre_out);
      return 0;
    }

    if (*fit) {
      const auto dataset = load_preprocessed(fit_input, fit_format, fit_epsilon);
      if (fit_bins > 0) {
        const auto bins = fit_binned(dataset, fit_bins, fit_cfg);
        write_binned_fits(fit_out, bins, fit_cfg);
        for (const auto& b : bins)
          if (!b.report.all_converged()) return kExitNoConvergence;
        return 0;
      }
      const FitReport report = fit_all(dataset, fit_cfg);
      write_fit_report(fit_out, report, fit_cfg);
      if (!fit_nll_grid.empty()) {
        const double t0 = report.params.sde.theta0;
        const double a0 = report.params.sde.alpha;
        const double t_lo = fit_grid_theta0.size() == 2 ? fit_grid_theta0[0] : t0 / 8.0;
        const double t_hi = fit_grid_theta0.size() == 2 ? fit_grid_theta0[1] : t0 * 8.0;
        const double a_lo = fit_grid_alpha.size() == 2 ? fit_grid_alpha[0] : a0 / 8.0;
        const double a_hi = fit_grid_alpha.size() == 2 ? fit_grid_alpha[1] : a0 * 8.0;
        write_nll_grid_csv(fit_nll_grid,
                           sde_nll_grid(dataset, t_lo, t_hi, a_lo, a_hi, fit_grid_res, fit_cfg));
      }
      return report.all_converged() ? 0 : kExitNoConvergence;
    }

    if (*sim) {
      const auto dataset = load_preprocessed(sim_input, sim_format, sim_epsilon);
      const ModelParams params = read_model_params(sim_params);
      validate_for_simulation(params);
      std::vector<VolumeDistribution> dists;
      std::vector<double> preds;
      dists.reserve(dataset.size());
      for (const auto& s : dataset) {
        dists.push_back(simulate_heart(s, params, sim_n, sim_dt, sim_seed, sim_threads));
        preds.push_back(point_prediction_ml(s));
      }
      if (pick_format(sim_out, sim_out_format) == DataFormat::csv)
        write_distributions_csv(sim_out, dists, preds);
      else
        write_distributions_json(sim_out, dists, preds, sim_emit_draws);
      return 0;
    }

    if (*eval) {
      const auto dataset = load_preprocessed(eval_input, eval_format, eval_epsilon);
      for (const auto& s : dataset)
        if (!s.has_truth())
          throw Error(Errc::schema_error,
                      "evaluate requires the truth_area_mm2 column; series '" + s.id +
                          "' has none");
      const ModelParams params = read_model_params(eval_params);
      validate_for_simulation(params);
      const std::string prefix = strip_suffix(eval_out, ".csv");

      const EvaluationTable table =
          evaluate(dataset, params, eval_n, eval_dt, eval_seed, eval_threads);
      write_evaluation_csv(prefix + ".csv", table);
      write_calibration_csv(prefix + "_calibration.csv", table);
      write_histogram_csv(prefix + "_error_hist_sim.csv",
                          histogram(table.sim_normalized_errors, eval_hist_bins));
      write_histogram_csv(prefix + "_error_hist_true.csv",
                          histogram(table.true_normalized_errors, eval_hist_bins));
      write_histogram_csv(prefix + "_edge_ratio_hist_sim.csv",
                          histogram(table.sim_edge_ratios, eval_hist_bins));
      write_histogram_csv(prefix + "_edge_ratio_hist_true.csv",
                          histogram(table.true_edge_ratios, eval_hist_bins));

      if (!eval_stability_tokens.empty() || eval->count("--stability") > 0) {
        const StabilityArgs st = parse_stability_tokens(eval_stability_tokens);
        FitConfig cfg;
        cfg.threads = eval_threads;
        write_stability_csv(prefix + "_stability.csv",
                            stability_analysis(dataset, st.splits, st.repeats, eval_seed, cfg));
      }
      return 0;
    }

    if (*synth) {
      if (synth_profile == "plateau")
        synth_cfg.profile = SynthConfig::Profile::plateau;
      else if (synth_profile != "parabolic")
        throw Error(Errc::parse_error, "unknown profile '" + synth_profile + "'");
      if (!synth_params_path.empty()) synth_cfg.true_params = read_model_params(synth_params_path);
      synth_cfg.seed = synth_seed;
      const auto dataset = generate(synth_cfg);
      save_dataset(synth_out, dataset, pick_format(synth_out, synth_out_format));
      log_info("generated " + std::to_string(dataset.size()) + " hearts -> " + synth_out);
      return 0;
    }
  } catch (const Error& e) {
    return data_error(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
