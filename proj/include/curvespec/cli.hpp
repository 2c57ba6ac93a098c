#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "curvespec/align.hpp"
#include "curvespec/errors.hpp"
#include "curvespec/estimator.hpp"
#include "curvespec/harness.hpp"
#include "curvespec/io.hpp"
#include "curvespec/svg.hpp"

namespace curvespec {
namespace cli {

namespace detail {

// Sibling artifact path: fit.json -> fit<suffix>, otherwise append.
inline std::string derive_path(const std::string& base,
                               const std::string& suffix) {
  const std::string ext = ".json";
  if (base.size() > ext.size() &&
      base.compare(base.size() - ext.size(), ext.size(), ext) == 0)
    return base.substr(0, base.size() - ext.size()) + suffix;
  return base + suffix;
}

// The stable exit-code contract: 0 success, 1 usage or schema problems,
// 2 numeric failures (and anything unexpected, which is treated as one).
inline int exit_code_for(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const schema_error& e) {
    std::cerr << "curvespec: error: " << e.what() << '\n';
    return 1;
  } catch (const numeric_error& e) {
    std::cerr << "curvespec: error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "curvespec: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "curvespec: error: " << e.what() << '\n';
    return 2;
  } catch (...) {
    std::cerr << "curvespec: error: unknown failure\n";
    return 2;
  }
}

inline bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() &&
         s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

inline std::vector<Vec2> closed_polyline(const FourierCoeffs& coeffs,
                                         int samples = 512) {
  std::vector<Vec2> points;
  points.reserve(static_cast<std::size_t>(samples) + 1);
  for (int i = 0; i <= samples; ++i)
    points.push_back(synthesize(coeffs, -kPi + kTwoPi * i / samples));
  return points;
}

}  // namespace detail

// Contour ingestion by extension: .csv reads the two-column blank-line
// separated format, anything else is parsed as a contour JSON document.
inline ContourStack read_contours(const std::string& path) {
  if (detail::ends_with(path, ".csv"))
    return io::contours_from_csv(io::read_text_file(path));
  return io::contours_from_json(io::read_json_file(path));
}

// ---------------------------------------------------------------------------
// simulate: config -> contour file + truth sidecar.

struct SimulateArgs {
  std::string config_path;
  std::string out_path;
  std::string truth_out;
  std::optional<std::uint64_t> seed;
};

inline void cmd_simulate(const SimulateArgs& args) {
  ExperimentConfig cfg =
      io::config_from_json(io::read_json_file(args.config_path));
  if (args.seed) cfg.seed = *args.seed;
  validate_config(cfg);

  // The emitted stack is replication 0 of the config's experiment, so a
  // later experiment run over the same config reproduces this exact data.
  const SimulatedStack sim = simulate_stack(cfg, derive_seed(cfg.seed, 1));
  io::write_json_file(args.out_path, io::contours_to_json(sim.stack));

  io::TruthDocument truth;
  truth.coeffs = cfg.truth;
  truth.spectrum = cfg.noise;
  truth.seed = cfg.seed;
  truth.true_alphas = sim.true_alphas;
  truth.true_weights = sim.true_weights;
  const std::string truth_path =
      args.truth_out.empty()
          ? detail::derive_path(args.out_path, ".truth.json")
          : args.truth_out;
  io::write_json_file(truth_path, io::truth_to_json(truth));
}

// ---------------------------------------------------------------------------
// estimate: contours -> fit JSON + curve CSV + optional SVG overlay.

struct EstimateArgs {
  std::string in_path;
  int J = 0;
  std::string out_path;
  std::string curve_out;
  std::string truth_path;
  std::string svg_path;
  bool require_variances = false;
};

inline void cmd_estimate(const EstimateArgs& args) {
  const ContourStack stack = read_contours(args.in_path);
  const MleFit mle = fit(stack, args.J);
  if (args.require_variances)
    mle.variances();  // throws the explicit insufficient-replicates message
  io::write_json_file(args.out_path, io::fit_to_json(mle));

  std::optional<io::TruthDocument> truth;
  if (!args.truth_path.empty())
    truth = io::truth_from_json(io::read_json_file(args.truth_path));

  const std::string curve_path =
      args.curve_out.empty()
          ? detail::derive_path(args.out_path, ".curve.csv")
          : args.curve_out;
  io::write_text_file(
      curve_path,
      io::curve_table_csv(mle.mean_coeffs, truth ? &truth->coeffs : nullptr));

  if (!args.svg_path.empty()) {
    SvgPlot plot(560, 560, truth ? "estimate (solid) vs truth (dashed)"
                                 : "estimated curve");
    if (truth)
      plot.line(detail::closed_polyline(truth->coeffs), "#999999", 1.5, true);
    plot.line(detail::closed_polyline(mle.mean_coeffs), "#000000", 1.8);
    io::write_text_file(args.svg_path, plot.render());
  }
}

// ---------------------------------------------------------------------------
// align: contours -> alignment result JSON + aligned contour file.

struct AlignArgs {
  std::string in_path;
  int J = 0;
  int m = 0;
  std::string mode = "w0-zero";
  std::string out_path;
  std::string aligned_out;
  bool grid_search = false;
  int max_iter = 500;
  double tol = 1e-6;
};

inline void cmd_align(const AlignArgs& args) {
  const ContourStack stack = read_contours(args.in_path);

  AlignmentOptions opts;
  if (args.mode == "w0-zero")
    opts.mode = ConstraintMode::PinFirstWeights;
  else if (args.mode == "mean-zero")
    opts.mode = ConstraintMode::ZeroMeanWeights;
  else
    throw schema_error("align: unknown mode '" + args.mode +
                       "' (expected w0-zero or mean-zero)");
  opts.max_iterations = args.max_iter;
  opts.tolerance = args.tol;
  opts.grid_search_shifts = args.grid_search;

  const AlignmentResult result = align(stack, args.J, args.m, opts);

  io::AlignmentDocument doc;
  doc.J = std::min(args.J, (stack.grid().n() - 1) / 2);
  doc.m = args.m;
  doc.alphas = result.params.alphas;
  doc.weights = result.params.weights;
  doc.m_value = result.objective;
  doc.avg_error = average_error(
      result.objective, static_cast<int>(stack.contours.size()),
      stack.grid().n());
  doc.trace = result.trace;
  doc.iterations = result.iterations;
  doc.status = result.status;
  io::write_json_file(args.out_path, io::alignment_to_json(doc));

  const std::string aligned_path =
      args.aligned_out.empty()
          ? detail::derive_path(args.out_path, ".aligned.json")
          : args.aligned_out;
  io::write_json_file(aligned_path, io::contours_to_json(result.aligned));
}

// ---------------------------------------------------------------------------
// evaluate: fit + truth sidecar -> error budget JSON.

struct EvaluateArgs {
  std::string fit_path;
  std::string truth_path;
  std::string out_path;  // empty -> stdout
};

inline void cmd_evaluate(const EvaluateArgs& args) {
  const MleFit mle = io::fit_from_json(io::read_json_file(args.fit_path));
  const io::TruthDocument truth =
      io::truth_from_json(io::read_json_file(args.truth_path));

  io::BudgetDocument doc;
  doc.budget = ise_budget(mle, truth.coeffs);
  const IseBudget offsets = discrete_offsets(
      [&](double theta) { return synthesize(truth.coeffs, theta); },
      truth.spectrum, mle.grid, mle.mean_coeffs.order());
  doc.budget.offsets_c = offsets.offsets_c;
  doc.budget.sigma2_n = offsets.sigma2_n;
  doc.realized = realized_ise(mle, truth.coeffs);
  doc.expected =
      expected_ise(truth.coeffs, truth.spectrum, mle.mean_coeffs.order(),
                   mle.T);

  if (args.out_path.empty())
    std::cout << io::budget_to_json(doc).dump(2) << std::endl;
  else
    io::write_json_file(args.out_path, io::budget_to_json(doc));
}

// ---------------------------------------------------------------------------
// experiment: config -> report JSON + CSV + optional SVG.

struct ExperimentArgs {
  std::string config_path;
  std::string out_path;
  std::string csv_out;
  std::string svg_path;
  std::optional<std::uint64_t> seed;
};

inline void cmd_experiment(const ExperimentArgs& args) {
  ExperimentConfig cfg =
      io::config_from_json(io::read_json_file(args.config_path));
  if (args.seed) cfg.seed = *args.seed;
  const ExperimentReport report = cfg.misalignment
                                      ? run_alignment_experiment(cfg)
                                      : run_estimation_experiment(cfg);
  io::write_json_file(args.out_path, io::report_to_json(report));

  const std::string csv_path =
      args.csv_out.empty() ? detail::derive_path(args.out_path, ".csv")
                           : args.csv_out;
  io::write_text_file(csv_path, io::report_csv(report));

  if (!args.svg_path.empty()) {
    if (report.kind == "estimation" && !report.sigma2_hat_mean.empty()) {
      SvgPlot plot(640, 480, "per-frequency variance: true (o), estimated (x)");
      std::vector<Vec2> truth_pts, hat_pts;
      for (std::size_t j = 0; j < report.sigma2_true.size(); ++j)
        truth_pts.push_back(
            {static_cast<double>(j), report.sigma2_true[j]});
      for (std::size_t j = 0; j < report.sigma2_hat_mean.size(); ++j)
        hat_pts.push_back(
            {static_cast<double>(j), report.sigma2_hat_mean[j]});
      plot.scatter(std::move(truth_pts), "#000000", "circle");
      plot.scatter(std::move(hat_pts), "#cc0000", "cross");
      io::write_text_file(args.svg_path, plot.render());
    } else {
      SvgPlot plot(640, 480, "objective: identity (o), aligned (x)");
      std::vector<Vec2> initial_pts, final_pts;
      for (std::size_t r = 0; r < report.m_initial.size(); ++r)
        initial_pts.push_back(
            {static_cast<double>(r), report.m_initial[r]});
      for (std::size_t r = 0; r < report.m_final.size(); ++r)
        final_pts.push_back({static_cast<double>(r), report.m_final[r]});
      plot.scatter(std::move(initial_pts), "#000000", "circle");
      plot.scatter(std::move(final_pts), "#cc0000", "cross");
      io::write_text_file(args.svg_path, plot.render());
    }
  }
}

// ---------------------------------------------------------------------------
// Argument parsing.  Args come in forward order without the program name.

inline int run(std::vector<std::string> args) {
  CLI::App app{
      "spectral mean estimation and alignment for closed planar curves "
      "sampled as point contours"};
  app.name("curvespec");
  app.require_subcommand(1);

  SimulateArgs sim_args;
  std::uint64_t sim_seed = 0;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "draw a contour stack from an experiment config");
  simulate->add_option("--config", sim_args.config_path,
                       "experiment config JSON")->required();
  simulate->add_option("--out", sim_args.out_path, "contour file to write")
      ->required();
  simulate->add_option("--truth-out", sim_args.truth_out,
                       "truth sidecar path (default: <out>.truth.json)");
  CLI::Option* sim_seed_opt =
      simulate->add_option("--seed", sim_seed, "override the config seed");
  simulate->callback([&] {
    if (sim_seed_opt->count() > 0) sim_args.seed = sim_seed;
    cmd_simulate(sim_args);
  });

  EstimateArgs est_args;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "fit the spectral mean of a contour stack");
  estimate->add_option("--in", est_args.in_path, "contour file (.json or .csv)")
      ->required();
  estimate->add_option("--J", est_args.J, "estimation order")->required();
  estimate->add_option("--out", est_args.out_path, "fit JSON to write")
      ->required();
  estimate->add_option("--curve-out", est_args.curve_out,
                       "curve samples CSV (default: <out>.curve.csv)");
  estimate->add_option("--truth", est_args.truth_path,
                       "truth sidecar to overlay");
  estimate->add_option("--svg", est_args.svg_path, "curve plot to write");
  estimate->add_flag("--variances", est_args.require_variances,
                     "fail unless noise variances are estimable "
                     "(needs at least two contours)");
  estimate->callback([&] { cmd_estimate(est_args); });

  AlignArgs align_args;
  CLI::App* align_cmd = app.add_subcommand(
      "align", "register a contour stack by shifts and reparametrisations");
  align_cmd->add_option("--in", align_args.in_path,
                        "contour file (.json or .csv)")->required();
  align_cmd->add_option("--J", align_args.J, "smoothing order")->required();
  align_cmd->add_option("--m", align_args.m,
                        "diffeomorphism basis size (2m weights per contour; "
                        "0 = shifts only)");
  align_cmd
      ->add_option("--mode", align_args.mode,
                   "redundancy constraint on the weights")
      ->check(CLI::IsMember({"w0-zero", "mean-zero"}));
  align_cmd->add_option("--out", align_args.out_path,
                        "alignment result JSON to write")->required();
  align_cmd->add_option("--aligned-out", align_args.aligned_out,
                        "aligned contour file (default: <out>.aligned.json)");
  align_cmd->add_flag("--grid-search-shifts", align_args.grid_search,
                      "coarse circular search over shifts before descent");
  align_cmd->add_option("--max-iter", align_args.max_iter,
                        "descent iteration budget");
  align_cmd->add_option("--tol", align_args.tol,
                        "gradient-norm convergence tolerance");
  align_cmd->callback([&] { cmd_align(align_args); });

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "error budget of a fit against the simulation truth");
  evaluate->add_option("--fit", eval_args.fit_path, "fit JSON")->required();
  evaluate->add_option("--truth", eval_args.truth_path, "truth sidecar JSON")
      ->required();
  evaluate->add_option("--out", eval_args.out_path,
                       "budget JSON to write (default: stdout)");
  evaluate->callback([&] { cmd_evaluate(eval_args); });

  ExperimentArgs exp_args;
  std::uint64_t exp_seed = 0;
  CLI::App* experiment = app.add_subcommand(
      "experiment", "run a replicated simulation study from a config");
  experiment->add_option("--config", exp_args.config_path,
                         "experiment config JSON")->required();
  experiment->add_option("--out", exp_args.out_path, "report JSON to write")
      ->required();
  experiment->add_option("--csv-out", exp_args.csv_out,
                         "report series CSV (default: <out>.csv)");
  experiment->add_option("--svg", exp_args.svg_path,
                         "summary scatter plot to write");
  CLI::Option* exp_seed_opt =
      experiment->add_option("--seed", exp_seed, "override the config seed");
  experiment->callback([&] {
    if (exp_seed_opt->count() > 0) exp_args.seed = exp_seed;
    cmd_experiment(exp_args);
  });

  try {
    std::reverse(args.begin(), args.end());  // CLI11 consumes reversed args
    app.parse(std::move(args));
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (...) {
    return detail::exit_code_for(std::current_exception());
  }
}

inline int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace cli
}  // namespace curvespec
