#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "curvespec/cli.hpp"
#include "curvespec/io.hpp"
#include "curvespec/templates.hpp"

using namespace curvespec;
using io::json;

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("curvespec-cli-" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string at(const std::string& name) {
  return (work_dir() / name).string();
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string tag = std::to_string(counter++);
  const std::string out_file = at("stdout-" + tag + ".txt");
  const std::string err_file = at("stderr-" + tag + ".txt");
  const std::string command = std::string(CURVESPEC_CLI_PATH) + " " + args +
                              " >" + out_file + " 2>" + err_file;
  const int raw = std::system(command.c_str());
  REQUIRE(raw != -1);
  CliResult result;
  if (WIFEXITED(raw)) result.code = WEXITSTATUS(raw);
  result.out = io::read_text_file(out_file);
  result.err = io::read_text_file(err_file);
  return result;
}

void write_config(const std::string& path, const ExperimentConfig& cfg) {
  io::write_json_file(path, io::config_to_json(cfg));
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.truth = circle_coeffs();
  cfg.noise = make_noise_spectrum({0.0});
  cfg.n = 31;
  cfg.J = 5;
  cfg.T = 2;
  cfg.seed = 5;
  return cfg;
}

// Contours sampled from shifted copies of a curve: contour t is the truth
// evaluated at theta + alphas[t].
ContourStack shifted_stack(const FourierCoeffs& truth, int n,
                           const std::vector<double>& alphas) {
  const Grid grid = make_grid(n);
  std::vector<ContourSamples> contours;
  for (double alpha : alphas) {
    std::vector<Vec2> points;
    for (double theta : grid.theta)
      points.push_back(synthesize(truth, theta + alpha));
    contours.push_back(make_contour_samples(grid, std::move(points)));
  }
  return make_contour_stack(std::move(contours));
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

}  // namespace

TEST_CASE("simulate writes contours on the truth curve when noise is zero") {
  write_config(at("sim-config.json"), small_config());
  const CliResult r = run_cli("simulate --config " + at("sim-config.json") +
                              " --out " + at("sim.json"));
  REQUIRE(r.code == 0);
  REQUIRE(r.err.empty());

  const ContourStack stack =
      io::contours_from_json(io::read_json_file(at("sim.json")));
  REQUIRE(stack.contours.size() == 3);
  REQUIRE(stack.grid().n() == 31);
  const FourierCoeffs circle = circle_coeffs();
  for (const ContourSamples& contour : stack.contours)
    for (std::size_t l = 0; l < contour.points.size(); ++l) {
      const Vec2 expect = synthesize(circle, stack.grid().theta[l]);
      REQUIRE(contour.points[l].x == expect.x);
      REQUIRE(contour.points[l].y == expect.y);
    }

  // The truth sidecar lands next to the contour file by default.
  const io::TruthDocument truth =
      io::truth_from_json(io::read_json_file(at("sim.truth.json")));
  REQUIRE(truth.coeffs.mu == circle.mu);
  REQUIRE(truth.seed == 5);
  REQUIRE(truth.true_alphas.empty());
}

TEST_CASE("simulate reruns are byte-identical and seeds change the draw") {
  ExperimentConfig cfg = small_config();
  cfg.noise = make_noise_spectrum({0.01, 0.01});
  write_config(at("det-config.json"), cfg);

  REQUIRE(run_cli("simulate --config " + at("det-config.json") + " --out " +
                  at("det-a.json")).code == 0);
  REQUIRE(run_cli("simulate --config " + at("det-config.json") + " --out " +
                  at("det-b.json")).code == 0);
  REQUIRE(io::read_text_file(at("det-a.json")) ==
          io::read_text_file(at("det-b.json")));
  REQUIRE(io::read_text_file(at("det-a.truth.json")) ==
          io::read_text_file(at("det-b.truth.json")));

  REQUIRE(run_cli("simulate --config " + at("det-config.json") +
                  " --seed 99 --out " + at("det-c.json")).code == 0);
  REQUIRE(io::read_text_file(at("det-a.json")) !=
          io::read_text_file(at("det-c.json")));
}

TEST_CASE("an even grid size in the config fails with the odd-grid rule") {
  json doc = io::config_to_json(small_config());
  doc["n"] = 4;
  io::write_json_file(at("even-config.json"), doc);
  const CliResult r = run_cli("simulate --config " + at("even-config.json") +
                              " --out " + at("even.json"));
  REQUIRE(r.code == 1);
  REQUIRE_THAT(r.err, Catch::Matchers::ContainsSubstring("curvespec: error:"));
  REQUIRE_THAT(r.err, Catch::Matchers::ContainsSubstring("odd"));
}

TEST_CASE("estimate writes the fit, the curve table and the plot") {
  ExperimentConfig cfg = small_config();
  cfg.truth = five_lobe_coeffs(0.2);
  cfg.J = 10;
  write_config(at("est-config.json"), cfg);
  REQUIRE(run_cli("simulate --config " + at("est-config.json") + " --out " +
                  at("est-sim.json")).code == 0);

  const CliResult r = run_cli(
      "estimate --in " + at("est-sim.json") + " --J 10 --out " +
      at("est-fit.json") + " --truth " + at("est-sim.truth.json") +
      " --svg " + at("est-fit.svg"));
  REQUIRE(r.code == 0);

  const json fit_doc = io::read_json_file(at("est-fit.json"));
  REQUIRE(fit_doc.at("T") == 2);
  REQUIRE(fit_doc.at("noise_variances").size() == 11);
  const MleFit mle = io::fit_from_json(fit_doc);
  // Zero noise and a band-limited truth: the mean recovers it exactly.
  REQUIRE(parseval_distance(mle.mean_coeffs, cfg.truth) < 1e-20);

  const std::string curve = io::read_text_file(at("est-fit.curve.csv"));
  REQUIRE(count_lines(curve) == 513);
  REQUIRE(curve.rfind("theta,x,y,x_true,y_true\n", 0) == 0);

  const std::string svg = io::read_text_file(at("est-fit.svg"));
  REQUIRE(svg.rfind("<svg", 0) == 0);
  REQUIRE_THAT(svg, Catch::Matchers::ContainsSubstring("</svg>"));
}

TEST_CASE("estimate fails cleanly on a missing input file") {
  const CliResult r = run_cli("estimate --in " + at("absent.json") +
                              " --J 3 --out " + at("unused.json"));
  REQUIRE(r.code == 1);
  REQUIRE_THAT(r.err,
               Catch::Matchers::ContainsSubstring("cannot open file"));
}

TEST_CASE("estimate with --variances demands replication") {
  const ContourStack lone = shifted_stack(three_lobe_coeffs(0.3), 31, {0.0});
  io::write_json_file(at("lone.json"), io::contours_to_json(lone));
  const CliResult r = run_cli("estimate --in " + at("lone.json") +
                              " --J 4 --variances --out " +
                              at("lone-fit.json"));
  REQUIRE(r.code == 1);
  REQUIRE_THAT(r.err,
               Catch::Matchers::ContainsSubstring("insufficient replicates"));
}

TEST_CASE("align recovers pure shifts end to end") {
  const std::vector<double> true_alphas = {0.0, 2.2, -1.1};
  const ContourStack stack =
      shifted_stack(three_lobe_coeffs(0.3), 73, true_alphas);
  io::write_json_file(at("shift.json"), io::contours_to_json(stack));

  const CliResult r = run_cli(
      "align --in " + at("shift.json") +
      " --J 20 --m 0 --grid-search-shifts --out " + at("shift-result.json") +
      " --aligned-out " + at("shift-aligned.json"));
  REQUIRE(r.code == 0);

  const io::AlignmentDocument doc =
      io::alignment_from_json(io::read_json_file(at("shift-result.json")));
  REQUIRE(doc.alphas.size() == 3);
  REQUIRE(doc.alphas[0] == 0.0);
  for (std::size_t t = 0; t < 3; ++t)
    REQUIRE(std::abs(wrap_angle(doc.alphas[t] + true_alphas[t])) < 0.01);
  REQUIRE(doc.trace.front() > 1.0);
  REQUIRE(doc.m_value < 1e-6 * doc.trace.front());
  REQUIRE(doc.avg_error == average_error(doc.m_value, 3, 73));
  REQUIRE((doc.status == "converged" || doc.status == "max-iterations"));

  const ContourStack aligned =
      io::contours_from_json(io::read_json_file(at("shift-aligned.json")));
  REQUIRE(aligned.contours.size() == 3);
  REQUIRE(aligned.grid().n() == 73);
  const FourierCoeffs truth = three_lobe_coeffs(0.3);
  for (const ContourSamples& contour : aligned.contours)
    for (std::size_t l = 0; l < contour.points.size(); ++l) {
      const Vec2 expect = synthesize(truth, aligned.grid().theta[l]);
      REQUIRE(contour.points[l].x == Catch::Approx(expect.x).margin(1e-4));
      REQUIRE(contour.points[l].y == Catch::Approx(expect.y).margin(1e-4));
    }
}

TEST_CASE("align accepts csv contours") {
  const ContourStack stack =
      shifted_stack(three_lobe_coeffs(0.3), 31, {0.0, 0.8});
  io::write_text_file(at("shift.csv"), io::contours_to_csv(stack));
  const CliResult r = run_cli("align --in " + at("shift.csv") +
                              " --J 8 --m 0 --grid-search-shifts --out " +
                              at("csv-result.json"));
  REQUIRE(r.code == 0);
  const io::AlignmentDocument doc =
      io::alignment_from_json(io::read_json_file(at("csv-result.json")));
  REQUIRE(doc.alphas.size() == 2);
  REQUIRE(std::abs(wrap_angle(doc.alphas[1] + 0.8)) < 0.01);
}

TEST_CASE("align rejects an unknown constraint mode") {
  const ContourStack stack =
      shifted_stack(three_lobe_coeffs(0.3), 31, {0.0, 0.5});
  io::write_json_file(at("mode.json"), io::contours_to_json(stack));
  const CliResult r = run_cli("align --in " + at("mode.json") +
                              " --J 8 --m 0 --mode bogus --out " +
                              at("mode-result.json"));
  REQUIRE(r.code == 1);
  REQUIRE_FALSE(r.err.empty());
}

TEST_CASE("evaluate matches an independent error recomputation") {
  ExperimentConfig cfg = small_config();
  cfg.truth = five_lobe_coeffs(0.2);
  cfg.noise = p_order_spectrum(1.0, 10.0, 2.0, 4);
  cfg.J = 4;
  cfg.T = 4;
  cfg.seed = 12;
  write_config(at("eval-config.json"), cfg);
  REQUIRE(run_cli("simulate --config " + at("eval-config.json") + " --out " +
                  at("eval-sim.json")).code == 0);
  REQUIRE(run_cli("estimate --in " + at("eval-sim.json") + " --J 4 --out " +
                  at("eval-fit.json")).code == 0);

  const CliResult r = run_cli("evaluate --fit " + at("eval-fit.json") +
                              " --truth " + at("eval-sim.truth.json") +
                              " --out " + at("eval-budget.json"));
  REQUIRE(r.code == 0);

  const io::BudgetDocument budget =
      io::budget_from_json(io::read_json_file(at("eval-budget.json")));
  // Truncating the five-lobe curve at order 4 leaves exactly the order-6
  // energy: 2 (eps/2)^2 = 0.02.
  REQUIRE(budget.budget.tail_bias == Catch::Approx(0.02).epsilon(1e-12));

  const MleFit mle = io::fit_from_json(io::read_json_file(at("eval-fit.json")));
  const io::TruthDocument truth =
      io::truth_from_json(io::read_json_file(at("eval-sim.truth.json")));
  REQUIRE(budget.realized ==
          Catch::Approx(realized_ise(mle, truth.coeffs)).margin(1e-15));
  // parseval_distance zero-pads to the longer list, so the truncated tail
  // is already inside the recomputation.
  REQUIRE(budget.realized ==
          Catch::Approx(parseval_distance(mle.mean_coeffs, truth.coeffs))
              .margin(1e-10));
  REQUIRE(budget.budget.total() ==
          budget.budget.tail_bias + budget.budget.variance_term);
  REQUIRE(budget.expected ==
          expected_ise(truth.coeffs, truth.spectrum, 4, mle.T));

  // Omitting --out prints the document to stdout.
  const CliResult printed = run_cli("evaluate --fit " + at("eval-fit.json") +
                                    " --truth " + at("eval-sim.truth.json"));
  REQUIRE(printed.code == 0);
  REQUIRE_THAT(printed.out,
               Catch::Matchers::ContainsSubstring("\"realized\""));
}

TEST_CASE("evaluate reports an all-zero budget when the fit is the truth") {
  ExperimentConfig cfg = small_config();
  cfg.truth = five_lobe_coeffs(0.2);
  cfg.J = 6;
  write_config(at("zero-config.json"), cfg);
  REQUIRE(run_cli("simulate --config " + at("zero-config.json") + " --out " +
                  at("zero-sim.json")).code == 0);
  REQUIRE(run_cli("estimate --in " + at("zero-sim.json") + " --J 6 --out " +
                  at("zero-fit.json")).code == 0);
  REQUIRE(run_cli("evaluate --fit " + at("zero-fit.json") + " --truth " +
                  at("zero-sim.truth.json") + " --out " +
                  at("zero-budget.json")).code == 0);

  const io::BudgetDocument budget =
      io::budget_from_json(io::read_json_file(at("zero-budget.json")));
  REQUIRE(budget.budget.tail_bias == 0.0);
  REQUIRE(budget.budget.variance_term < 1e-20);
  REQUIRE(budget.realized < 1e-20);
  REQUIRE(std::abs(budget.budget.total() - budget.realized) < 1e-10);
}

TEST_CASE("evaluate without a readable truth file fails") {
  const CliResult r = run_cli("evaluate --fit " + at("eval-fit.json") +
                              " --truth " + at("nowhere.json"));
  REQUIRE(r.code == 1);
  REQUIRE_THAT(r.err,
               Catch::Matchers::ContainsSubstring("cannot open file"));
}

TEST_CASE("experiment emits deterministic report, csv and plot") {
  ExperimentConfig cfg;
  cfg.truth = three_lobe_coeffs(0.3);
  cfg.noise = make_noise_spectrum({0.01, 0.01, 0.01});
  cfg.n = 11;
  cfg.J = 2;
  cfg.T = 2;
  cfg.replications = 3;
  cfg.seed = 21;
  write_config(at("exp-config.json"), cfg);

  const std::string args = "experiment --config " + at("exp-config.json") +
                           " --svg " + at("exp.svg") + " --out ";
  REQUIRE(run_cli(args + at("exp-a.json")).code == 0);
  REQUIRE(run_cli(args + at("exp-b.json")).code == 0);
  REQUIRE(io::read_text_file(at("exp-a.json")) ==
          io::read_text_file(at("exp-b.json")));
  REQUIRE(io::read_text_file(at("exp-a.csv")) ==
          io::read_text_file(at("exp-b.csv")));

  const ExperimentReport report =
      io::report_from_json(io::read_json_file(at("exp-a.json")));
  REQUIRE(report.kind == "estimation");
  REQUIRE(report.ise.size() == 3);
  REQUIRE(report.sigma2_hat.size() == 3);
  REQUIRE(io::read_text_file(at("exp.svg")).rfind("<svg", 0) == 0);

  cfg.misalignment = MisalignmentSpec{0.6, 0.0, 0};
  cfg.replications = 2;
  cfg.n = 31;
  cfg.J = 6;
  write_config(at("exp-align-config.json"), cfg);
  const std::string align_args = "experiment --config " +
                                 at("exp-align-config.json") + " --out ";
  REQUIRE(run_cli(align_args + at("exp-align-a.json")).code == 0);
  REQUIRE(run_cli(align_args + at("exp-align-b.json")).code == 0);
  REQUIRE(io::read_text_file(at("exp-align-a.json")) ==
          io::read_text_file(at("exp-align-b.json")));
  const ExperimentReport align_report =
      io::report_from_json(io::read_json_file(at("exp-align-a.json")));
  REQUIRE(align_report.kind == "alignment");
  REQUIRE(align_report.m_final.size() == 2);
}

TEST_CASE("exit codes follow the documented taxonomy") {
  std::ostringstream captured;
  std::streambuf* old = std::cerr.rdbuf(captured.rdbuf());
  auto code_of = [](auto&& error) {
    try {
      throw error;
    } catch (...) {
      return cli::detail::exit_code_for(std::current_exception());
    }
  };
  const int schema = code_of(schema_error("bad file"));
  const int numeric = code_of(numeric_error("bad flow"));
  const int invalid = code_of(std::invalid_argument("bad value"));
  const int other = code_of(std::runtime_error("surprise"));
  std::cerr.rdbuf(old);

  REQUIRE(schema == 1);
  REQUIRE(numeric == 2);
  REQUIRE(invalid == 1);
  REQUIRE(other == 2);
  REQUIRE_THAT(captured.str(),
               Catch::Matchers::ContainsSubstring("curvespec: error: bad file"));
}

TEST_CASE("usage errors exit with code one and help succeeds") {
  REQUIRE(run_cli("").code == 1);
  REQUIRE(run_cli("estimate").code == 1);
  REQUIRE(run_cli("transmogrify").code == 1);
  const CliResult help = run_cli("--help");
  REQUIRE(help.code == 0);
  REQUIRE_THAT(help.out, Catch::Matchers::ContainsSubstring("simulate"));
  REQUIRE_THAT(help.out, Catch::Matchers::ContainsSubstring("evaluate"));
}
