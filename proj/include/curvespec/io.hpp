#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "curvespec/contour.hpp"
#include "curvespec/errors.hpp"
#include "curvespec/estimator.hpp"
#include "curvespec/grid.hpp"
#include "curvespec/harness.hpp"
#include "curvespec/noise.hpp"
#include "curvespec/rng.hpp"
#include "curvespec/spectral.hpp"
#include "curvespec/templates.hpp"
#include "curvespec/vec2.hpp"

namespace curvespec {
namespace io {

using json = nlohmann::json;

// Every artifact carries this version string and a "kind" tag.
inline constexpr const char* kSchemaVersion = "curvespec/1";

namespace detail {

inline const json& require_field(const json& obj, const char* field,
                                 const std::string& where) {
  if (!obj.is_object())
    throw schema_error(where + ": expected a JSON object");
  const auto it = obj.find(field);
  if (it == obj.end())
    throw schema_error(where + ": missing field '" + field + "'");
  return *it;
}

inline double as_double(const json& v, const std::string& where) {
  if (!v.is_number())
    throw schema_error(where + ": expected a number");
  return v.get<double>();
}

inline int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer())
    throw schema_error(where + ": expected an integer");
  return v.get<int>();
}

inline std::uint64_t as_u64(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw schema_error(where + ": expected a non-negative integer");
  if (v.is_number_integer() && !v.is_number_unsigned() &&
      v.get<std::int64_t>() < 0)
    throw schema_error(where + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string())
    throw schema_error(where + ": expected a string");
  return v.get<std::string>();
}

inline const json& as_array(const json& v, const std::string& where) {
  if (!v.is_array())
    throw schema_error(where + ": expected an array");
  return v;
}

inline std::vector<double> double_vector(const json& v,
                                         const std::string& where) {
  std::vector<double> out;
  out.reserve(as_array(v, where).size());
  for (const json& e : v) out.push_back(as_double(e, where + " entry"));
  return out;
}

inline int opt_int(const json& obj, const char* field, int fallback,
                   const std::string& where) {
  if (!obj.is_object() || !obj.contains(field)) return fallback;
  return as_int(obj.at(field), where + ": " + field);
}

inline double opt_double(const json& obj, const char* field, double fallback,
                         const std::string& where) {
  if (!obj.is_object() || !obj.contains(field)) return fallback;
  return as_double(obj.at(field), where + ": " + field);
}

inline void check_version(const json& doc, const char* kind,
                          const std::string& where) {
  const std::string version =
      as_string(require_field(doc, "version", where), where + ": version");
  if (version != kSchemaVersion)
    throw schema_error(where + ": unsupported version '" + version +
                       "' (this reader understands " + kSchemaVersion + ")");
  const std::string k =
      as_string(require_field(doc, "kind", where), where + ": kind");
  if (k != kind)
    throw schema_error(where + ": expected kind '" + kind + "', found '" + k +
                       "'");
}

inline json header(const char* kind) {
  json doc;
  doc["version"] = kSchemaVersion;
  doc["kind"] = kind;
  return doc;
}

}  // namespace detail

inline json vec2_to_json(const Vec2& v) { return json::array({v.x, v.y}); }

inline Vec2 vec2_from_json(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2)
    throw schema_error(where + ": expected a point [x, y]");
  return {detail::as_double(v[0], where + ": x"),
          detail::as_double(v[1], where + ": y")};
}

inline json coeffs_to_json(const FourierCoeffs& c) {
  json mu = json::array();
  for (const Vec2& v : c.mu) mu.push_back(vec2_to_json(v));
  json nu = json::array();
  for (const Vec2& v : c.nu) nu.push_back(vec2_to_json(v));
  return json{{"mu", mu}, {"nu", nu}};
}

inline FourierCoeffs coeffs_from_json(const json& v,
                                      const std::string& where) {
  const json& mu = detail::as_array(
      detail::require_field(v, "mu", where), where + ": mu");
  const json& nu = detail::as_array(
      detail::require_field(v, "nu", where), where + ": nu");
  if (mu.size() != nu.size() + 1)
    throw schema_error(where +
                       ": need one more cosine than sine coefficient "
                       "(mu_0..mu_J and nu_1..nu_J)");
  FourierCoeffs c;
  c.mu.reserve(mu.size());
  c.nu.reserve(nu.size());
  for (const json& e : mu) c.mu.push_back(vec2_from_json(e, where + ": mu"));
  for (const json& e : nu) c.nu.push_back(vec2_from_json(e, where + ": nu"));
  return c;
}

inline json grid_to_json(const Grid& grid) {
  if (grid.standard) return json("standard-odd");
  return json(grid.theta);
}

inline Grid grid_from_json(const json& v, int n, const std::string& where) {
  if (v.is_string()) {
    if (v.get<std::string>() == "standard-odd") return make_grid(n);
    throw schema_error(where + ": unknown grid name '" +
                       v.get<std::string>() +
                       "' (expected \"standard-odd\" or an angle list)");
  }
  std::vector<double> thetas = detail::double_vector(v, where + ": grid");
  if (static_cast<int>(thetas.size()) != n)
    throw schema_error(where + ": grid lists " +
                       std::to_string(thetas.size()) + " angles but n = " +
                       std::to_string(n));
  return make_custom_grid(std::move(thetas));
}

// ---------------------------------------------------------------------------
// Contour files: {version, kind: "contours", n, grid, contours, labels?}

inline json contours_to_json(const ContourStack& stack) {
  json doc = detail::header("contours");
  doc["n"] = stack.grid().n();
  doc["grid"] = grid_to_json(stack.grid());
  json contours = json::array();
  for (const ContourSamples& contour : stack.contours) {
    json points = json::array();
    for (const Vec2& p : contour.points) points.push_back(vec2_to_json(p));
    contours.push_back(std::move(points));
  }
  doc["contours"] = std::move(contours);
  if (!stack.labels.empty()) doc["labels"] = stack.labels;
  return doc;
}

inline ContourStack contours_from_json(const json& doc) {
  const std::string where = "contour file";
  detail::check_version(doc, "contours", where);
  const int n =
      detail::as_int(detail::require_field(doc, "n", where), where + ": n");
  const Grid grid =
      grid_from_json(detail::require_field(doc, "grid", where), n, where);
  const json& contours = detail::as_array(
      detail::require_field(doc, "contours", where), where + ": contours");
  if (contours.empty())
    throw schema_error(where + ": need at least one contour");
  std::vector<ContourSamples> parsed;
  parsed.reserve(contours.size());
  for (std::size_t t = 0; t < contours.size(); ++t) {
    const std::string ctx = where + ": contour " + std::to_string(t);
    const json& pts = detail::as_array(contours[t], ctx);
    if (static_cast<int>(pts.size()) != n)
      throw schema_error(ctx + ": has " + std::to_string(pts.size()) +
                         " points, expected n = " + std::to_string(n));
    std::vector<Vec2> points;
    points.reserve(pts.size());
    for (const json& p : pts) points.push_back(vec2_from_json(p, ctx));
    parsed.push_back(make_contour_samples(grid, std::move(points)));
  }
  std::vector<std::string> labels;
  if (doc.contains("labels"))
    for (const json& l : detail::as_array(doc.at("labels"), where + ": labels"))
      labels.push_back(detail::as_string(l, where + ": labels entry"));
  return make_contour_stack(std::move(parsed), std::move(labels));
}

// ---------------------------------------------------------------------------
// Noise spectra and truth curves inside configs and sidecars.

inline json spectrum_to_json(const NoiseSpectrum& spec) {
  return json{{"variances", spec.sigma2}};
}

inline NoiseSpectrum spectrum_from_json(const json& v,
                                        const std::string& where) {
  if (v.is_object() && v.contains("variances"))
    return make_noise_spectrum(detail::double_vector(
        v.at("variances"), where + ": variances"));
  if (v.is_object() && v.contains("model")) {
    const std::string model =
        detail::as_string(v.at("model"), where + ": model");
    if (model == "p-order")
      return p_order_spectrum(
          detail::as_double(detail::require_field(v, "alpha", where),
                            where + ": alpha"),
          detail::as_double(detail::require_field(v, "beta", where),
                            where + ": beta"),
          detail::as_double(detail::require_field(v, "p", where),
                            where + ": p"),
          detail::as_int(detail::require_field(v, "max_order", where),
                         where + ": max_order"));
    throw schema_error(where + ": unknown noise model '" + model +
                       "' (expected \"p-order\")");
  }
  throw schema_error(where +
                     ": noise needs either {\"variances\": [...]} or "
                     "{\"model\": \"p-order\", ...}");
}

inline FourierCoeffs curve_from_json(const json& v, const std::string& where) {
  if (v.is_object() && v.contains("template")) {
    const std::string name =
        detail::as_string(v.at("template"), where + ": template");
    const Vec2 center = v.contains("center")
                            ? vec2_from_json(v.at("center"), where + ": center")
                            : Vec2{};
    if (name == "circle")
      return circle_coeffs(
          detail::opt_double(v, "radius", 1.0, where), center);
    if (name == "ellipse") {
      if (v.contains("axes")) {
        const json& axes = detail::as_array(v.at("axes"), where + ": axes");
        if (axes.size() != 2)
          throw schema_error(where + ": axes must be [rx, ry]");
        return ellipse_coeffs(detail::as_double(axes[0], where + ": axes"),
                              detail::as_double(axes[1], where + ": axes"),
                              center);
      }
      return ellipse_coeffs(1.5, 1.0, center);
    }
    if (name == "three-lobe")
      return three_lobe_coeffs(detail::opt_double(v, "epsilon", 0.3, where));
    if (name == "five-lobe")
      return five_lobe_coeffs(detail::opt_double(v, "epsilon", 0.2, where));
    throw schema_error(where + ": unknown template '" + name +
                       "' (expected circle, ellipse, three-lobe or "
                       "five-lobe)");
  }
  return coeffs_from_json(v, where);
}

// ---------------------------------------------------------------------------
// Truth sidecar: the exact coefficients, spectrum and seed behind a
// simulated contour file, plus the applied misalignment when there was one.

struct TruthDocument {
  FourierCoeffs coeffs;
  NoiseSpectrum spectrum;
  std::uint64_t seed = 0;
  std::string generator = kGeneratorName;
  std::vector<double> true_alphas;
  std::vector<std::vector<double>> true_weights;
};

inline json truth_to_json(const TruthDocument& truth) {
  json doc = detail::header("truth");
  doc["coefficients"] = coeffs_to_json(truth.coeffs);
  doc["spectrum"] = spectrum_to_json(truth.spectrum);
  doc["seed"] = truth.seed;
  doc["generator"] = truth.generator;
  if (!truth.true_alphas.empty()) {
    doc["alphas"] = truth.true_alphas;
    doc["weights"] = truth.true_weights;
  }
  return doc;
}

inline TruthDocument truth_from_json(const json& doc) {
  const std::string where = "truth file";
  detail::check_version(doc, "truth", where);
  TruthDocument truth;
  truth.coeffs = coeffs_from_json(
      detail::require_field(doc, "coefficients", where), where);
  truth.spectrum = spectrum_from_json(
      detail::require_field(doc, "spectrum", where), where + ": spectrum");
  truth.seed = detail::as_u64(detail::require_field(doc, "seed", where),
                              where + ": seed");
  truth.generator = detail::as_string(
      detail::require_field(doc, "generator", where), where + ": generator");
  if (doc.contains("alphas")) {
    truth.true_alphas =
        detail::double_vector(doc.at("alphas"), where + ": alphas");
    for (const json& row : detail::as_array(
             detail::require_field(doc, "weights", where), where + ": weights"))
      truth.true_weights.push_back(
          detail::double_vector(row, where + ": weights row"));
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Fit files: the complete estimator state so downstream evaluation can be
// recomputed from the artifact alone.

inline json fit_to_json(const MleFit& fit) {
  json doc = detail::header("fit");
  doc["n"] = fit.grid.n();
  doc["grid"] = grid_to_json(fit.grid);
  doc["T"] = fit.T;
  doc["mean"] = coeffs_to_json(fit.mean_coeffs);
  if (fit.noise_var)
    doc["noise_variances"] = *fit.noise_var;
  else
    doc["noise_variances"] = nullptr;
  json per_contour = json::array();
  for (const FourierCoeffs& c : fit.per_contour)
    per_contour.push_back(coeffs_to_json(c));
  doc["per_contour"] = std::move(per_contour);
  return doc;
}

inline MleFit fit_from_json(const json& doc) {
  const std::string where = "fit file";
  detail::check_version(doc, "fit", where);
  MleFit fit;
  const int n =
      detail::as_int(detail::require_field(doc, "n", where), where + ": n");
  fit.grid =
      grid_from_json(detail::require_field(doc, "grid", where), n, where);
  fit.T = detail::as_int(detail::require_field(doc, "T", where),
                         where + ": T");
  fit.mean_coeffs =
      coeffs_from_json(detail::require_field(doc, "mean", where), where);
  const json& variances = detail::require_field(doc, "noise_variances", where);
  if (!variances.is_null())
    fit.noise_var =
        detail::double_vector(variances, where + ": noise_variances");
  for (const json& c : detail::as_array(
           detail::require_field(doc, "per_contour", where),
           where + ": per_contour"))
    fit.per_contour.push_back(coeffs_from_json(c, where + ": per_contour"));
  return fit;
}

// ---------------------------------------------------------------------------
// Alignment result files.

struct AlignmentDocument {
  int J = 0;
  int m = 0;
  std::vector<double> alphas;
  std::vector<std::vector<double>> weights;
  double m_value = 0.0;
  double avg_error = 0.0;
  std::vector<double> trace;
  int iterations = 0;
  std::string status;
};

inline json alignment_to_json(const AlignmentDocument& doc_in) {
  json doc = detail::header("alignment");
  doc["J"] = doc_in.J;
  doc["m"] = doc_in.m;
  doc["alphas"] = doc_in.alphas;
  doc["weights"] = doc_in.weights;
  doc["M"] = doc_in.m_value;
  doc["average_error"] = doc_in.avg_error;
  doc["trace"] = doc_in.trace;
  doc["iterations"] = doc_in.iterations;
  doc["status"] = doc_in.status;
  return doc;
}

inline AlignmentDocument alignment_from_json(const json& doc) {
  const std::string where = "alignment file";
  detail::check_version(doc, "alignment", where);
  AlignmentDocument out;
  out.J = detail::as_int(detail::require_field(doc, "J", where),
                         where + ": J");
  out.m = detail::as_int(detail::require_field(doc, "m", where),
                         where + ": m");
  out.alphas = detail::double_vector(
      detail::require_field(doc, "alphas", where), where + ": alphas");
  for (const json& row : detail::as_array(
           detail::require_field(doc, "weights", where), where + ": weights"))
    out.weights.push_back(
        detail::double_vector(row, where + ": weights row"));
  out.m_value = detail::as_double(detail::require_field(doc, "M", where),
                                  where + ": M");
  out.avg_error =
      detail::as_double(detail::require_field(doc, "average_error", where),
                        where + ": average_error");
  out.trace = detail::double_vector(
      detail::require_field(doc, "trace", where), where + ": trace");
  out.iterations =
      detail::as_int(detail::require_field(doc, "iterations", where),
                     where + ": iterations");
  out.status = detail::as_string(
      detail::require_field(doc, "status", where), where + ": status");
  return out;
}

// ---------------------------------------------------------------------------
// Error-budget files.

struct BudgetDocument {
  IseBudget budget;
  double realized = 0.0;
  double expected = 0.0;
};

inline json budget_to_json(const BudgetDocument& doc_in) {
  json doc = detail::header("budget");
  doc["tail_bias"] = doc_in.budget.tail_bias;
  doc["variance_term"] = doc_in.budget.variance_term;
  doc["offsets_c"] = doc_in.budget.offsets_c;
  doc["sigma2_n"] = doc_in.budget.sigma2_n;
  doc["total"] = doc_in.budget.total();
  doc["realized"] = doc_in.realized;
  doc["expected"] = doc_in.expected;
  return doc;
}

inline BudgetDocument budget_from_json(const json& doc) {
  const std::string where = "budget file";
  detail::check_version(doc, "budget", where);
  BudgetDocument out;
  out.budget.tail_bias =
      detail::as_double(detail::require_field(doc, "tail_bias", where),
                        where + ": tail_bias");
  out.budget.variance_term =
      detail::as_double(detail::require_field(doc, "variance_term", where),
                        where + ": variance_term");
  out.budget.offsets_c = detail::double_vector(
      detail::require_field(doc, "offsets_c", where), where + ": offsets_c");
  out.budget.sigma2_n = detail::double_vector(
      detail::require_field(doc, "sigma2_n", where), where + ": sigma2_n");
  out.realized = detail::as_double(
      detail::require_field(doc, "realized", where), where + ": realized");
  out.expected = detail::as_double(
      detail::require_field(doc, "expected", where), where + ": expected");
  return out;
}

// ---------------------------------------------------------------------------
// Experiment configs.

inline json config_to_json(const ExperimentConfig& cfg) {
  json doc = detail::header("experiment-config");
  doc["truth"] = coeffs_to_json(cfg.truth);
  doc["noise"] = spectrum_to_json(cfg.noise);
  doc["n"] = cfg.n;
  doc["J"] = cfg.J;
  doc["T"] = cfg.T;
  doc["replications"] = cfg.replications;
  doc["seed"] = cfg.seed;
  if (cfg.misalignment) {
    doc["misalignment"] = json{{"alpha_max", cfg.misalignment->alpha_max},
                               {"w_max", cfg.misalignment->w_max},
                               {"m", cfg.misalignment->m}};
  }
  return doc;
}

inline ExperimentConfig config_from_json(const json& doc) {
  const std::string where = "experiment config";
  detail::check_version(doc, "experiment-config", where);
  ExperimentConfig cfg;
  cfg.truth = curve_from_json(detail::require_field(doc, "truth", where),
                              where + ": truth");
  cfg.noise = spectrum_from_json(detail::require_field(doc, "noise", where),
                                 where + ": noise");
  cfg.n = detail::as_int(detail::require_field(doc, "n", where),
                         where + ": n");
  cfg.J = detail::as_int(detail::require_field(doc, "J", where),
                         where + ": J");
  cfg.T = detail::as_int(detail::require_field(doc, "T", where),
                         where + ": T");
  cfg.replications = detail::opt_int(doc, "replications", 1, where);
  cfg.seed = doc.contains("seed")
                 ? detail::as_u64(doc.at("seed"), where + ": seed")
                 : 0;
  if (doc.contains("misalignment")) {
    const json& mis = doc.at("misalignment");
    MisalignmentSpec spec;
    spec.alpha_max =
        detail::opt_double(mis, "alpha_max", 0.0, where + ": misalignment");
    spec.w_max =
        detail::opt_double(mis, "w_max", 0.0, where + ": misalignment");
    spec.m = detail::opt_int(mis, "m", 0, where + ": misalignment");
    cfg.misalignment = spec;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Experiment reports.  The wall-clock runtime is intentionally absent:
// identical config and seed must reproduce the file byte for byte.

inline json report_to_json(const ExperimentReport& report) {
  json doc = detail::header("report");
  doc["experiment"] = report.kind;
  doc["n"] = report.n;
  doc["J"] = report.J;
  doc["T"] = report.T;
  doc["replications"] = report.replications;
  doc["seed"] = report.seed;
  doc["generator"] = report.generator;
  doc["notes"] = report.notes;
  doc["ise"] = report.ise;
  doc["sigma2_hat"] = report.sigma2_hat;
  doc["sigma2_true"] = report.sigma2_true;
  doc["expected"] = report.expected;
  doc["mean_ise"] = report.mean_ise;
  doc["sigma2_hat_mean"] = report.sigma2_hat_mean;
  doc["pivot_mean"] = report.pivot_mean;
  doc["pivot_variance"] = report.pivot_variance;
  doc["m_initial"] = report.m_initial;
  doc["m_final"] = report.m_final;
  doc["shift_error"] = report.shift_error;
  doc["mean_m_ratio"] = report.mean_m_ratio;
  return doc;
}

inline ExperimentReport report_from_json(const json& doc) {
  const std::string where = "report file";
  detail::check_version(doc, "report", where);
  ExperimentReport report;
  report.kind = detail::as_string(
      detail::require_field(doc, "experiment", where), where + ": experiment");
  report.n = detail::as_int(detail::require_field(doc, "n", where),
                            where + ": n");
  report.J = detail::as_int(detail::require_field(doc, "J", where),
                            where + ": J");
  report.T = detail::as_int(detail::require_field(doc, "T", where),
                            where + ": T");
  report.replications =
      detail::as_int(detail::require_field(doc, "replications", where),
                     where + ": replications");
  report.seed = detail::as_u64(detail::require_field(doc, "seed", where),
                               where + ": seed");
  report.generator = detail::as_string(
      detail::require_field(doc, "generator", where), where + ": generator");
  for (const json& n : detail::as_array(
           detail::require_field(doc, "notes", where), where + ": notes"))
    report.notes.push_back(detail::as_string(n, where + ": notes entry"));
  report.ise = detail::double_vector(detail::require_field(doc, "ise", where),
                                     where + ": ise");
  for (const json& row : detail::as_array(
           detail::require_field(doc, "sigma2_hat", where),
           where + ": sigma2_hat"))
    report.sigma2_hat.push_back(
        detail::double_vector(row, where + ": sigma2_hat row"));
  report.sigma2_true = detail::double_vector(
      detail::require_field(doc, "sigma2_true", where),
      where + ": sigma2_true");
  report.expected = detail::as_double(
      detail::require_field(doc, "expected", where), where + ": expected");
  report.mean_ise = detail::as_double(
      detail::require_field(doc, "mean_ise", where), where + ": mean_ise");
  report.sigma2_hat_mean = detail::double_vector(
      detail::require_field(doc, "sigma2_hat_mean", where),
      where + ": sigma2_hat_mean");
  report.pivot_mean = detail::double_vector(
      detail::require_field(doc, "pivot_mean", where), where + ": pivot_mean");
  report.pivot_variance = detail::double_vector(
      detail::require_field(doc, "pivot_variance", where),
      where + ": pivot_variance");
  report.m_initial = detail::double_vector(
      detail::require_field(doc, "m_initial", where), where + ": m_initial");
  report.m_final = detail::double_vector(
      detail::require_field(doc, "m_final", where), where + ": m_final");
  report.shift_error = detail::double_vector(
      detail::require_field(doc, "shift_error", where),
      where + ": shift_error");
  report.mean_m_ratio =
      detail::as_double(detail::require_field(doc, "mean_m_ratio", where),
                        where + ": mean_m_ratio");
  return report;
}

// ---------------------------------------------------------------------------
// CSV: 17 significant digits so every double round-trips exactly.

namespace detail {

inline std::string fmt17(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

inline double parse_double(const std::string& text, std::size_t line,
                           const std::string& where) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + text.size())
    throw schema_error(where + ", line " + std::to_string(line) +
                       ": cannot parse number '" + text + "'");
  return v;
}

}  // namespace detail

// Plain two-column x,y rows, one contour per block, blank line between
// blocks.  The grid is implied: block length n on the standard odd grid.
inline std::string contours_to_csv(const ContourStack& stack) {
  std::string out;
  for (std::size_t t = 0; t < stack.contours.size(); ++t) {
    if (t > 0) out += "\n";
    for (const Vec2& p : stack.contours[t].points)
      out += detail::fmt17(p.x) + "," + detail::fmt17(p.y) + "\n";
  }
  return out;
}

inline ContourStack contours_from_csv(const std::string& text) {
  const std::string where = "contour csv";
  std::vector<std::vector<Vec2>> blocks;
  std::vector<Vec2> current;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    if (line.empty()) {
      if (!current.empty()) {
        blocks.push_back(std::move(current));
        current.clear();
      }
    } else {
      const std::size_t comma = line.find(',');
      if (comma == std::string::npos)
        throw schema_error(where + ", line " + std::to_string(line_no) +
                           ": expected 'x,y'");
      current.push_back(
          {detail::parse_double(line.substr(0, comma), line_no, where),
           detail::parse_double(line.substr(comma + 1), line_no, where)});
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  if (blocks.empty())
    throw schema_error(where + ": no contours found");
  const std::size_t n = blocks.front().size();
  for (std::size_t t = 1; t < blocks.size(); ++t)
    if (blocks[t].size() != n)
      throw schema_error(where + ": contour " + std::to_string(t) + " has " +
                         std::to_string(blocks[t].size()) +
                         " points, expected " + std::to_string(n));
  const Grid grid = make_grid(static_cast<int>(n));
  std::vector<ContourSamples> contours;
  contours.reserve(blocks.size());
  for (std::vector<Vec2>& block : blocks)
    contours.push_back(make_contour_samples(grid, std::move(block)));
  return make_contour_stack(std::move(contours));
}

// Curve table for plotting: the estimate sampled at `samples` uniform
// angles, with the truth alongside when available.
inline std::string curve_table_csv(const FourierCoeffs& estimate,
                                   const FourierCoeffs* truth = nullptr,
                                   int samples = 512) {
  std::string out = truth ? "theta,x,y,x_true,y_true\n" : "theta,x,y\n";
  for (int i = 0; i < samples; ++i) {
    const double theta = -kPi + kTwoPi * i / samples;
    const Vec2 p = synthesize(estimate, theta);
    out += detail::fmt17(theta) + "," + detail::fmt17(p.x) + "," +
           detail::fmt17(p.y);
    if (truth) {
      const Vec2 q = synthesize(*truth, theta);
      out += "," + detail::fmt17(q.x) + "," + detail::fmt17(q.y);
    }
    out += "\n";
  }
  return out;
}

// Flat (series, x, y) rows covering every per-replication and per-frequency
// series in the report, for plotting without JSON tooling.
inline std::string report_csv(const ExperimentReport& report) {
  std::string out = "series,x,y\n";
  auto emit = [&out](const char* series, double x, double y) {
    out += std::string(series) + "," + detail::fmt17(x) + "," +
           detail::fmt17(y) + "\n";
  };
  for (std::size_t r = 0; r < report.ise.size(); ++r)
    emit("ise", static_cast<double>(r), report.ise[r]);
  for (std::size_t j = 0; j < report.sigma2_true.size(); ++j)
    emit("sigma2-true", static_cast<double>(j), report.sigma2_true[j]);
  for (std::size_t j = 0; j < report.sigma2_hat_mean.size(); ++j)
    emit("sigma2-hat-mean", static_cast<double>(j),
         report.sigma2_hat_mean[j]);
  for (std::size_t i = 0; i < report.pivot_mean.size(); ++i)
    emit("pivot-mean", static_cast<double>(i + 1), report.pivot_mean[i]);
  for (std::size_t i = 0; i < report.pivot_variance.size(); ++i)
    emit("pivot-variance", static_cast<double>(i + 1),
         report.pivot_variance[i]);
  for (std::size_t r = 0; r < report.m_initial.size(); ++r)
    emit("m-initial", static_cast<double>(r), report.m_initial[r]);
  for (std::size_t r = 0; r < report.m_final.size(); ++r)
    emit("m-final", static_cast<double>(r), report.m_final[r]);
  for (std::size_t r = 0; r < report.shift_error.size(); ++r)
    emit("shift-error", static_cast<double>(r), report.shift_error[r]);
  return out;
}

// ---------------------------------------------------------------------------
// Files.

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw schema_error("cannot open file: " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad())
    throw schema_error("cannot read file: " + path);
  return content;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw schema_error("cannot write file: " + path);
  out << content;
  out.flush();
  if (!out)
    throw schema_error("cannot write file: " + path);
}

inline json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw schema_error(where + ": " + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  return parse_json(read_text_file(path), path);
}

inline void write_json_file(const std::string& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace io
}  // namespace curvespec
