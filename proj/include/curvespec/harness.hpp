#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "curvespec/align.hpp"
#include "curvespec/contour.hpp"
#include "curvespec/diffeo.hpp"
#include "curvespec/errors.hpp"
#include "curvespec/estimator.hpp"
#include "curvespec/grid.hpp"
#include "curvespec/noise.hpp"
#include "curvespec/rng.hpp"
#include "curvespec/spectral.hpp"
#include "curvespec/vec2.hpp"

namespace curvespec {

// Ground-truth misalignment applied when simulating: per-contour root shifts
// drawn uniformly from [-alpha_max, alpha_max] and diffeomorphism weights
// drawn uniformly from [-w_max, w_max], contour 0 always left at the
// identity so recovered parameters are directly comparable.
struct MisalignmentSpec {
  double alpha_max = 0.0;
  double w_max = 0.0;
  int m = 0;
};

// One simulation study: truth curve, noise spectrum, grid size n, estimation
// order J, T+1 contours per stack, and the replication count.
struct ExperimentConfig {
  FourierCoeffs truth;
  NoiseSpectrum noise;
  int n = 0;
  int J = 0;
  int T = 0;
  int replications = 1;
  std::uint64_t seed = 0;
  std::optional<MisalignmentSpec> misalignment;
};

inline void validate_config(const ExperimentConfig& cfg) {
  make_grid(cfg.n);  // rejects even or too-small n with the odd-grid message
  if (cfg.J < 0 || cfg.J > (cfg.n - 1) / 2)
    throw std::invalid_argument(
        "experiment config: J must lie in 0..(n-1)/2 = 0.." +
        std::to_string((cfg.n - 1) / 2) + " (got " + std::to_string(cfg.J) +
        ")");
  if (cfg.T < 0)
    throw std::invalid_argument("experiment config: T must be >= 0");
  if (cfg.replications < 1)
    throw std::invalid_argument(
        "experiment config: replications must be >= 1");
  if (cfg.noise.max_order() < 0)
    throw std::invalid_argument("experiment config: noise spectrum is empty");
  if (cfg.misalignment) {
    const MisalignmentSpec& mis = *cfg.misalignment;
    if (mis.m < 0)
      throw std::invalid_argument("experiment config: misalignment m < 0");
    if (!(mis.alpha_max >= 0.0 && mis.alpha_max <= kPi))
      throw std::invalid_argument(
          "experiment config: alpha_max must lie in [0, pi]");
    if (!(mis.w_max >= 0.0))
      throw std::invalid_argument("experiment config: w_max must be >= 0");
    if (mis.w_max > 0.0 && mis.m == 0)
      throw std::invalid_argument(
          "experiment config: w_max > 0 needs m >= 1 basis functions");
  }
}

// One simulated stack plus the misalignment that was applied to it (empty
// vectors when the config has none).
struct SimulatedStack {
  ContourStack stack;
  std::vector<double> true_alphas;
  std::vector<std::vector<double>> true_weights;
};

namespace detail {

// Seed indices reserved per stack: 7 for the misalignment draw, 101 + t for
// contour t's noise.  Fixed so any consumer can regenerate a single contour.
inline constexpr std::uint64_t kMisalignmentSeedIndex = 7;
inline constexpr std::uint64_t kContourSeedBase = 101;

}  // namespace detail

// Simulate T+1 contours on the standard grid: contour t samples
//   truth(phi_{w*_t}(theta_l) + alpha*_t) + Z_t(theta_l)
// with Z_t an independent draw from the noise spectrum.  Deterministic given
// stack_seed; the per-purpose sub-seeds come from derive_seed so contours
// can be regenerated independently.
inline SimulatedStack simulate_stack(const ExperimentConfig& cfg,
                                     std::uint64_t stack_seed) {
  const Grid grid = make_grid(cfg.n);
  const int n = cfg.n;
  const int count = cfg.T + 1;

  SimulatedStack out;
  if (cfg.misalignment) {
    const MisalignmentSpec& mis = *cfg.misalignment;
    Rng rng(derive_seed(stack_seed, detail::kMisalignmentSeedIndex));
    out.true_alphas.assign(static_cast<std::size_t>(count), 0.0);
    out.true_weights.assign(
        static_cast<std::size_t>(count),
        std::vector<double>(static_cast<std::size_t>(2 * mis.m), 0.0));
    for (int t = 1; t < count; ++t)
      out.true_alphas[static_cast<std::size_t>(t)] =
          rng.uniform(-mis.alpha_max, mis.alpha_max);
    if (mis.w_max > 0.0)
      for (int t = 1; t < count; ++t)
        for (double& w : out.true_weights[static_cast<std::size_t>(t)])
          w = rng.uniform(-mis.w_max, mis.w_max);
  }

  std::vector<ContourSamples> contours;
  contours.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    const GpSample noise = sample_gp(
        cfg.noise, grid,
        derive_seed(stack_seed, detail::kContourSeedBase +
                                    static_cast<std::uint64_t>(t)));
    std::vector<double> angles = grid.theta;
    double alpha = 0.0;
    if (!out.true_alphas.empty()) {
      alpha = out.true_alphas[static_cast<std::size_t>(t)];
      const std::vector<double>& w =
          out.true_weights[static_cast<std::size_t>(t)];
      if (std::any_of(w.begin(), w.end(),
                      [](double v) { return v != 0.0; })) {
        const DiffeoSpec spec =
            make_diffeo(static_cast<int>(w.size()) / 2, w);
        angles = flow_grid(spec, FlowConfig{}, angles);
      }
    }
    std::vector<Vec2> points(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l)
      points[static_cast<std::size_t>(l)] =
          synthesize(cfg.truth,
                     angles[static_cast<std::size_t>(l)] + alpha) +
          noise.values[static_cast<std::size_t>(l)];
    contours.push_back(make_contour_samples(grid, std::move(points)));
  }
  out.stack = make_contour_stack(std::move(contours));
  return out;
}

// Everything an experiment run records.  Per-replication values are stored
// in full so every summary in the report can be recomputed from them; the
// wall-clock time is informational and excluded from serialized reports so
// identical config+seed reproduces the artifact byte for byte.
struct ExperimentReport {
  std::string kind;  // "estimation" or "alignment"
  int n = 0;
  int J = 0;
  int T = 0;
  int replications = 0;
  std::uint64_t seed = 0;
  std::string generator = kGeneratorName;
  std::vector<std::string> notes;

  // Estimation: one ISE per replication, sigma2_hat rows j = 0..J (empty
  // when T == 0), the true per-frequency variances, and the scaled moment
  // statistics of 4(T+1) sigma2_hat_j / sigma2_j for j = 1..J.
  std::vector<double> ise;
  std::vector<std::vector<double>> sigma2_hat;
  std::vector<double> sigma2_true;
  double expected = 0.0;
  double mean_ise = 0.0;
  std::vector<double> sigma2_hat_mean;
  std::vector<double> pivot_mean;
  std::vector<double> pivot_variance;

  // Alignment: identity-initialization objective, final objective, and the
  // worst-contour shift recovery error per replication (the latter is only
  // interpretable when the applied weights are zero).
  std::vector<double> m_initial;
  std::vector<double> m_final;
  std::vector<double> shift_error;
  double mean_m_ratio = 0.0;

  double runtime_seconds = 0.0;  // not serialized
};

namespace detail {

inline const char* kGridNote =
    "sampling grid: standard odd grid theta_l = (2l+1-n) pi / n on [-pi, pi); "
    "even-sized or short-span grids are rejected because the discrete "
    "transform is exact only on the odd grid";

inline void run_replications(int replications,
                             const std::function<void(int)>& body) {
  const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(
      hardware, static_cast<unsigned>(replications)));
  if (workers <= 1) {
    for (int r = 0; r < replications; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int worker = 0; worker < workers; ++worker)
    pool.emplace_back([&, worker] {
      for (int r = worker; r < replications; r += workers) body(r);
    });
  for (std::thread& th : pool) th.join();
}

inline double mean_of(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

// Unbiased sample variance (n-1 denominator).
inline double variance_of(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return s / static_cast<double>(values.size() - 1);
}

}  // namespace detail

// Simulate, fit and score `replications` independent stacks.  Replications
// run in parallel with per-replication derived seeds and write into disjoint
// slots, so the report is deterministic; any misalignment section in the
// config is ignored here (estimation assumes registered contours).
inline ExperimentReport run_estimation_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto started = std::chrono::steady_clock::now();

  ExperimentConfig registered = cfg;
  registered.misalignment.reset();

  ExperimentReport report;
  report.kind = "estimation";
  report.n = cfg.n;
  report.J = cfg.J;
  report.T = cfg.T;
  report.replications = cfg.replications;
  report.seed = cfg.seed;
  report.notes.push_back(detail::kGridNote);
  if (cfg.misalignment)
    report.notes.push_back(
        "misalignment section ignored: estimation assumes registered "
        "contours");

  report.sigma2_true.assign(static_cast<std::size_t>(cfg.J) + 1, 0.0);
  for (int j = 0; j <= std::min(cfg.J, cfg.noise.max_order()); ++j)
    report.sigma2_true[static_cast<std::size_t>(j)] =
        cfg.noise.sigma2[static_cast<std::size_t>(j)];
  report.expected = expected_ise(cfg.truth, cfg.noise, cfg.J, cfg.T);

  report.ise.assign(static_cast<std::size_t>(cfg.replications), 0.0);
  if (cfg.T >= 1)
    report.sigma2_hat.assign(
        static_cast<std::size_t>(cfg.replications),
        std::vector<double>(static_cast<std::size_t>(cfg.J) + 1, 0.0));

  detail::run_replications(cfg.replications, [&](int r) {
    const std::uint64_t rep_seed =
        derive_seed(cfg.seed, 1 + static_cast<std::uint64_t>(r));
    const SimulatedStack sim = simulate_stack(registered, rep_seed);
    const MleFit mle = fit(sim.stack, cfg.J);
    report.ise[static_cast<std::size_t>(r)] = realized_ise(mle, cfg.truth);
    if (cfg.T >= 1)
      report.sigma2_hat[static_cast<std::size_t>(r)] = mle.variances();
  });

  report.mean_ise = detail::mean_of(report.ise);
  if (cfg.T >= 1) {
    report.sigma2_hat_mean.assign(static_cast<std::size_t>(cfg.J) + 1, 0.0);
    for (const std::vector<double>& row : report.sigma2_hat)
      for (std::size_t j = 0; j < row.size(); ++j)
        report.sigma2_hat_mean[j] += row[j];
    for (double& v : report.sigma2_hat_mean) v /= cfg.replications;

    for (int j = 1; j <= cfg.J; ++j) {
      const double s2 = report.sigma2_true[static_cast<std::size_t>(j)];
      if (!(s2 > 0.0)) {
        report.pivot_mean.push_back(0.0);
        report.pivot_variance.push_back(0.0);
        continue;
      }
      std::vector<double> pivot;
      pivot.reserve(report.sigma2_hat.size());
      for (const std::vector<double>& row : report.sigma2_hat)
        pivot.push_back(4.0 * (cfg.T + 1) *
                        row[static_cast<std::size_t>(j)] / s2);
      report.pivot_mean.push_back(detail::mean_of(pivot));
      report.pivot_variance.push_back(detail::variance_of(pivot));
    }
  }

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return report;
}

// Simulate misaligned stacks with known ground truth, align each one, and
// record the objective reduction and (for shift-only configs) the recovered
// shift error.  The optimizer always starts with the coarse circular shift
// search since the applied shifts can be far from zero.
inline ExperimentReport run_alignment_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (!cfg.misalignment)
    throw std::invalid_argument(
        "run_alignment_experiment: config has no misalignment section");
  if (cfg.T < 1)
    throw std::invalid_argument(
        "run_alignment_experiment: need T >= 1 (two contours) to align");
  const auto started = std::chrono::steady_clock::now();
  const MisalignmentSpec& mis = *cfg.misalignment;

  ExperimentReport report;
  report.kind = "alignment";
  report.n = cfg.n;
  report.J = cfg.J;
  report.T = cfg.T;
  report.replications = cfg.replications;
  report.seed = cfg.seed;
  report.notes.push_back(detail::kGridNote);

  report.m_initial.assign(static_cast<std::size_t>(cfg.replications), 0.0);
  report.m_final.assign(static_cast<std::size_t>(cfg.replications), 0.0);
  report.shift_error.assign(static_cast<std::size_t>(cfg.replications), 0.0);

  detail::run_replications(cfg.replications, [&](int r) {
    const std::uint64_t rep_seed =
        derive_seed(cfg.seed, 1 + static_cast<std::uint64_t>(r));
    const SimulatedStack sim = simulate_stack(cfg, rep_seed);

    AlignmentOptions opts;
    opts.grid_search_shifts = true;
    const AlignmentResult result = align(sim.stack, cfg.J, mis.m, opts);

    report.m_initial[static_cast<std::size_t>(r)] = result.trace.front();
    report.m_final[static_cast<std::size_t>(r)] = result.objective;
    double worst = 0.0;
    for (int t = 0; t <= cfg.T; ++t)
      worst = std::max(
          worst, std::abs(wrap_angle(
                     result.params.alphas[static_cast<std::size_t>(t)] +
                     sim.true_alphas[static_cast<std::size_t>(t)])));
    report.shift_error[static_cast<std::size_t>(r)] = worst;
  });

  std::vector<double> ratios;
  ratios.reserve(report.m_final.size());
  for (std::size_t r = 0; r < report.m_final.size(); ++r)
    ratios.push_back(report.m_initial[r] > 0.0
                         ? report.m_final[r] / report.m_initial[r]
                         : 0.0);
  report.mean_m_ratio = detail::mean_of(ratios);

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return report;
}

}  // namespace curvespec
