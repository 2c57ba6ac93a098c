#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "curvespec/angles.hpp"
#include "curvespec/contour.hpp"
#include "curvespec/diffeo.hpp"
#include "curvespec/errors.hpp"
#include "curvespec/estimator.hpp"
#include "curvespec/spectral.hpp"
#include "curvespec/vec2.hpp"

namespace curvespec {

// Which redundant alignment coordinates are pinned.  The objective is
// invariant under a common reparametrisation of all contours, so besides
// alpha_0 = 0 either the first contour keeps the identity diffeomorphism
// (PinFirstWeights) or the weight vectors are constrained to zero mean
// across contours (ZeroMeanWeights).
enum class ConstraintMode { PinFirstWeights, ZeroMeanWeights };

// Per-contour root shift alpha_t and diffeomorphism weights w_t.
struct AlignmentParams {
  std::vector<double> alphas;                // size T+1, alphas[0] == 0
  std::vector<std::vector<double>> weights;  // size T+1, each of length 2m

  int contours() const { return static_cast<int>(alphas.size()); }
  int m() const {
    return weights.empty() ? 0 : static_cast<int>(weights.front().size()) / 2;
  }
};

inline AlignmentParams identity_params(int contours, int m) {
  if (contours < 1)
    throw std::invalid_argument("identity_params: need at least 1 contour");
  if (m < 0) throw std::invalid_argument("identity_params: m must be >= 0");
  AlignmentParams p;
  p.alphas.assign(static_cast<std::size_t>(contours), 0.0);
  p.weights.assign(static_cast<std::size_t>(contours),
                   std::vector<double>(static_cast<std::size_t>(2 * m), 0.0));
  return p;
}

namespace detail {

inline void validate_params(const ContourStack& stack,
                            const AlignmentParams& params) {
  if (params.contours() != static_cast<int>(stack.contours.size()))
    throw std::invalid_argument(
        "alignment: parameter count does not match the contour count");
  if (static_cast<int>(params.weights.size()) != params.contours())
    throw std::invalid_argument(
        "alignment: need one weight vector per contour");
  // alpha_0 = 0 and the weight constraint are enforced by the optimizer, not
  // here: evaluation at off-constraint points is legitimate (finite
  // differences, symmetry diagnostics).
  const std::size_t len = params.weights.front().size();
  if (len % 2 != 0)
    throw std::invalid_argument("alignment: weight vectors need length 2m");
  for (const std::vector<double>& w : params.weights)
    if (w.size() != len)
      throw std::invalid_argument(
          "alignment: weight vectors must share one length");
  for (double a : params.alphas)
    if (!(a >= -kPi && a < kPi))
      throw std::invalid_argument("alignment: shifts must lie in [-pi, pi)");
}

// Everything that stays fixed across optimizer iterations: the full-order
// trigonometric interpolants of the raw contours and the circulant smoother
// kernel s_d = S_k(theta_l) for d = (l-k) mod n.
struct AlignmentWork {
  const ContourStack* stack = nullptr;
  int J = 0;
  FlowConfig flow_cfg;
  std::vector<FourierCoeffs> interpolants;
  std::vector<double> kernel;

  int n() const { return stack->grid().n(); }
  int contours() const { return static_cast<int>(stack->contours.size()); }
};

inline AlignmentWork make_work(const ContourStack& stack, int J,
                               const FlowConfig& flow_cfg) {
  require_standard(stack.grid(), "alignment");
  const int n = stack.grid().n();
  AlignmentWork work;
  work.stack = &stack;
  work.J = effective_order(J, n, "alignment");
  work.flow_cfg = flow_cfg;
  work.interpolants.reserve(stack.contours.size());
  for (const ContourSamples& contour : stack.contours)
    work.interpolants.push_back(analyze(contour, (n - 1) / 2));
  work.kernel.resize(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    double s = 1.0;
    for (int j = 1; j <= work.J; ++j) s += 2.0 * std::cos(j * kTwoPi * d / n);
    work.kernel[static_cast<std::size_t>(d)] = s / n;
  }
  return work;
}

// Warped sample angles psi_t^k = phi_{-w_t}(theta_k) + alpha_t for one
// contour; sensitivities of phi filled in when requested.
inline void warp_angles(const AlignmentWork& work,
                        const AlignmentParams& params, int t,
                        std::vector<double>& psi,
                        std::vector<std::vector<double>>* sensitivities) {
  const Grid& grid = work.stack->grid();
  const int n = work.n();
  const std::vector<double>& w = params.weights[static_cast<std::size_t>(t)];
  const double alpha = params.alphas[static_cast<std::size_t>(t)];
  const int m = static_cast<int>(w.size()) / 2;
  psi.resize(static_cast<std::size_t>(n));
  if (sensitivities != nullptr)
    sensitivities->assign(static_cast<std::size_t>(n),
                          std::vector<double>(w.size(), 0.0));

  const bool need_flow =
      m > 0 && (sensitivities != nullptr ||
                std::any_of(w.begin(), w.end(), [](double v) { return v != 0.0; }));
  if (!need_flow) {
    for (int k = 0; k < n; ++k)
      psi[static_cast<std::size_t>(k)] =
          wrap_angle(grid.theta[static_cast<std::size_t>(k)] + alpha);
    return;
  }

  const DiffeoSpec spec = make_diffeo(m, w);
  for (int k = 0; k < n; ++k) {
    const double theta = grid.theta[static_cast<std::size_t>(k)];
    if (sensitivities == nullptr) {
      psi[static_cast<std::size_t>(k)] =
          wrap_angle(inverse_flow(spec, work.flow_cfg, theta) + alpha);
    } else {
      FlowWithSensitivities s =
          inverse_flow_with_sensitivities(spec, work.flow_cfg, theta);
      psi[static_cast<std::size_t>(k)] = wrap_angle(s.value + alpha);
      (*sensitivities)[static_cast<std::size_t>(k)] = std::move(s.du_dw);
    }
  }
}

// Gamma_hat_t at all grid points: circulant smoothing of the warped values.
inline void smooth_on_grid(const AlignmentWork& work,
                           const std::vector<Vec2>& warped,
                           std::vector<Vec2>& smoothed) {
  const int n = work.n();
  smoothed.assign(static_cast<std::size_t>(n), Vec2{});
  for (int l = 0; l < n; ++l) {
    Vec2 acc{};
    for (int k = 0; k < n; ++k)
      acc += warped[static_cast<std::size_t>(k)] *
             work.kernel[static_cast<std::size_t>((l - k + n) % n)];
    smoothed[static_cast<std::size_t>(l)] = acc;
  }
}

struct Residuals {
  double objective = 0.0;
  // residuals[t][l] = Gamma_hat_t(theta_l) - mean_s Gamma_hat_s(theta_l)
  std::vector<std::vector<Vec2>> residuals;
  std::vector<std::vector<double>> psi;  // warped angles per contour
};

inline Residuals evaluate_residuals(const AlignmentWork& work,
                                    const AlignmentParams& params) {
  const int n = work.n();
  const int count = work.contours();
  Residuals out;
  out.psi.resize(static_cast<std::size_t>(count));
  out.residuals.assign(static_cast<std::size_t>(count),
                       std::vector<Vec2>(static_cast<std::size_t>(n)));

  std::vector<Vec2> mean(static_cast<std::size_t>(n), Vec2{});
  std::vector<Vec2> warped(static_cast<std::size_t>(n));
  for (int t = 0; t < count; ++t) {
    warp_angles(work, params, t, out.psi[static_cast<std::size_t>(t)], nullptr);
    for (int k = 0; k < n; ++k)
      warped[static_cast<std::size_t>(k)] =
          synthesize(work.interpolants[static_cast<std::size_t>(t)],
                     out.psi[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)]);
    smooth_on_grid(work, warped, out.residuals[static_cast<std::size_t>(t)]);
    for (int l = 0; l < n; ++l)
      mean[static_cast<std::size_t>(l)] +=
          out.residuals[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)];
  }
  for (Vec2& v : mean) v *= 1.0 / count;
  for (int t = 0; t < count; ++t)
    for (int l = 0; l < n; ++l) {
      Vec2& r = out.residuals[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)];
      r -= mean[static_cast<std::size_t>(l)];
      out.objective += norm2(r);
    }
  return out;
}

}  // namespace detail

// Gamma_hat_t(theta) = sum_l X_t(phi_{-w_t}(theta_l) + alpha_t) S_l(theta):
// the order-J smoothed curve of contour t under the given alignment, with
// X_t extended off the grid by full-order trigonometric interpolation.
inline Vec2 smoothed_curve_t(const ContourStack& stack,
                             const AlignmentParams& params, int t,
                             double theta, int J,
                             const FlowConfig& flow_cfg = {}) {
  detail::validate_params(stack, params);
  if (t < 0 || t >= params.contours())
    throw std::invalid_argument("smoothed_curve_t: contour index out of range");
  detail::AlignmentWork work = detail::make_work(stack, J, flow_cfg);
  std::vector<double> psi;
  detail::warp_angles(work, params, t, psi, nullptr);
  Vec2 value{};
  for (int l = 0; l < work.n(); ++l)
    value += synthesize(work.interpolants[static_cast<std::size_t>(t)],
                        psi[static_cast<std::size_t>(l)]) *
             smoother_weight(stack.grid(), l, work.J, theta);
  return value;
}

// M(alpha, w) = sum_t sum_l || Gamma_hat_t(theta_l) - Gamma_hat_bar(theta_l) ||^2.
// Written as the literal double sum over smoother weights; the optimizer uses
// an equivalent circulant evaluation internally.
inline double objective(const ContourStack& stack,
                        const AlignmentParams& params, int J,
                        const FlowConfig& flow_cfg = {}) {
  detail::validate_params(stack, params);
  detail::AlignmentWork work = detail::make_work(stack, J, flow_cfg);
  const int n = work.n();
  const int count = work.contours();

  std::vector<std::vector<Vec2>> smoothed(
      static_cast<std::size_t>(count),
      std::vector<Vec2>(static_cast<std::size_t>(n), Vec2{}));
  std::vector<double> psi;
  for (int t = 0; t < count; ++t) {
    detail::warp_angles(work, params, t, psi, nullptr);
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k)
        smoothed[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] +=
            synthesize(work.interpolants[static_cast<std::size_t>(t)],
                       psi[static_cast<std::size_t>(k)]) *
            smoother_weight(stack.grid(), k, work.J,
                            stack.grid().theta[static_cast<std::size_t>(l)]);
  }
  double m_value = 0.0;
  for (int l = 0; l < n; ++l) {
    Vec2 mean{};
    for (int t = 0; t < count; ++t)
      mean += smoothed[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)];
    mean *= 1.0 / count;
    for (int t = 0; t < count; ++t)
      m_value += norm2(
          smoothed[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] -
          mean);
  }
  return m_value;
}

// Objective value and its partial derivatives.  d_alpha[0] and the pinned
// weight coordinates are reported before constraint projection when raw is
// requested; the public gradient() applies the projection.
struct AlignmentGradient {
  double value = 0.0;
  std::vector<double> d_alpha;               // size T+1
  std::vector<std::vector<double>> d_weights;  // size T+1 x 2m

  double squared_norm() const {
    double s = 0.0;
    for (double g : d_alpha) s += g * g;
    for (const std::vector<double>& w : d_weights)
      for (double g : w) s += g * g;
    return s;
  }
};

namespace detail {

// Unconstrained partial derivatives:
//   dM/dalpha_t  = 2 sum_k W_t^k . X_t'(psi_t^k)
//   dM/dw_{t,i}  = 2 sum_k W_t^k . X_t'(psi_t^k) dphi_{-w_t}(theta_k)/dw_{t,i}
// where W_t^k = sum_l S_k(theta_l) R_t^l smooths the residuals back onto the
// sample index.  The mean-curve dependence drops out because the residuals
// sum to zero over t.
inline AlignmentGradient gradient_raw(const AlignmentWork& work,
                                      const AlignmentParams& params) {
  const int n = work.n();
  const int count = work.contours();
  AlignmentGradient grad;
  grad.d_alpha.assign(static_cast<std::size_t>(count), 0.0);
  grad.d_weights.assign(static_cast<std::size_t>(count),
                        std::vector<double>(params.weights.front().size(), 0.0));

  const Residuals state = evaluate_residuals(work, params);
  grad.value = state.objective;

  // Per-contour work items are independent; spread them over a small thread
  // pool and write into disjoint slots so the result stays deterministic.
  auto contour_gradient = [&](int t) {
    std::vector<double> psi;
    std::vector<std::vector<double>> du;
    const bool with_w = !params.weights[static_cast<std::size_t>(t)].empty();
    warp_angles(work, params, t, psi, with_w ? &du : nullptr);

    // Smoothed residual W_t^k; kernel symmetry makes this the same circulant.
    std::vector<Vec2> smoothed_residual;
    smooth_on_grid(work, state.residuals[static_cast<std::size_t>(t)],
                   smoothed_residual);

    double d_alpha = 0.0;
    std::vector<double>& d_w = grad.d_weights[static_cast<std::size_t>(t)];
    for (int k = 0; k < n; ++k) {
      const Vec2 deriv =
          synthesize_deriv(work.interpolants[static_cast<std::size_t>(t)],
                           psi[static_cast<std::size_t>(k)]);
      const double pull =
          2.0 * dot(smoothed_residual[static_cast<std::size_t>(k)], deriv);
      d_alpha += pull;
      if (with_w)
        for (std::size_t i = 0; i < d_w.size(); ++i)
          d_w[i] += pull * du[static_cast<std::size_t>(k)][i];
    }
    grad.d_alpha[static_cast<std::size_t>(t)] = d_alpha;
  };

  const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(
      std::min<unsigned>(hardware, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (int t = 0; t < count; ++t) contour_gradient(t);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int worker = 0; worker < workers; ++worker)
      pool.emplace_back([&, worker] {
        for (int t = worker; t < count; t += workers) contour_gradient(t);
      });
    for (std::thread& th : pool) th.join();
  }
  return grad;
}

inline void project_gradient(AlignmentGradient& grad, ConstraintMode mode) {
  grad.d_alpha[0] = 0.0;
  if (grad.d_weights.front().empty()) return;
  if (mode == ConstraintMode::PinFirstWeights) {
    std::fill(grad.d_weights.front().begin(), grad.d_weights.front().end(), 0.0);
    return;
  }
  const std::size_t len = grad.d_weights.front().size();
  const double count = static_cast<double>(grad.d_weights.size());
  for (std::size_t i = 0; i < len; ++i) {
    double mean = 0.0;
    for (const std::vector<double>& w : grad.d_weights) mean += w[i];
    mean /= count;
    for (std::vector<double>& w : grad.d_weights) w[i] -= mean;
  }
}

}  // namespace detail

// Analytic gradient with the constraint-mode coordinates projected out.
inline AlignmentGradient gradient(const ContourStack& stack,
                                  const AlignmentParams& params, int J,
                                  ConstraintMode mode = ConstraintMode::PinFirstWeights,
                                  const FlowConfig& flow_cfg = {}) {
  detail::validate_params(stack, params);
  detail::AlignmentWork work = detail::make_work(stack, J, flow_cfg);
  AlignmentGradient grad = detail::gradient_raw(work, params);
  detail::project_gradient(grad, mode);
  return grad;
}

// Unprojected partial derivatives, exposed for symmetry diagnostics (the
// common-shift direction has zero derivative on identical contours).
inline AlignmentGradient gradient_unconstrained(const ContourStack& stack,
                                                const AlignmentParams& params,
                                                int J,
                                                const FlowConfig& flow_cfg = {}) {
  detail::validate_params(stack, params);
  detail::AlignmentWork work = detail::make_work(stack, J, flow_cfg);
  return detail::gradient_raw(work, params);
}

struct AlignmentOptions {
  ConstraintMode mode = ConstraintMode::PinFirstWeights;
  int max_iterations = 500;
  double tolerance = 1e-6;       // on the projected gradient norm
  bool grid_search_shifts = false;
  int grid_search_points = 36;
  double initial_step = 1.0;     // Armijo backtracking from here
  double shrink = 0.5;
  double armijo_slope = 1e-4;
  FlowConfig flow;
};

struct AlignmentResult {
  AlignmentParams params;
  double objective = 0.0;
  std::vector<double> trace;  // M per accepted iterate, non-increasing
  ContourStack aligned;       // Y_t resampled on the grid
  int iterations = 0;
  std::string status;  // "converged", "max-iterations" or "stalled"
};

// Root-mean-square residual per sample: sqrt(M / ((T+1) n)), the scale the
// objective is quoted on for human comparison.
inline double average_error(double m_value, int contours, int n) {
  return std::sqrt(m_value / (static_cast<double>(contours) * n));
}

namespace detail {

inline void enforce_constraints(AlignmentParams& params, ConstraintMode mode) {
  params.alphas[0] = 0.0;
  for (double& a : params.alphas) a = wrap_angle(a);
  if (params.weights.front().empty()) return;
  if (mode == ConstraintMode::PinFirstWeights) {
    std::fill(params.weights.front().begin(), params.weights.front().end(), 0.0);
    return;
  }
  const std::size_t len = params.weights.front().size();
  const double count = static_cast<double>(params.weights.size());
  for (std::size_t i = 0; i < len; ++i) {
    double mean = 0.0;
    for (const std::vector<double>& w : params.weights) mean += w[i];
    mean /= count;
    for (std::vector<double>& w : params.weights) w[i] -= mean;
  }
}

// One pass of coordinate-wise shift search on the K-point circle grid,
// weights held fixed.  Returns the best objective found.
inline double shift_sweep(const AlignmentWork& work, AlignmentParams& params,
                          int points) {
  double best = evaluate_residuals(work, params).objective;
  for (int t = 1; t < params.contours(); ++t) {
    double best_alpha = params.alphas[static_cast<std::size_t>(t)];
    for (int k = 0; k < points; ++k) {
      const double candidate = -kPi + kTwoPi * k / points;
      params.alphas[static_cast<std::size_t>(t)] = candidate;
      const double value = evaluate_residuals(work, params).objective;
      if (value < best) {
        best = value;
        best_alpha = candidate;
      }
    }
    params.alphas[static_cast<std::size_t>(t)] = best_alpha;
  }
  return best;
}

}  // namespace detail

// Joint estimation of all shifts and weights by gradient descent with Armijo
// backtracking from the identity (optionally preceded by a coarse circular
// grid search over the shifts, since M is multimodal in alpha).
inline AlignmentResult align(const ContourStack& stack, int J, int m,
                             const AlignmentOptions& opts = {}) {
  if (m < 0) throw std::invalid_argument("align: m must be >= 0");
  if (opts.max_iterations < 0)
    throw std::invalid_argument("align: max_iterations must be >= 0");
  if (stack.T() < 1)
    throw std::invalid_argument("align: need at least two contours");
  detail::AlignmentWork work = detail::make_work(stack, J, opts.flow);
  const int count = work.contours();

  AlignmentResult result;
  result.params = identity_params(count, m);
  double current = detail::evaluate_residuals(work, result.params).objective;
  result.trace.push_back(current);

  if (opts.grid_search_shifts && count > 1) {
    for (int pass = 0; pass < 3; ++pass) {
      const double swept =
          detail::shift_sweep(work, result.params, opts.grid_search_points);
      if (swept == current) break;
      current = swept;
      result.trace.push_back(current);
    }
  }

  result.status = "max-iterations";
  for (int it = 0; it < opts.max_iterations; ++it) {
    AlignmentGradient grad = detail::gradient_raw(work, result.params);
    detail::project_gradient(grad, opts.mode);
    const double gnorm2 = grad.squared_norm();
    if (std::sqrt(gnorm2) < opts.tolerance) {
      result.status = "converged";
      break;
    }

    double step = opts.initial_step;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      AlignmentParams candidate = result.params;
      for (int t = 0; t < count; ++t) {
        candidate.alphas[static_cast<std::size_t>(t)] -=
            step * grad.d_alpha[static_cast<std::size_t>(t)];
        for (std::size_t i = 0; i < candidate.weights[static_cast<std::size_t>(t)].size(); ++i)
          candidate.weights[static_cast<std::size_t>(t)][i] -=
              step * grad.d_weights[static_cast<std::size_t>(t)][i];
      }
      detail::enforce_constraints(candidate, opts.mode);
      const double value = detail::evaluate_residuals(work, candidate).objective;
      if (value <= current - opts.armijo_slope * step * gnorm2) {
        result.params = std::move(candidate);
        current = value;
        accepted = true;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted) {
      // No decrease along the (projected) steepest descent direction at any
      // representable step: surface it instead of looping to max_iterations.
      result.status = "stalled";
      break;
    }
    result.trace.push_back(current);
    result.iterations = it + 1;
  }

  result.objective = current;

  // Y_t(theta_l) = X_t(phi_{-w_t}(theta_l) + alpha_t) resampled on the grid,
  // so downstream estimation applies to the aligned stack unchanged.
  std::vector<ContourSamples> aligned;
  aligned.reserve(static_cast<std::size_t>(count));
  std::vector<double> psi;
  for (int t = 0; t < count; ++t) {
    detail::warp_angles(work, result.params, t, psi, nullptr);
    std::vector<Vec2> points;
    points.reserve(psi.size());
    for (double angle : psi)
      points.push_back(
          synthesize(work.interpolants[static_cast<std::size_t>(t)], angle));
    aligned.push_back(make_contour_samples(stack.grid(), std::move(points)));
  }
  result.aligned = make_contour_stack(std::move(aligned), stack.labels);
  return result;
}

}  // namespace curvespec
