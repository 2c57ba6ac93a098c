#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvespec/contour.hpp"
#include "curvespec/noise.hpp"
#include "curvespec/quadrature.hpp"
#include "curvespec/spectral.hpp"
#include "curvespec/vec2.hpp"

namespace curvespec {

// Maximum-likelihood estimates across a stack of T+1 contours.
//
// mean_coeffs holds mu_hat_j, nu_hat_j (the per-frequency sample means);
// noise_var holds sigma2_hat_j for j = 0..J and is absent when T == 0, where
// the variance estimators degenerate.
struct MleFit {
  FourierCoeffs mean_coeffs;
  std::optional<std::vector<double>> noise_var;
  int T = 0;
  std::vector<FourierCoeffs> per_contour;
  Grid grid;

  const std::vector<double>& variances() const {
    if (!noise_var)
      throw std::invalid_argument(
          "MleFit: insufficient replicates: variance estimation needs T >= 1 "
          "(at least two contours)");
    return *noise_var;
  }
};

// Closed-form MLE in the frequency domain:
//   mu_hat_j     = (1/(T+1)) sum_t F_j^t
//   nu_hat_j     = (1/(T+1)) sum_t G_j^t
//   sigma2_hat_j = (1/(4(T+1))) sum_t [ ||F_j^t - mu_hat_j||^2
//                                      + ||G_j^t - nu_hat_j||^2 ],  j >= 1
//   sigma2_hat_0 = (1/(2(T+1))) sum_t ||F_0^t - mu_hat_0||^2
// with the per-contour coefficients F, G computed by analyze().
inline MleFit fit(const ContourStack& stack, int J) {
  const int n = stack.grid().n();
  J = detail::effective_order(J, n, "fit");
  const int T = stack.T();

  MleFit out;
  out.T = T;
  out.grid = stack.grid();
  out.per_contour.reserve(stack.contours.size());
  for (const ContourSamples& contour : stack.contours)
    out.per_contour.push_back(analyze(contour, J));

  out.mean_coeffs = zero_coeffs(J);
  for (const FourierCoeffs& c : out.per_contour) {
    for (int j = 0; j <= J; ++j)
      out.mean_coeffs.mu[static_cast<std::size_t>(j)] +=
          c.mu[static_cast<std::size_t>(j)];
    for (int j = 1; j <= J; ++j)
      out.mean_coeffs.nu[static_cast<std::size_t>(j - 1)] +=
          c.nu[static_cast<std::size_t>(j - 1)];
  }
  const double scale = 1.0 / (T + 1);
  for (Vec2& v : out.mean_coeffs.mu) v *= scale;
  for (Vec2& v : out.mean_coeffs.nu) v *= scale;

  if (T >= 1) {
    std::vector<double> s2(static_cast<std::size_t>(J) + 1, 0.0);
    for (const FourierCoeffs& c : out.per_contour) {
      s2[0] += norm2(c.mu[0] - out.mean_coeffs.mu[0]);
      for (int j = 1; j <= J; ++j)
        s2[static_cast<std::size_t>(j)] +=
            norm2(c.mu[static_cast<std::size_t>(j)] -
                  out.mean_coeffs.mu[static_cast<std::size_t>(j)]) +
            norm2(c.nu[static_cast<std::size_t>(j - 1)] -
                  out.mean_coeffs.nu[static_cast<std::size_t>(j - 1)]);
    }
    s2[0] /= 2.0 * (T + 1);
    for (int j = 1; j <= J; ++j) s2[static_cast<std::size_t>(j)] /= 4.0 * (T + 1);
    out.noise_var = std::move(s2);
  }
  return out;
}

// Spectral form of the curve estimate: back-transform of the mean
// coefficients.
inline Vec2 estimate_curve(const MleFit& fit, double theta) {
  return synthesize(fit.mean_coeffs, theta);
}

// Smoother form of the same estimate,
//   (1/(T+1)) sum_t sum_l X_t^l S_l(theta);
// algebraically identical to estimate_curve on the standard grid and kept as
// an independent evaluation route.
inline Vec2 estimate_curve_smoother(const ContourStack& stack, int J,
                                    double theta) {
  const Grid& grid = stack.grid();
  J = detail::effective_order(J, grid.n(), "estimate_curve_smoother");
  Vec2 value{};
  for (const ContourSamples& contour : stack.contours)
    for (int l = 0; l < grid.n(); ++l)
      value += contour.points[static_cast<std::size_t>(l)] *
               smoother_weight(grid, l, J, theta);
  return value * (1.0 / (stack.T() + 1));
}

// Expected integrated squared error of the order-J estimate from T+1
// contours: ignored-tail energy plus the per-frequency estimation variance,
//   sum_{j>J} [ ||mu_j||^2 + ||nu_j||^2 ] + (4/(T+1)) sum_{j<=J} sigma^2_j.
inline double expected_ise(const FourierCoeffs& true_coeffs,
                           const NoiseSpectrum& spec, int J, int T) {
  double tail = 0.0;
  for (int j = J + 1; j <= true_coeffs.order(); ++j)
    tail += norm2(true_coeffs.mu[static_cast<std::size_t>(j)]) +
            norm2(true_coeffs.nu[static_cast<std::size_t>(j - 1)]);
  double variance = 0.0;
  for (int j = 0; j <= std::min(J, spec.max_order()); ++j)
    variance += spec.sigma2[static_cast<std::size_t>(j)];
  return tail + 4.0 / (T + 1) * variance;
}

// Integrated-squared-error decomposition.  tail_bias is the energy of the
// true coefficients beyond the estimation order; variance_term is the
// realised (or expected) within-band error; offsets_c and sigma2_n are the
// grid-discretisation quantities filled in by discrete_offsets().
struct IseBudget {
  double tail_bias = 0.0;
  double variance_term = 0.0;
  std::vector<double> offsets_c;
  std::vector<double> sigma2_n;

  double total() const { return tail_bias + variance_term; }
};

// (1/pi) int ||Gamma_hat - Gamma||^2: Parseval distance between the
// J-truncated estimate and the full true coefficients.
inline double realized_ise(const MleFit& fit, const FourierCoeffs& true_coeffs) {
  return parseval_distance(fit.mean_coeffs, true_coeffs);
}

inline IseBudget ise_budget(const MleFit& fit,
                            const FourierCoeffs& true_coeffs) {
  IseBudget budget;
  const int J = fit.mean_coeffs.order();
  for (int j = J + 1; j <= true_coeffs.order(); ++j)
    budget.tail_bias += norm2(true_coeffs.mu[static_cast<std::size_t>(j)]) +
                        norm2(true_coeffs.nu[static_cast<std::size_t>(j - 1)]);
  auto true_mu = [&](int j) {
    return j <= true_coeffs.order() ? true_coeffs.mu[static_cast<std::size_t>(j)]
                                    : Vec2{};
  };
  auto true_nu = [&](int j) {
    return j <= true_coeffs.order()
               ? true_coeffs.nu[static_cast<std::size_t>(j - 1)]
               : Vec2{};
  };
  budget.variance_term = 2.0 * norm2(fit.mean_coeffs.mu[0] - true_mu(0));
  for (int j = 1; j <= J; ++j)
    budget.variance_term +=
        norm2(fit.mean_coeffs.mu[static_cast<std::size_t>(j)] - true_mu(j)) +
        norm2(fit.mean_coeffs.nu[static_cast<std::size_t>(j - 1)] - true_nu(j));
  return budget;
}

// Discretisation offsets of the grid transform against the exact integrals:
//   c_{j,n}     = ||mu_{j,n} - mu_j||^2 + ||nu_{j,n} - nu_j||^2
//                 (only the mu term at j = 0),
//   sigma2_{j,n} = (2/n) sum_l rho(theta_l) cos(j theta_l)   (1/n at j = 0),
// where mu_{j,n} are the Riemann-sum coefficients of the true curve on the
// grid and mu_j come from adaptive quadrature.  Both vanish when curve and
// covariance are band-limited below (n-1)/2 on the standard odd grid.
template <class Curve>
IseBudget discrete_offsets(Curve&& curve, const NoiseSpectrum& spec,
                           const Grid& grid, int J,
                           double quadrature_tol = 1e-10) {
  const int n = grid.n();
  J = detail::effective_order(J, n, "discrete_offsets");

  std::vector<Vec2> points;
  points.reserve(grid.theta.size());
  for (double theta : grid.theta) points.push_back(curve(theta));
  const FourierCoeffs riemann =
      analyze(ContourSamples{grid, std::move(points)}, J);
  const FourierCoeffs exact = fourier_coeffs_by_quadrature(curve, J, quadrature_tol);

  IseBudget budget;
  budget.offsets_c.resize(static_cast<std::size_t>(J) + 1);
  budget.sigma2_n.resize(static_cast<std::size_t>(J) + 1);
  budget.offsets_c[0] = norm2(riemann.mu[0] - exact.mu[0]);
  for (int j = 1; j <= J; ++j)
    budget.offsets_c[static_cast<std::size_t>(j)] =
        norm2(riemann.mu[static_cast<std::size_t>(j)] -
              exact.mu[static_cast<std::size_t>(j)]) +
        norm2(riemann.nu[static_cast<std::size_t>(j - 1)] -
              exact.nu[static_cast<std::size_t>(j - 1)]);
  for (int j = 0; j <= J; ++j) {
    double s = 0.0;
    for (int l = 0; l < n; ++l)
      s += covariance(spec, grid.theta[static_cast<std::size_t>(l)]) *
           std::cos(j * grid.theta[static_cast<std::size_t>(l)]);
    budget.sigma2_n[static_cast<std::size_t>(j)] = (j == 0 ? 1.0 : 2.0) * s / n;
  }
  return budget;
}

// Joint log likelihood of the frequency-domain data at arbitrary parameter
// values (constants dropped):
//   - sum_t [ log s2_0 + sum_j 2 log s2_j ]
//   - (1/2) sum_t ||F_0^t - mu_0||^2 / s2_0
//   - (1/2) sum_t sum_j [ ||F_j^t - mu_j||^2 + ||G_j^t - nu_j||^2 ] / s2_j.
// Diagnostic only: the closed-form fit() is its stationary point.
inline double log_likelihood(const FourierCoeffs& mean,
                             const std::vector<double>& sigma2,
                             const std::vector<FourierCoeffs>& per_contour) {
  const int J = mean.order();
  if (static_cast<int>(sigma2.size()) != J + 1)
    throw std::invalid_argument("log_likelihood: need sigma2_0..sigma2_J");
  double ll = 0.0;
  for (const FourierCoeffs& c : per_contour) {
    if (c.order() < J)
      throw std::invalid_argument(
          "log_likelihood: per-contour coefficients shorter than the mean");
    ll -= std::log(sigma2[0]);
    for (int j = 1; j <= J; ++j)
      ll -= 2.0 * std::log(sigma2[static_cast<std::size_t>(j)]);
    ll -= 0.5 * norm2(c.mu[0] - mean.mu[0]) / sigma2[0];
    for (int j = 1; j <= J; ++j)
      ll -= 0.5 *
            (norm2(c.mu[static_cast<std::size_t>(j)] -
                   mean.mu[static_cast<std::size_t>(j)]) +
             norm2(c.nu[static_cast<std::size_t>(j - 1)] -
                   mean.nu[static_cast<std::size_t>(j - 1)])) /
            sigma2[static_cast<std::size_t>(j)];
  }
  return ll;
}

}  // namespace curvespec
