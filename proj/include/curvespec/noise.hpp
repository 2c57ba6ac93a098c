#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvespec/angles.hpp"
#include "curvespec/grid.hpp"
#include "curvespec/rng.hpp"
#include "curvespec/spectral.hpp"
#include "curvespec/vec2.hpp"

namespace curvespec {

// Per-frequency variances sigma^2_j (j = 0..max_order) of a stationary cyclic
// Gaussian process built as a random Fourier series with independent
// N(0, sigma^2_j) amplitudes.
struct NoiseSpectrum {
  std::vector<double> sigma2;

  int max_order() const { return static_cast<int>(sigma2.size()) - 1; }
};

inline NoiseSpectrum make_noise_spectrum(std::vector<double> sigma2) {
  if (sigma2.empty())
    throw std::invalid_argument("make_noise_spectrum: need sigma2_0 at least");
  for (double v : sigma2)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(
          "make_noise_spectrum: variances must be finite and >= 0");
  return NoiseSpectrum{std::move(sigma2)};
}

// Generalised p-order spectrum: sigma^2_j = 1 / (alpha + beta j^{2p}) for
// j >= 1, and sigma^2_0 = 1/alpha.  The j=0 and j=1 values extend the model
// formula by continuity; they are needed to simulate the process.
inline NoiseSpectrum p_order_spectrum(double alpha, double beta, double p,
                                      int max_order) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(p > 0.0))
    throw std::invalid_argument(
        "p_order_spectrum: alpha, beta and p must be positive");
  if (max_order < 0)
    throw std::invalid_argument("p_order_spectrum: max_order must be >= 0");
  std::vector<double> s2(static_cast<std::size_t>(max_order) + 1);
  s2[0] = 1.0 / alpha;
  for (int j = 1; j <= max_order; ++j)
    s2[static_cast<std::size_t>(j)] =
        1.0 / (alpha + beta * std::pow(static_cast<double>(j), 2.0 * p));
  return NoiseSpectrum{std::move(s2)};
}

// Covariance function rho(theta) = sum_j sigma^2_j cos(j theta).
inline double covariance(const NoiseSpectrum& spec, double theta) {
  theta = wrap_angle(theta);
  double rho = 0.0;
  for (int j = 0; j <= spec.max_order(); ++j)
    rho += spec.sigma2[static_cast<std::size_t>(j)] * std::cos(j * theta);
  return rho;
}

// Informational smoothness flags: whether sum_j j^{2k+eps} sigma^2_j looks
// convergent for k = 0 (continuous paths) and k = 1 (C^1 paths), judged from
// the truncated spectrum by the log-log slope of j^{2k+eps} sigma^2_j over
// the top octave (slope < -1 <=> the power-law tail would be summable).
struct SmoothnessReport {
  bool continuous_looking = true;
  bool differentiable_looking = true;
};

inline SmoothnessReport smoothness_report(const NoiseSpectrum& spec,
                                          double eps = 0.1) {
  SmoothnessReport report;
  const int hi = spec.max_order();
  const int lo = hi / 2;
  if (lo < 1) return report;  // too short to judge; treat the finite sum as benign
  auto looks_convergent = [&](int k) {
    const double exponent = 2.0 * k + eps;
    const double a_lo =
        std::pow(static_cast<double>(lo), exponent) * spec.sigma2[static_cast<std::size_t>(lo)];
    const double a_hi =
        std::pow(static_cast<double>(hi), exponent) * spec.sigma2[static_cast<std::size_t>(hi)];
    if (a_hi == 0.0) return true;
    if (a_lo == 0.0) return false;
    const double slope = std::log(a_hi / a_lo) / std::log(double(hi) / lo);
    return slope < -1.0;
  };
  report.continuous_looking = looks_convergent(0);
  report.differentiable_looking = looks_convergent(1);
  return report;
}

// One realisation of the process on a grid, together with the realised
// Fourier amplitudes: coeffs.mu[j] = (A_{j,1}, A_{j,2}),
// coeffs.nu[j-1] = (B_{j,1}, B_{j,2}).
struct GpSample {
  Grid grid;
  std::vector<Vec2> values;
  FourierCoeffs coeffs;
};

// Draw A_{j,i}, B_{j,i} ~ N(0, sigma^2_j) independently and evaluate the
// series at the grid points.  Deterministic given the seed; the draw order is
// fixed as A_{j,1}, A_{j,2}, B_{j,1}, B_{j,2} for j ascending (no B at j=0,
// where the sine term vanishes identically).
inline GpSample sample_gp(const NoiseSpectrum& spec, const Grid& grid,
                          std::uint64_t seed) {
  Rng rng(seed);
  const int J = spec.max_order();
  FourierCoeffs coeffs = zero_coeffs(J);
  for (int j = 0; j <= J; ++j) {
    const double sigma = std::sqrt(spec.sigma2[static_cast<std::size_t>(j)]);
    coeffs.mu[static_cast<std::size_t>(j)] = {rng.normal(sigma),
                                              rng.normal(sigma)};
    if (j >= 1)
      coeffs.nu[static_cast<std::size_t>(j - 1)] = {rng.normal(sigma),
                                                    rng.normal(sigma)};
  }
  GpSample sample{grid, {}, std::move(coeffs)};
  sample.values.reserve(grid.theta.size());
  for (double theta : grid.theta)
    sample.values.push_back(synthesize(sample.coeffs, theta));
  return sample;
}

}  // namespace curvespec
