#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvespec/angles.hpp"
#include "curvespec/contour.hpp"
#include "curvespec/errors.hpp"
#include "curvespec/grid.hpp"
#include "curvespec/vec2.hpp"

namespace curvespec {

// Vector-valued cosine/sine coefficients up to a truncation order J:
// mu_0..mu_J and nu_1..nu_J.  The curve they describe is
//   theta -> mu_0 + sum_j [ mu_j cos(j theta) + nu_j sin(j theta) ].
struct FourierCoeffs {
  std::vector<Vec2> mu;  // size J+1
  std::vector<Vec2> nu;  // size J

  int order() const { return static_cast<int>(nu.size()); }
};

inline FourierCoeffs zero_coeffs(int J) {
  FourierCoeffs c;
  c.mu.assign(static_cast<std::size_t>(J) + 1, Vec2{});
  c.nu.assign(static_cast<std::size_t>(J), Vec2{});
  return c;
}

namespace detail {

// Fixed-order summation; compensated (Kahan) above this many terms.
inline constexpr std::size_t kCompensatedThreshold = 10000;

class Accumulator {
 public:
  explicit Accumulator(bool compensated) : compensated_(compensated) {}

  void add(double v) {
    if (!compensated_) {
      sum_ += v;
      return;
    }
    const double y = v - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }

  double value() const { return sum_; }

 private:
  bool compensated_;
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline Vec2 weighted_moment(const std::vector<Vec2>& points,
                            const std::vector<double>& factor) {
  const bool comp = points.size() > kCompensatedThreshold;
  Accumulator ax(comp), ay(comp);
  for (std::size_t l = 0; l < points.size(); ++l) {
    ax.add(points[l].x * factor[l]);
    ay.add(points[l].y * factor[l]);
  }
  return {ax.value(), ay.value()};
}

// Clamp a requested order to what n sample points can identify.
inline int effective_order(int J, int n, const char* who) {
  if (J < 0) throw std::invalid_argument(std::string(who) + ": J must be >= 0");
  const int max_order = (n - 1) / 2;
  if (J > max_order) {
    warn(std::string(who) + ": order " + std::to_string(J) +
         " exceeds (n-1)/2 = " + std::to_string(max_order) +
         " for n = " + std::to_string(n) + "; truncating");
    return max_order;
  }
  return J;
}

}  // namespace detail

// Riemann-sum Fourier coefficients of a sampled contour:
//   F_0 = (1/n) sum_l X^l,
//   F_j = (2/n) sum_l X^l cos(j theta_l),
//   G_j = (2/n) sum_l X^l sin(j theta_l).
// On the standard odd grid these are the discrete Fourier transform and are
// exact for band-limited curves of order <= (n-1)/2.  On custom grids the
// uniform weights 2/n become the cyclic gap weights d(theta_l)/pi.
inline FourierCoeffs analyze(const ContourSamples& samples, int J) {
  const Grid& grid = samples.grid;
  const int n = grid.n();
  J = detail::effective_order(J, n, "analyze");

  std::vector<double> weight(static_cast<std::size_t>(n));
  if (grid.standard) {
    std::fill(weight.begin(), weight.end(), 1.0 / n);
  } else {
    weight = grid.gaps();
    for (double& w : weight) w /= kTwoPi;
  }

  FourierCoeffs c = zero_coeffs(J);
  std::vector<double> factor(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) factor[static_cast<std::size_t>(l)] = weight[static_cast<std::size_t>(l)];
  c.mu[0] = detail::weighted_moment(samples.points, factor);
  for (int j = 1; j <= J; ++j) {
    for (int l = 0; l < n; ++l)
      factor[static_cast<std::size_t>(l)] =
          2.0 * weight[static_cast<std::size_t>(l)] *
          std::cos(j * grid.theta[static_cast<std::size_t>(l)]);
    c.mu[static_cast<std::size_t>(j)] =
        detail::weighted_moment(samples.points, factor);
    for (int l = 0; l < n; ++l)
      factor[static_cast<std::size_t>(l)] =
          2.0 * weight[static_cast<std::size_t>(l)] *
          std::sin(j * grid.theta[static_cast<std::size_t>(l)]);
    c.nu[static_cast<std::size_t>(j - 1)] =
        detail::weighted_moment(samples.points, factor);
  }
  return c;
}

// mu_0 + sum_j [ mu_j cos(j theta) + nu_j sin(j theta) ].
inline Vec2 synthesize(const FourierCoeffs& coeffs, double theta) {
  theta = wrap_angle(theta);
  Vec2 value = coeffs.mu[0];
  for (int j = 1; j <= coeffs.order(); ++j) {
    value += coeffs.mu[static_cast<std::size_t>(j)] * std::cos(j * theta);
    value += coeffs.nu[static_cast<std::size_t>(j - 1)] * std::sin(j * theta);
  }
  return value;
}

// d/dtheta of synthesize: sum_j j [ -mu_j sin(j theta) + nu_j cos(j theta) ].
inline Vec2 synthesize_deriv(const FourierCoeffs& coeffs, double theta) {
  theta = wrap_angle(theta);
  Vec2 value{};
  for (int j = 1; j <= coeffs.order(); ++j) {
    value += coeffs.mu[static_cast<std::size_t>(j)] * (-j * std::sin(j * theta));
    value += coeffs.nu[static_cast<std::size_t>(j - 1)] * (j * std::cos(j * theta));
  }
  return value;
}

// Dirichlet-type smoothing kernel
//   S_l(theta) = 1/n + (2/n) sum_{j=1}^{J} cos(j (theta - theta_l)),
// the weight sample l receives when projecting onto order-J trigonometric
// polynomials.  l is a 0-based grid index.  sum_l S_l(theta) == 1 whenever
// J <= n-1.
inline double smoother_weight(const Grid& grid, int l, int J, double theta) {
  if (l < 0 || l >= grid.n())
    throw std::invalid_argument("smoother_weight: index out of range");
  const double d = wrap_angle(theta - grid.theta[static_cast<std::size_t>(l)]);
  double s = 1.0;
  for (int j = 1; j <= J; ++j) s += 2.0 * std::cos(j * d);
  return s / grid.n();
}

namespace detail {

inline void require_standard(const Grid& grid, const char* who) {
  if (!grid.standard)
    throw std::invalid_argument(
        std::string(who) +
        ": requires the standard odd grid (trigonometric interpolation is "
        "exact only there)");
}

}  // namespace detail

// Value of the unique order-(n-1)/2 trigonometric polynomial through all n
// samples.  Only defined on the standard odd grid.
inline Vec2 trig_interpolate(const ContourSamples& samples, double theta) {
  detail::require_standard(samples.grid, "trig_interpolate");
  return synthesize(analyze(samples, (samples.grid.n() - 1) / 2), theta);
}

inline Vec2 trig_interpolate_deriv(const ContourSamples& samples,
                                   double theta) {
  detail::require_standard(samples.grid, "trig_interpolate_deriv");
  return synthesize_deriv(analyze(samples, (samples.grid.n() - 1) / 2), theta);
}

// Squared L2 distance between the two coefficient curves, normalised as
//   (1/pi) integral ||a(theta) - b(theta)||^2 dtheta
//     = 2 ||mu_0^a - mu_0^b||^2 + sum_j [ ||mu_j^a - mu_j^b||^2
//                                        + ||nu_j^a - nu_j^b||^2 ].
// The shorter coefficient list is zero-padded.
inline double parseval_distance(const FourierCoeffs& a,
                                const FourierCoeffs& b) {
  const int J = std::max(a.order(), b.order());
  auto mu = [&](const FourierCoeffs& c, int j) {
    return j <= c.order() ? c.mu[static_cast<std::size_t>(j)] : Vec2{};
  };
  auto nu = [&](const FourierCoeffs& c, int j) {
    return j <= c.order() ? c.nu[static_cast<std::size_t>(j - 1)] : Vec2{};
  };
  double d = 2.0 * norm2(mu(a, 0) - mu(b, 0));
  for (int j = 1; j <= J; ++j)
    d += norm2(mu(a, j) - mu(b, j)) + norm2(nu(a, j) - nu(b, j));
  return d;
}

}  // namespace curvespec
