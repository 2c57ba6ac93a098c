#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvespec/angles.hpp"
#include "curvespec/errors.hpp"

namespace curvespec {

// Cyclic sample locations on [-pi, pi).
//
// The standard grid has odd n and theta_l = -(n+1)pi/n + 2pi*l/n, l = 1..n;
// only on that grid do the discrete-transform exactness results (orthogonal
// trigonometric family, interpolation of band-limited curves) hold.  Custom
// grids are accepted for plain Riemann-sum analysis and carry standard=false.
struct Grid {
  std::vector<double> theta;
  bool standard = false;

  int n() const { return static_cast<int>(theta.size()); }

  // Cyclic forward gaps theta_{l+1} - theta_l; the last one wraps by 2pi.
  // They sum to 2pi and act as Riemann weights.
  std::vector<double> gaps() const {
    std::vector<double> g(theta.size());
    for (std::size_t l = 0; l + 1 < theta.size(); ++l)
      g[l] = theta[l + 1] - theta[l];
    g.back() = theta.front() + kTwoPi - theta.back();
    return g;
  }
};

inline bool operator==(const Grid& a, const Grid& b) {
  return a.standard == b.standard && a.theta == b.theta;
}

// Standard odd grid. Rejects even or too-small n: the discrete transform is
// exact only for odd n (the n-point trigonometric family up to order (n-1)/2
// is orthogonal only then).
inline Grid make_grid(int n) {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument(
        "make_grid: n must be odd and >= 3 (got " + std::to_string(n) +
        "); the discrete-transform exactness lemma requires an odd grid");
  Grid g;
  g.standard = true;
  g.theta.resize(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l)
    g.theta[static_cast<std::size_t>(l)] = (2.0 * l + 1.0 - n) * (kPi / n);
  return g;
}

// Any strictly increasing cyclic grid in [-pi, pi].  Usable for Riemann-sum
// analysis; exactness guarantees and trigonometric interpolation do not
// apply, which is why construction warns.
inline Grid make_custom_grid(std::vector<double> theta) {
  if (theta.size() < 3)
    throw std::invalid_argument("make_custom_grid: need at least 3 angles");
  for (std::size_t l = 0; l < theta.size(); ++l) {
    if (theta[l] < -kPi || theta[l] > kPi)
      throw std::invalid_argument(
          "make_custom_grid: angles must lie in [-pi, pi]");
    if (l > 0 && theta[l] <= theta[l - 1])
      throw std::invalid_argument(
          "make_custom_grid: angles must be strictly increasing");
  }
  detail::warn(
      "non-standard grid (" + std::to_string(theta.size()) +
      " points): Riemann-sum analysis only; exactness guarantees and "
      "trigonometric interpolation require the standard odd grid");
  Grid g;
  g.standard = false;
  g.theta = std::move(theta);
  return g;
}

}  // namespace curvespec
