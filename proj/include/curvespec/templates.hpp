#pragma once

#include <stdexcept>
#include <string>

#include "curvespec/errors.hpp"
#include "curvespec/spectral.hpp"
#include "curvespec/vec2.hpp"

namespace curvespec {

// Band-limited closed-curve templates given directly by low-order Fourier
// coefficients, so truth curves used in experiments have known spectra and
// nothing is lost to truncation bookkeeping.

inline FourierCoeffs circle_coeffs(double radius = 1.0, Vec2 center = {}) {
  if (!(radius > 0.0))
    throw std::invalid_argument("circle_coeffs: radius must be positive");
  FourierCoeffs c = zero_coeffs(1);
  c.mu[0] = center;
  c.mu[1] = {radius, 0.0};
  c.nu[0] = {0.0, radius};
  return c;
}

inline FourierCoeffs ellipse_coeffs(double rx, double ry, Vec2 center = {}) {
  if (!(rx > 0.0) || !(ry > 0.0))
    throw std::invalid_argument("ellipse_coeffs: semi-axes must be positive");
  FourierCoeffs c = zero_coeffs(1);
  c.mu[0] = center;
  c.mu[1] = {rx, 0.0};
  c.nu[0] = {0.0, ry};
  return c;
}

namespace detail {

// Radial wobble r(theta) = 1 + eps cos(k theta) expanded into Cartesian
// coefficients: cos(k theta) cos(theta) = (cos((k+1)theta) + cos((k-1)theta))/2
// and cos(k theta) sin(theta) = (sin((k+1)theta) - sin((k-1)theta))/2.
inline FourierCoeffs lobed_coeffs(int k, double eps, const char* who) {
  if (!(eps > -1.0 && eps < 1.0))
    throw std::invalid_argument(std::string(who) +
                                ": |eps| must be < 1 to keep the curve simple");
  FourierCoeffs c = zero_coeffs(k + 1);
  c.mu[1] = {1.0, 0.0};
  c.nu[0] = {0.0, 1.0};
  c.mu[static_cast<std::size_t>(k - 1)] += Vec2{eps / 2.0, 0.0};
  c.nu[static_cast<std::size_t>(k - 2)] += Vec2{0.0, -eps / 2.0};
  c.mu[static_cast<std::size_t>(k + 1)] += Vec2{eps / 2.0, 0.0};
  c.nu[static_cast<std::size_t>(k)] += Vec2{0.0, eps / 2.0};
  return c;
}

}  // namespace detail

// r(theta) = 1 + eps cos(3 theta): three rounded lobes, band-limited to
// order 4.
inline FourierCoeffs three_lobe_coeffs(double eps = 0.3) {
  return detail::lobed_coeffs(3, eps, "three_lobe_coeffs");
}

// r(theta) = 1 + eps cos(5 theta): five rounded lobes, band-limited to
// order 6.
inline FourierCoeffs five_lobe_coeffs(double eps = 0.2) {
  return detail::lobed_coeffs(5, eps, "five_lobe_coeffs");
}

// Template lookup with default parameters, for configuration files.
inline FourierCoeffs template_by_name(const std::string& name) {
  if (name == "circle") return circle_coeffs();
  if (name == "ellipse") return ellipse_coeffs(1.5, 1.0);
  if (name == "three-lobe") return three_lobe_coeffs();
  if (name == "five-lobe") return five_lobe_coeffs();
  throw std::invalid_argument(
      "template_by_name: unknown template '" + name +
      "' (expected circle, ellipse, three-lobe or five-lobe)");
}

}  // namespace curvespec
