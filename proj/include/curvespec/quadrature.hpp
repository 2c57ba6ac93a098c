#pragma once

#include <cmath>
#include <cstddef>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "curvespec/angles.hpp"
#include "curvespec/spectral.hpp"
#include "curvespec/vec2.hpp"

namespace curvespec {

// Adaptive Gauss-Kronrod integral over [-pi, pi].
template <class F>
double integrate_circle(F&& f, double tol = 1e-10) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      std::forward<F>(f), -kPi, kPi, 12, tol);
}

// Exact (quadrature-grade) Fourier coefficients of a curve evaluable at
// arbitrary angles:
//   mu_0 = (1/2pi) int curve,  mu_j = (1/pi) int curve cos(j .),
//   nu_j = (1/pi) int curve sin(j .).
// Reference values for quantifying discretisation error of the grid sums.
template <class Curve>
FourierCoeffs fourier_coeffs_by_quadrature(Curve&& curve, int J,
                                           double tol = 1e-10) {
  FourierCoeffs c = zero_coeffs(J);
  auto component = [&](auto&& f) { return integrate_circle(f, tol); };
  c.mu[0] = {component([&](double t) { return curve(t).x; }) / kTwoPi,
             component([&](double t) { return curve(t).y; }) / kTwoPi};
  for (int j = 1; j <= J; ++j) {
    c.mu[static_cast<std::size_t>(j)] = {
        component([&](double t) { return curve(t).x * std::cos(j * t); }) / kPi,
        component([&](double t) { return curve(t).y * std::cos(j * t); }) / kPi};
    c.nu[static_cast<std::size_t>(j - 1)] = {
        component([&](double t) { return curve(t).x * std::sin(j * t); }) / kPi,
        component([&](double t) { return curve(t).y * std::sin(j * t); }) / kPi};
  }
  return c;
}

}  // namespace curvespec
