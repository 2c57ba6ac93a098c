#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvespec/angles.hpp"
#include "curvespec/errors.hpp"

namespace curvespec {

// Parametric circle diffeomorphism: the time-1 flow of
//   x'(t) = f_w(x(t)),   f_w(x) = sum_{j=1}^{2m} w_j t_j(x),
// where t_j are the trigonometric cardinal functions on 2m+1 equidistant
// knots x_i = -pi + 2pi i/(2m+1).  w_0 is pinned to 0 so the field vanishes
// at +-pi and the endpoints stay fixed.
struct DiffeoSpec {
  int m = 0;
  std::vector<double> knots;        // x_0..x_{2m}
  std::vector<double> w;            // w_1..w_{2m}
  std::vector<double> denominators; // cached cardinal denominators
  // f_w is the order-m trigonometric interpolant of the weights at the
  // knots; these are its series coefficients, cached so the variational
  // integrator can evaluate f_w' in O(m).
  std::vector<double> field_cos;    // a_0..a_m
  std::vector<double> field_sin;    // b_1..b_m

  int basis_size() const { return 2 * m + 1; }
  double weight(int j) const {  // w_j with the pinned w_0
    return j == 0 ? 0.0 : w[static_cast<std::size_t>(j - 1)];
  }
  bool zero_field() const {
    return std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; });
  }
};

inline DiffeoSpec make_diffeo(int m, std::vector<double> w) {
  if (m < 0) throw std::invalid_argument("make_diffeo: m must be >= 0");
  if (static_cast<int>(w.size()) != 2 * m)
    throw std::invalid_argument("make_diffeo: need exactly 2m weights (w_1..w_2m)");
  for (double v : w)
    if (!std::isfinite(v))
      throw std::invalid_argument("make_diffeo: weights must be finite");
  DiffeoSpec spec;
  spec.m = m;
  spec.w = std::move(w);
  const int count = spec.basis_size();
  spec.knots.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    spec.knots[static_cast<std::size_t>(i)] = -kPi + kTwoPi * i / count;
  spec.denominators.assign(static_cast<std::size_t>(count), 1.0);
  for (int j = 0; j < count; ++j)
    for (int k = 0; k < count; ++k)
      if (k != j)
        spec.denominators[static_cast<std::size_t>(j)] *= std::sin(
            (spec.knots[static_cast<std::size_t>(j)] -
             spec.knots[static_cast<std::size_t>(k)]) /
            2.0);
  spec.field_cos.assign(static_cast<std::size_t>(m) + 1, 0.0);
  spec.field_sin.assign(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j <= m; ++j) {
    double a = 0.0, b = 0.0;
    for (int i = 1; i < count; ++i) {  // i = 0 carries the pinned w_0 = 0
      a += spec.weight(i) * std::cos(j * spec.knots[static_cast<std::size_t>(i)]);
      b += spec.weight(i) * std::sin(j * spec.knots[static_cast<std::size_t>(i)]);
    }
    spec.field_cos[static_cast<std::size_t>(j)] = (j == 0 ? 1.0 : 2.0) * a / count;
    if (j >= 1) spec.field_sin[static_cast<std::size_t>(j - 1)] = 2.0 * b / count;
  }
  return spec;
}

inline DiffeoSpec negated(const DiffeoSpec& spec) {
  DiffeoSpec out = spec;
  for (double& v : out.w) v = -v;
  for (double& v : out.field_cos) v = -v;
  for (double& v : out.field_sin) v = -v;
  return out;
}

// Trigonometric cardinal function
//   t_j(x) = prod_{k != j} sin((x - x_k)/2) / prod_{k != j} sin((x_j - x_k)/2),
// satisfying t_j(x_k) = 1{j == k}.  2pi-periodic since 2m factors flip sign
// in pairs.
inline double cardinal_basis(const DiffeoSpec& spec, int j, double x) {
  if (j < 0 || j >= spec.basis_size())
    throw std::invalid_argument("cardinal_basis: index out of range");
  x = wrap_angle(x);
  double numerator = 1.0;
  for (int k = 0; k < spec.basis_size(); ++k)
    if (k != j)
      numerator *= std::sin((x - spec.knots[static_cast<std::size_t>(k)]) / 2.0);
  return numerator / spec.denominators[static_cast<std::size_t>(j)];
}

// Derivative of the cardinal function,
//   t_j'(x) = sum_{k != j} cos((x - x_k)/2) prod_{i != j,k} sin((x - x_i)/2)
//             / ( 2 prod_{k != j} sin((x_j - x_k)/2) ).
inline double cardinal_basis_deriv(const DiffeoSpec& spec, int j, double x) {
  if (j < 0 || j >= spec.basis_size())
    throw std::invalid_argument("cardinal_basis_deriv: index out of range");
  x = wrap_angle(x);
  const int count = spec.basis_size();
  double sum = 0.0;
  for (int k = 0; k < count; ++k) {
    if (k == j) continue;
    double term = std::cos((x - spec.knots[static_cast<std::size_t>(k)]) / 2.0);
    for (int i = 0; i < count; ++i)
      if (i != j && i != k)
        term *= std::sin((x - spec.knots[static_cast<std::size_t>(i)]) / 2.0);
    sum += term;
  }
  return sum / (2.0 * spec.denominators[static_cast<std::size_t>(j)]);
}

namespace detail {

// All cardinal values at once via prefix/suffix products: O(m) trig calls.
inline void cardinal_all_values(const DiffeoSpec& spec, double x,
                                std::vector<double>& out) {
  const int count = spec.basis_size();
  out.resize(static_cast<std::size_t>(count));
  thread_local std::vector<double> d, pre, suf;
  d.resize(static_cast<std::size_t>(count));
  pre.resize(static_cast<std::size_t>(count) + 1);
  suf.resize(static_cast<std::size_t>(count) + 1);
  for (int k = 0; k < count; ++k)
    d[static_cast<std::size_t>(k)] =
        std::sin((x - spec.knots[static_cast<std::size_t>(k)]) / 2.0);
  pre[0] = 1.0;
  for (int k = 0; k < count; ++k)
    pre[static_cast<std::size_t>(k) + 1] =
        pre[static_cast<std::size_t>(k)] * d[static_cast<std::size_t>(k)];
  suf[static_cast<std::size_t>(count)] = 1.0;
  for (int k = count - 1; k >= 0; --k)
    suf[static_cast<std::size_t>(k)] =
        suf[static_cast<std::size_t>(k) + 1] * d[static_cast<std::size_t>(k)];
  for (int j = 0; j < count; ++j)
    out[static_cast<std::size_t>(j)] = pre[static_cast<std::size_t>(j)] *
                                       suf[static_cast<std::size_t>(j) + 1] /
                                       spec.denominators[static_cast<std::size_t>(j)];
}

}  // namespace detail

// f_w(x) = sum_j w_j t_j(x); vanishes at the pinned knot x_0 = -pi.
inline double velocity(const DiffeoSpec& spec, double x) {
  if (spec.m == 0) return 0.0;
  x = wrap_angle(x);
  thread_local std::vector<double> values;
  detail::cardinal_all_values(spec, x, values);
  double f = 0.0;
  for (int j = 1; j < spec.basis_size(); ++j)
    f += spec.weight(j) * values[static_cast<std::size_t>(j)];
  return f;
}

// d/dx f_w via the cached series of the field (equal to the weighted sum of
// cardinal derivatives, evaluated without the O(m^3) product expansion).
inline double velocity_deriv(const DiffeoSpec& spec, double x) {
  x = wrap_angle(x);
  double f = 0.0;
  for (int j = 1; j <= spec.m; ++j)
    f += j * (-spec.field_cos[static_cast<std::size_t>(j)] * std::sin(j * x) +
              spec.field_sin[static_cast<std::size_t>(j - 1)] * std::cos(j * x));
  return f;
}

// Fixed-step integrator configuration for the unit-time flow.
struct FlowConfig {
  int steps = 100;
  const char* method = "rk4";
};

namespace detail {

// One classical RK4 step of x' = f(x) (autonomous scalar field).
template <class Field>
double rk4_step(Field&& f, double x, double h) {
  const double k1 = f(x);
  const double k2 = f(x + 0.5 * h * k1);
  const double k3 = f(x + 0.5 * h * k2);
  const double k4 = f(x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

// Time-1 flow phi_w(theta) of x' = f_w(x) from x(0) = theta.  Fixes the
// endpoints (phi(+-pi) = +-pi) and is strictly increasing on [-pi, pi].
inline double flow(const DiffeoSpec& spec, const FlowConfig& cfg,
                   double theta) {
  if (cfg.steps < 1) throw std::invalid_argument("flow: steps must be >= 1");
  if (spec.zero_field()) return theta;
  const double h = 1.0 / cfg.steps;
  double x = theta;
  for (int s = 0; s < cfg.steps; ++s)
    x = detail::rk4_step([&](double y) { return velocity(spec, y); }, x, h);
  return x;
}

// phi_{-w}: the exact inverse of phi_w by time reversal of the autonomous
// field.
inline double inverse_flow(const DiffeoSpec& spec, const FlowConfig& cfg,
                           double theta) {
  return flow(negated(spec), cfg, theta);
}

// Inverse flow evaluated with all weight sensitivities
// u_i(1) = d phi_{-w}(theta) / d w_i, i = 1..2m, from the variational system
//   u_i'(s) = f_{-w}'(x(s)) u_i(s) - t_i(x(s)),   u_i(0) = 0,
// integrated jointly with the state so both share evaluation points.
struct FlowWithSensitivities {
  double value = 0.0;
  std::vector<double> du_dw;  // index i-1 holds d/dw_i
};

inline FlowWithSensitivities inverse_flow_with_sensitivities(
    const DiffeoSpec& spec, const FlowConfig& cfg, double theta) {
  if (cfg.steps < 1)
    throw std::invalid_argument(
        "inverse_flow_with_sensitivities: steps must be >= 1");
  const int nw = 2 * spec.m;
  const double h = 1.0 / cfg.steps;

  // Augmented state y = (x, u_1..u_2m).
  std::vector<double> y(static_cast<std::size_t>(nw) + 1, 0.0);
  y[0] = theta;
  std::vector<double> cardinal;
  auto rhs = [&](const std::vector<double>& state, std::vector<double>& out) {
    const double x = wrap_angle(state[0]);
    detail::cardinal_all_values(spec, x, cardinal);
    double f = 0.0;
    for (int j = 1; j < spec.basis_size(); ++j)
      f += spec.weight(j) * cardinal[static_cast<std::size_t>(j)];
    const double fp = velocity_deriv(spec, x);
    out[0] = -f;  // field of -w
    for (int i = 1; i <= nw; ++i)
      out[static_cast<std::size_t>(i)] =
          -fp * state[static_cast<std::size_t>(i)] -
          cardinal[static_cast<std::size_t>(i)];
    return;
  };

  std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()),
      tmp(y.size());
  for (int s = 0; s < cfg.steps; ++s) {
    rhs(y, k1);
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  FlowWithSensitivities out;
  out.value = y[0];
  out.du_dw.assign(y.begin() + 1, y.end());
  return out;
}

// d phi_{-w}(theta) / d w_i for one weight index (1-based).
inline double flow_sensitivity(const DiffeoSpec& spec, const FlowConfig& cfg,
                               double theta, int i) {
  if (i < 1 || i > 2 * spec.m)
    throw std::invalid_argument("flow_sensitivity: weight index out of range");
  return inverse_flow_with_sensitivities(spec, cfg, theta)
      .du_dw[static_cast<std::size_t>(i - 1)];
}

// Flow evaluated over an ascending set of angles, with a step-size sanity
// check: diffeomorphism outputs must be strictly increasing, so a violation
// means the integrator resolution is too coarse for this field.
inline std::vector<double> flow_grid(const DiffeoSpec& spec,
                                     const FlowConfig& cfg,
                                     std::span<const double> sorted_thetas) {
  std::vector<double> out;
  out.reserve(sorted_thetas.size());
  for (double theta : sorted_thetas) out.push_back(flow(spec, cfg, theta));
  for (std::size_t l = 1; l < out.size(); ++l)
    if (out[l] <= out[l - 1])
      throw numeric_error(
          "flow_grid: flow outputs are not strictly increasing; increase "
          "FlowConfig.steps (currently " +
          std::to_string(cfg.steps) + ")");
  return out;
}

}  // namespace curvespec
