#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "gkdv/util/numerics.hpp"

namespace gkdv {

namespace detail {

// Gauss-Kronrod 15(7) nodes/weights on [-1,1].
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kGK15Weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GKResult {
  double integral;
  double error;
};

template <class F>
GKResult gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - hw * kGK15Nodes[i]);
    fv[14 - i] = f(c + hw * kGK15Nodes[i]);
  }
  fv[7] = f(c);
  double k = kGK15Weights[7] * fv[7];
  for (int i = 0; i < 7; ++i) k += kGK15Weights[i] * (fv[i] + fv[14 - i]);
  // Gauss-7 shares the odd Kronrod nodes.
  double g = kG7Weights[3] * fv[7];
  for (int i = 0; i < 3; ++i) g += kG7Weights[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  return {hw * k, std::abs(hw * (k - g))};
}

template <class F>
double adapt(const F& f, double a, double b, double tol, double scale, int depth) {
  auto r = gk15(f, a, b);
  // Roundoff floor: error estimates of smooth panels bottom out near
  // eps * |whole integral|, so splitting further cannot help.
  double floor_tol = 1e-15 * scale;
  if (r.error <= std::max(tol, floor_tol)) return r.integral;
  if (depth > 44) {
    if (r.error > 1e6 * std::max(tol, floor_tol))
      throw NumericalError("adaptive quadrature: no convergence on subinterval");
    return r.integral;
  }
  double m = 0.5 * (a + b);
  return adapt(f, a, m, 0.5 * tol, scale, depth + 1) + adapt(f, m, b, 0.5 * tol, scale, depth + 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod quadrature of f over [a,b].
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-13) {
  if (!(b > a)) return 0.0;
  auto first = detail::gk15(f, a, b);
  double scale = std::abs(first.integral) + first.error;
  if (first.error <= std::max(abs_tol, 1e-15 * scale)) return first.integral;
  double m = 0.5 * (a + b);
  return detail::adapt(f, a, m, 0.5 * abs_tol, scale, 1) +
         detail::adapt(f, m, b, 0.5 * abs_tol, scale, 1);
}

/// Integrate f over [a,b] where f may have an inverse-square-root singularity
/// at the right endpoint b: substitute x = b - tau^2.
template <class F>
double integrate_sqrt_endpoint(const F& f, double a, double b, double abs_tol = 1e-13) {
  if (!(b > a)) return 0.0;
  auto g = [&](double tau) { return 2.0 * tau * f(b - tau * tau); };
  return integrate(g, 0.0, std::sqrt(b - a), abs_tol);
}

}  // namespace gkdv
