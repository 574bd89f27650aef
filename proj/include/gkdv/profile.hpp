#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gkdv/nonlinearity.hpp"
#include "gkdv/util/interp.hpp"
#include "gkdv/util/numerics.hpp"
#include "gkdv/util/ode.hpp"
#include "gkdv/util/quadrature.hpp"

namespace gkdv {

namespace detail {

/// Stable evaluation of rad(s) = v s^2 - 2F(s) near its simple zero s0, where
/// the direct form loses all digits: rad(s0-u)/u = 2(f(s0)-v s0) + v u
/// - 2 * mean_{[s0-u,s0]}(f(s0)-f). The mean is a 5-point Gauss rule.
class Radicand {
 public:
  Radicand(const Nonlinearity& nl, double v, double s0) : nl_(&nl), v_(v), s0_(s0) {
    c0_ = nl.f(s0) - v * s0;  // > 0 for admissible f (strict zero condition)
  }

  double c0() const { return c0_; }

  double over_u(double u) const {
    if (u <= 0.0) return 2.0 * c0_;
    static constexpr double gx[5] = {0.046910077030668, 0.230765344947158, 0.5,
                                     0.769234655052841, 0.953089922969332};
    static constexpr double gw[5] = {0.118463442528095, 0.239314335249683, 0.284444444444444,
                                     0.239314335249683, 0.118463442528095};
    double mean = 0.0;
    double fs0 = nl_->f(s0_);
    for (int i = 0; i < 5; ++i) mean += gw[i] * (fs0 - nl_->f(s0_ - u * gx[i]));
    return 2.0 * c0_ + v_ * u - 2.0 * mean;
  }

  /// sqrt(rad(s)) for a caller holding s (accurate away from s0).
  double sqrt_at(double s) const {
    double u = s0_ - s;
    if (u < 0.05 * s0_) return std::sqrt(std::max(over_u(u) * u, 0.0));
    return sqrt_direct(s);
  }

  /// sqrt(rad(s0-u)) for a caller holding the gap u exactly (accurate near s0).
  double sqrt_given_u(double u) const {
    if (u < 0.05 * s0_) return std::sqrt(std::max(over_u(u) * u, 0.0));
    return sqrt_direct(s0_ - u);
  }

 private:
  double sqrt_direct(double s) const {
    double r = v_ * s * s - 2.0 * nl_->F(s);
    if (r < 0.0) {
      if (r > -1e-13 * v_ * s0_ * s0_) return 0.0;
      throw NumericalError("profile: negative radicand at Q=" + std::to_string(s));
    }
    return std::sqrt(r);
  }

  const Nonlinearity* nl_;
  double v_, s0_, c0_;
};

}  // namespace detail

/// Solitary-wave profile Q_v sampled on the half line [0, x_max], extended to
/// negative x by evenness. dQ holds the (nonpositive) derivative samples.
struct SolitonProfile {
  Nonlinearity nl;
  double v = 0.0;
  double s0 = 0.0;
  double x_max = 0.0;
  int n = 0;  // number of intervals; samples at x_i = i*h, i = 0..n
  std::vector<double> Q, dQ;
  double k0_tail = 0.0;  // tail-fit estimate of k0, recorded at solve time

  double h() const { return x_max / double(n); }

  SymmetricCurve curve_Q() const {
    std::vector<double> d2(Q.size());
    for (std::size_t i = 0; i < Q.size(); ++i) d2[i] = v * Q[i] - nl.f(Q[i]);
    return SymmetricCurve(+1, QuinticGrid(0.0, h(), Q, dQ, std::move(d2)));
  }
  SymmetricCurve curve_dQ() const {
    std::vector<double> d1(Q.size()), d2(Q.size());
    for (std::size_t i = 0; i < Q.size(); ++i) {
      d1[i] = v * Q[i] - nl.f(Q[i]);
      d2[i] = (v - nl.fp(Q[i])) * dQ[i];
    }
    return SymmetricCurve(-1, QuinticGrid(0.0, h(), dQ, std::move(d1), std::move(d2)));
  }
};

/// Solves the profile equation through its first-order reduction. The
/// square-root degeneracy at the crest is handled by the substitution
/// Q = s0 - P^2 with the regularized slope at P = 0; once Q drops below
/// 0.9*s0 the direct first-order form takes over.
inline SolitonProfile compute_profile(const Nonlinearity& nl, double v, double x_max = 0.0,
                                      int n = 8192) {
  if (!(v > 0.0) || !(v < nl.v_star()))
    throw std::domain_error("compute_profile: v outside (0, v_star)");
  if (x_max <= 0.0) x_max = 40.0 / std::sqrt(v);
  if (x_max < 20.0 / std::sqrt(v))
    throw std::domain_error("compute_profile: x_max below 20/sqrt(v)");
  if (n < 1024) throw std::domain_error("compute_profile: n >= 1024 required");

  SolitonProfile prof;
  prof.nl = nl;
  prof.v = v;
  prof.x_max = x_max;
  prof.n = n;
  prof.s0 = s0_of_v(nl, v);
  const double s0 = prof.s0;
  detail::Radicand rad(nl, v, s0);
  if (!(rad.c0() > 0.0))
    throw NumericalError("compute_profile: f(s0) - v*s0 <= 0, profile assumptions violated");

  const double h = x_max / double(n);
  prof.Q.assign(std::size_t(n) + 1, 0.0);
  prof.dQ.assign(std::size_t(n) + 1, 0.0);
  prof.Q[0] = s0;
  prof.dQ[0] = 0.0;

  Dopri5 stepper;
  stepper.rel_tol = 1e-13;
  stepper.abs_tol = 1e-15 * s0;
  stepper.h_init = 0.25 * h;

  auto g = [&](double P) { return 0.5 * std::sqrt(std::max(rad.over_u(P * P), 0.0)); };
  Dopri5::Rhs rhs_P = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = g(y[0]);
  };
  Dopri5::Rhs rhs_Q = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = (y[0] > 0.0) ? -rad.sqrt_at(y[0]) : 0.0;
  };

  const double P_switch = std::sqrt(0.1 * s0);
  bool direct = false;
  std::vector<double> y{0.0};
  double t = 0.0;
  for (int i = 1; i <= n; ++i) {
    double target = double(i) * h;
    if (!direct) {
      stepper.integrate(rhs_P, t, y, target);
      double P = y[0];
      prof.Q[std::size_t(i)] = s0 - P * P;
      prof.dQ[std::size_t(i)] = -2.0 * P * g(P);
      if (P >= P_switch) {
        direct = true;
        y[0] = prof.Q[std::size_t(i)];
      }
    } else {
      stepper.integrate(rhs_Q, t, y, target);
      double Qi = std::max(y[0], 0.0);
      prof.Q[std::size_t(i)] = Qi;
      prof.dQ[std::size_t(i)] = Qi > 0.0 ? -rad.sqrt_at(Qi) : 0.0;
    }
  }

  for (int i = 1; i <= n; ++i)
    if (!(prof.Q[std::size_t(i)] < prof.Q[std::size_t(i) - 1]))
      throw NumericalError("compute_profile: samples not strictly decreasing at i=" +
                           std::to_string(i));

  // Tail fit of e^{sqrt(v) x} Q(x): eliminate the leading e^{-2 sqrt(v) x}
  // correction between two stations in the outer half of the grid.
  {
    double sv = std::sqrt(v);
    auto station = [&](double frac) {
      int i = std::min(int(frac * n), n);
      return std::pair<double, double>(double(i) * h,
                                       prof.Q[std::size_t(i)] * std::exp(sv * double(i) * h));
    };
    auto [xa, ya] = station(0.60);
    auto [xb, yb] = station(0.72);
    double za = std::exp(-sv * xa), zb = std::exp(-sv * xb);
    prof.k0_tail = (ya * zb - yb * za) / (zb - za);
  }
  return prof;
}

/// Max residual of the first integral (1/2) dQ^2 + F(Q) - (v/2) Q^2 over the
/// stored samples; zero for the exact profile.
inline double first_integral_residual(const SolitonProfile& p) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.Q.size(); ++i) {
    double r = 0.5 * p.dQ[i] * p.dQ[i] + p.nl.F(p.Q[i]) - 0.5 * p.v * p.Q[i] * p.Q[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

/// Max residual of -Q'' - f(Q) + vQ with Q'' reconstructed from the
/// first-order reduction along the sampled (Q, dQ) pairs.
inline double ode_residual(const SolitonProfile& p) {
  detail::Radicand rad(p.nl, p.v, p.s0);
  double worst = 0.0;
  for (std::size_t i = 1; i < p.Q.size(); ++i) {
    double rsq = rad.sqrt_at(p.Q[i]);
    if (rsq <= 0.0) continue;
    double qpp = (p.v * p.Q[i] - p.nl.f(p.Q[i])) * (-p.dQ[i] / rsq);
    worst = std::max(worst, std::abs(-qpp - p.nl.f(p.Q[i]) + p.v * p.Q[i]));
  }
  return worst;
}

struct K0Result {
  double value = 0.0;       // quadrature value (the reported k0)
  double quadrature = 0.0;
  double tail_fit = 0.0;
  bool warning = false;     // tail-fit disagreement above 1e-4 relative
};

/// k0 = s0 * exp(int_0^{s0} [(s^2 - 2F(s)/v)^{-1/2} - 1/s] ds). The integrand
/// is rewritten as 2F(s) / (s * sqrt(rad) * (s sqrt(v) + sqrt(rad))) to avoid
/// the 1/s - 1/s cancellation near 0, and the inverse-square-root endpoint at
/// s = s0 is absorbed by the substitution s = s0 - tau^2.
inline K0Result compute_k0(const SolitonProfile& p) {
  detail::Radicand rad(p.nl, p.v, p.s0);
  const double sv = std::sqrt(p.v);
  auto g = [&](double tau) {
    double u = tau * tau;
    double s = p.s0 - u;
    double rsq = rad.sqrt_given_u(u);
    return 2.0 * tau * 2.0 * p.nl.F(s) / (s * rsq * (s * sv + rsq));
  };
  double integral = integrate(g, 0.0, std::sqrt(p.s0), 1e-14);
  K0Result r;
  r.quadrature = p.s0 * std::exp(integral);
  r.tail_fit = p.k0_tail;
  r.value = r.quadrature;
  double rel = std::abs(r.quadrature - r.tail_fit) / r.quadrature;
  if (rel > 1e-4) r.warning = true;
  if (rel > 1e-2)
    throw NumericalError("compute_k0: quadrature and tail fit disagree by " + std::to_string(rel));
  return r;
}

enum class QtildeMethod { variation_of_parameters, finite_difference };

/// dQ_v/dv sampled on the profile grid (even in x).
struct ProfileDerivative {
  double v = 0.0;
  double x_max = 0.0;
  int n = 0;
  QtildeMethod method = QtildeMethod::variation_of_parameters;
  std::vector<double> Qt, dQt;    // values and x-derivatives on [0, x_max]
  std::vector<double> cumQt;      // int_0^x Qt dy (odd extension)

  double h() const { return x_max / double(n); }

  SymmetricCurve curve(const SolitonProfile& p) const {
    std::vector<double> d2(Qt.size());
    for (std::size_t i = 0; i < Qt.size(); ++i)
      d2[i] = (v - p.nl.fp(p.Q[i])) * Qt[i] + p.Q[i];
    return SymmetricCurve(+1, QuinticGrid(0.0, h(), Qt, dQt, std::move(d2)));
  }
  /// Antiderivative int_0^x Qt, an odd function (matches the symmetric
  /// antiderivative convention since Qt is even with finite integral).
  SymmetricCurve antiderivative() const {
    std::vector<double> d2(Qt.size());
    for (std::size_t i = 0; i < Qt.size(); ++i) d2[i] = dQt[i];
    return SymmetricCurve(-1, QuinticGrid(0.0, h(), cumQt, Qt, std::move(d2)));
  }
};

/// Variation of parameters: psi solves L_v psi = 0 with psi(0)=1/(f(s0)-v s0),
/// psi'(0)=0; then Qt = -dQ * int_0^x psi Q + (1/2) psi Q^2.
inline ProfileDerivative qtilde_variation_of_parameters(const SolitonProfile& p) {
  ProfileDerivative d;
  d.v = p.v;
  d.x_max = p.x_max;
  d.n = p.n;
  d.method = QtildeMethod::variation_of_parameters;
  const std::size_t m = p.Q.size();
  d.Qt.assign(m, 0.0);
  d.dQt.assign(m, 0.0);

  SymmetricCurve Qc = p.curve_Q();
  detail::Radicand rad(p.nl, p.v, p.s0);
  const double psi0 = 1.0 / rad.c0();

  Dopri5 stepper;
  stepper.rel_tol = 1e-12;
  stepper.abs_tol = 1e-14;
  stepper.h_init = 0.25 * p.h();
  // State: (psi, psi', I) with I = int_0^x psi Q.
  Dopri5::Rhs rhs = [&](double x, const std::vector<double>& y, std::vector<double>& dy) {
    double Qx = Qc.value(x);
    dy[0] = y[1];
    dy[1] = (p.v - p.nl.fp(Qx)) * y[0];
    dy[2] = y[0] * Qx;
  };

  std::vector<double> y{psi0, 0.0, 0.0};
  double t = 0.0;
  const double h = p.h();
  auto emit = [&](std::size_t i) {
    double Qi = p.Q[i], dQi = p.dQ[i], psi = y[0], dpsi = y[1], I = y[2];
    double Qpp = p.v * Qi - p.nl.f(Qi);
    d.Qt[i] = -dQi * I + 0.5 * psi * Qi * Qi;
    d.dQt[i] = -Qpp * I - dQi * psi * Qi + 0.5 * dpsi * Qi * Qi + psi * Qi * dQi;
  };
  emit(0);
  for (int i = 1; i <= p.n; ++i) {
    stepper.integrate(rhs, t, y, double(i) * h);
    emit(std::size_t(i));
  }
  d.cumQt = cumulative_integral(h, d.Qt, d.dQt);
  return d;
}

/// Central difference of two fresh profile solves at v +- 1e-4 v.
inline ProfileDerivative qtilde_finite_difference(const SolitonProfile& p) {
  double hv = 1e-4 * p.v;
  SolitonProfile lo = compute_profile(p.nl, p.v - hv, p.x_max, p.n);
  SolitonProfile hi = compute_profile(p.nl, p.v + hv, p.x_max, p.n);
  ProfileDerivative d;
  d.v = p.v;
  d.x_max = p.x_max;
  d.n = p.n;
  d.method = QtildeMethod::finite_difference;
  const std::size_t m = p.Q.size();
  d.Qt.resize(m);
  d.dQt.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    d.Qt[i] = (hi.Q[i] - lo.Q[i]) / (2.0 * hv);
    d.dQt[i] = (hi.dQ[i] - lo.dQ[i]) / (2.0 * hv);
  }
  d.cumQt = cumulative_integral(p.h(), d.Qt, d.dQt);
  return d;
}

inline ProfileDerivative compute_Qtilde(const SolitonProfile& p,
                                        QtildeMethod method = QtildeMethod::variation_of_parameters) {
  return method == QtildeMethod::variation_of_parameters ? qtilde_variation_of_parameters(p)
                                                         : qtilde_finite_difference(p);
}

/// ||L Qt + Q|| / ||Q|| on the grid, with the second derivative of Qt taken by
/// an order-4 stencil. The defining property of the velocity derivative.
inline double operator_identity_residual(const SolitonProfile& p, const ProfileDerivative& d) {
  const double h = p.h();
  const std::size_t m = p.Q.size();
  // Even extension across x=0: Qt[-i] = Qt[i].
  auto qt = [&](long i) { return d.Qt[std::size_t(std::abs(i))]; };
  double num = 0.0, den = 0.0;
  for (long i = 2; i + 2 < long(m); ++i) {
    double qpp = (-qt(i - 2) + 16 * qt(i - 1) - 30 * qt(i) + 16 * qt(i + 1) - qt(i + 2)) /
                 (12.0 * h * h);
    double Lqt = -qpp - p.nl.fp(p.Q[std::size_t(i)]) * qt(i) + p.v * qt(i);
    double r = Lqt + p.Q[std::size_t(i)];
    num += r * r;
    den += p.Q[std::size_t(i)] * p.Q[std::size_t(i)];
  }
  return std::sqrt(num / den);
}

struct ProfileConstants {
  double v = 0.0, s0 = 0.0, k0 = 0.0;
  double norm_sq = 0.0;       // ||Q||_L2^2
  double norm_sq_formula = 0.0;
  double qq_tilde = 0.0;      // <Q, Qt>
  double qq_tilde_fd = 0.0;   // (1/2) d/dv ||Q||^2 cross-validation
  double mass = 0.0, energy = 0.0, H_value = 0.0;
  double kappa = 0.0;         // valid only when qq_tilde < 0
  bool kappa_defined = false;
};

namespace detail {

inline double half_line_integral(double h, std::span<const double> vals) {
  // Trapezoid over [0, x_max] doubled: Euler-Maclaurin boundary terms vanish
  // (even integrand at 0, exponential decay at x_max), so this superconverges.
  KahanSum s;
  for (std::size_t i = 1; i + 1 < vals.size(); ++i) s.add(vals[i]);
  return 2.0 * h * (0.5 * (vals.front() + vals.back()) + s.value());
}

}  // namespace detail

/// All scalar constants of a profile, each cross-validated by an independent
/// second route (grid quadrature vs s-substitution formula; <Q,Qt> vs half the
/// velocity derivative of ||Q||^2).
inline ProfileConstants inner_products(const SolitonProfile& p, const ProfileDerivative& d) {
  ProfileConstants c;
  c.v = p.v;
  c.s0 = p.s0;
  const std::size_t m = p.Q.size();
  const double h = p.h();

  std::vector<double> q2(m), qqt(m), en(m);
  for (std::size_t i = 0; i < m; ++i) {
    q2[i] = p.Q[i] * p.Q[i];
    qqt[i] = p.Q[i] * d.Qt[i];
    en[i] = 0.5 * p.dQ[i] * p.dQ[i] - p.nl.F(p.Q[i]);
  }
  c.norm_sq = detail::half_line_integral(h, q2);
  c.qq_tilde = detail::half_line_integral(h, qqt);
  c.mass = c.norm_sq;
  c.energy = detail::half_line_integral(h, en);
  c.H_value = c.energy + c.mass;

  // Independent route: ||Q||^2 = 2 int_0^{s0} s^2 / sqrt(v s^2 - 2F) ds,
  // regularized at s = s0 by s = s0 - tau^2.
  detail::Radicand rad(p.nl, p.v, p.s0);
  auto g = [&](double tau) {
    double u = tau * tau;
    double s = p.s0 - u;
    return 2.0 * tau * s * s / rad.sqrt_given_u(u) * 2.0;
  };
  c.norm_sq_formula = integrate(g, 0.0, std::sqrt(p.s0), 1e-13);
  if (std::abs(c.norm_sq - c.norm_sq_formula) > 1e-6 * c.norm_sq)
    throw NumericalError("inner_products: ||Q||^2 quadrature vs formula disagree");

  // Cross-validation of <Q,Qt> by (1/2) d/dv ||Q_v||^2.
  {
    double hv = 1e-4 * p.v;
    SolitonProfile lo = compute_profile(p.nl, p.v - hv, p.x_max, p.n);
    SolitonProfile hi = compute_profile(p.nl, p.v + hv, p.x_max, p.n);
    std::vector<double> q2lo(m), q2hi(m);
    for (std::size_t i = 0; i < m; ++i) {
      q2lo[i] = lo.Q[i] * lo.Q[i];
      q2hi[i] = hi.Q[i] * hi.Q[i];
    }
    double nlo = detail::half_line_integral(h, q2lo);
    double nhi = detail::half_line_integral(h, q2hi);
    c.qq_tilde_fd = 0.25 * (nhi - nlo) / hv;
  }
  if (std::abs(c.qq_tilde - c.qq_tilde_fd) > 1e-6 * std::max(std::abs(c.qq_tilde), 0.01 * c.norm_sq))
    throw NumericalError("inner_products: <Q,Qt> grid vs d/dv||Q||^2 disagree");

  c.k0 = compute_k0(p).value;
  if (c.qq_tilde < 0.0) {
    c.kappa = c.k0 * std::sqrt(2.0 * std::pow(p.v, 1.5) / (-c.qq_tilde));
    c.kappa_defined = true;
  }
  return c;
}

/// kappa = k0 sqrt(2 v^{3/2} / (-<Q,Qt>)); only defined in the unstable regime.
inline double compute_kappa(const ProfileConstants& c) {
  if (!(c.qq_tilde < 0.0))
    throw std::domain_error("compute_kappa: stable-or-critical regime, kappa undefined");
  return c.k0 * std::sqrt(2.0 * std::pow(c.v, 1.5) / (-c.qq_tilde));
}

}  // namespace gkdv
