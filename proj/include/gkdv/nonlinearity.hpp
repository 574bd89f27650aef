#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gkdv/util/numerics.hpp"

namespace gkdv {

/// The nonlinearity f of the flux, together with its primitive F = int_0^u f
/// and derivative f'. F is supplied explicitly (never auto-integrated): it
/// enters energies and profile formulas directly, so silent quadrature error
/// there is not acceptable.
class Nonlinearity {
 public:
  std::string name;
  double power_exponent = 0.0;  // > 2 when kind == power, else 0

  double f(double u) const { return f_(u); }
  double F(double u) const { return F_(u); }
  double fp(double u) const { return fp_(u); }
  double v_star() const { return v_star_; }
  bool is_power() const { return power_exponent > 0.0; }

  static Nonlinearity power(double p) {
    if (!(p > 1.0)) throw std::domain_error("power nonlinearity requires p > 1");
    Nonlinearity nl;
    std::ostringstream os;
    os << "power(p=" << p << ")";
    nl.name = os.str();
    nl.power_exponent = p;
    nl.f_ = [p](double u) { return std::pow(std::abs(u), p - 1.0) * u; };
    nl.F_ = [p](double u) { return std::pow(std::abs(u), p + 1.0) / (p + 1.0); };
    nl.fp_ = [p](double u) { return p * std::pow(std::abs(u), p - 1.0); };
    nl.v_star_ = kInf;
    return nl;
  }

  /// f(u) = u^3 / (1 + u^2): saturating odd nonlinearity with v* = 1.
  static Nonlinearity saturating_cubic() {
    Nonlinearity nl;
    nl.name = "saturating-cubic";
    nl.f_ = [](double u) { return u * u * u / (1.0 + u * u); };
    nl.F_ = [](double u) { return 0.5 * (u * u - std::log1p(u * u)); };
    nl.fp_ = [](double u) {
      double u2 = u * u, d = 1.0 + u2;
      return (3.0 * u2 + u2 * u2) / (d * d);
    };
    nl.v_star_ = 1.0;
    return nl;
  }

  static Nonlinearity custom(std::string name, std::function<double(double)> f,
                             std::function<double(double)> F, std::function<double(double)> fp) {
    Nonlinearity nl;
    nl.name = std::move(name);
    nl.f_ = std::move(f);
    nl.F_ = std::move(F);
    nl.fp_ = std::move(fp);
    nl.v_star_ = detect_v_star(nl);
    return nl;
  }

  /// Velocity bound v* = lim_{u->inf} f(u)/u, detected on the doubling grid
  /// u = 2^k, k = 0..60. Still rising by >10% per doubling at the end means
  /// unbounded growth, reported as +inf.
  static double detect_v_star(const Nonlinearity& nl) {
    double prev = nl.f(1.0);
    for (int k = 1; k <= 60; ++k) {
      double u = std::ldexp(1.0, k);
      double r = nl.f(u) / u;
      if (!std::isfinite(r)) return kInf;
      if (r < prev * (1.0 - 1e-12))
        throw std::domain_error("v_star: f(u)/u not nondecreasing at u=" + std::to_string(u));
      if (k == 60 && r > 1.10 * prev) return kInf;
      prev = r;
    }
    return prev;
  }

 private:
  std::function<double(double)> f_, F_, fp_;
  double v_star_ = kInf;
};

/// Registry used by configs: kind = "power" (with exponent) or a named built-in.
inline Nonlinearity make_nonlinearity(const std::string& kind, double p = 0.0) {
  if (kind == "power") return Nonlinearity::power(p);
  if (kind == "saturating-cubic") return Nonlinearity::saturating_cubic();
  throw std::domain_error("unknown nonlinearity kind: " + kind);
}

struct AdmissibilityReport {
  bool pass = true;
  std::string first_violation;  // empty when pass
  double worst_residual = 0.0;

  std::string summary() const { return pass ? "admissible" : first_violation; }
};

/// Checks the structural assumptions on f over the supplied positive sample
/// grid: oddness, f(0) = f'(0) = 0, f' nondecreasing (convexity on u >= 0),
/// and F >= 0 even. Tolerance is absolute on the residuals.
inline AdmissibilityReport check_admissible(const Nonlinearity& nl,
                                            std::span<const double> sample_grid,
                                            double tol = 1e-10) {
  AdmissibilityReport rep;
  auto fail = [&](const std::string& what, double res) {
    if (rep.pass) {
      rep.pass = false;
      rep.first_violation = what;
    }
    rep.worst_residual = std::max(rep.worst_residual, std::abs(res));
  };
  if (sample_grid.empty()) throw std::invalid_argument("check_admissible: empty grid");
  double prev_u = 0.0;
  for (double u : sample_grid) {
    if (!(u > prev_u))
      throw std::invalid_argument("check_admissible: grid must be strictly increasing, positive");
    prev_u = u;
  }

  if (std::abs(nl.f(0.0)) > tol) fail("f(0) != 0", nl.f(0.0));
  if (std::abs(nl.fp(0.0)) > tol) fail("f'(0) != 0", nl.fp(0.0));

  double prev_fp = nl.fp(0.0);
  for (double u : sample_grid) {
    double fu = nl.f(u), fmu = nl.f(-u), Fu = nl.F(u), Fmu = nl.F(-u), fpu = nl.fp(u);
    for (double val : {fu, fmu, Fu, Fmu, fpu})
      if (!std::isfinite(val))
        throw NumericalError("check_admissible: non-finite evaluation at u=" + std::to_string(u));
    if (std::abs(fu + fmu) > tol) fail("f not odd at u=" + std::to_string(u), fu + fmu);
    if (Fu < -tol) fail("F(u) < 0 at u=" + std::to_string(u), Fu);
    if (std::abs(Fu - Fmu) > tol) fail("F not even at u=" + std::to_string(u), Fu - Fmu);
    if (fpu < prev_fp - tol)
      fail("f' decreasing at u=" + std::to_string(u), fpu - prev_fp);
    prev_fp = std::max(prev_fp, fpu);
  }
  return rep;
}

/// F~(s) = 2 F(s) / s^2; strictly increasing with F~(0+) = 0 for admissible f.
inline double tilde_F(const Nonlinearity& nl, double s) {
  if (!(s > 0.0)) throw std::domain_error("tilde_F: s must be positive");
  return 2.0 * nl.F(s) / (s * s);
}

/// Soliton amplitude: the unique positive zero of (v/2)s^2 - F(s), found by
/// bracketed root solving on the strictly increasing F~.
inline double s0_of_v(const Nonlinearity& nl, double v);

}  // namespace gkdv

#include "gkdv/util/rootfind.hpp"

namespace gkdv {

inline double s0_of_v(const Nonlinearity& nl, double v) {
  if (!(v > 0.0) || !(v < nl.v_star()))
    throw std::domain_error("s0_of_v: v must lie in (0, v_star)");
  double hi = 1.0;
  for (int k = 0; k < 600 && tilde_F(nl, hi) < v; ++k) hi *= 2.0;
  double lo = hi;
  while (tilde_F(nl, lo) > v) lo *= 0.5;
  double s0 = brent([&](double s) { return tilde_F(nl, s) - v; }, lo, hi, 1e-16);
  // Polish with a few Newton steps; F~'(s) = (s f(s) - 2 F(s)) * 2 / s^3.
  for (int it = 0; it < 4; ++it) {
    double g = tilde_F(nl, s0) - v;
    double gp = 2.0 * (s0 * nl.f(s0) - 2.0 * nl.F(s0)) / (s0 * s0 * s0);
    if (gp <= 0.0) break;
    s0 -= g / gp;
  }
  if (std::abs(tilde_F(nl, s0) - v) > 1e-12 * v)
    throw NumericalError("s0_of_v: root residual above tolerance");
  return s0;
}

}  // namespace gkdv
