#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gkdv/profile.hpp"

using namespace gkdv;

namespace {

// Closed-form profiles for the two sech families. Substituting them into
// -Q'' - f(Q) + vQ confirms they solve the profile equation exactly.
double sech(double x) { return 1.0 / std::cosh(x); }

double closed_form(double p, double v, double x) {
  if (p == 3.0) return std::sqrt(2.0 * v) * sech(std::sqrt(v) * x);
  if (p == 2.0) return 1.5 * v * sech(0.5 * std::sqrt(v) * x) * sech(0.5 * std::sqrt(v) * x);
  throw std::logic_error("no closed form");
}

double sup_error_vs_closed_form(const SolitonProfile& prof, double p) {
  double worst = 0.0;
  for (std::size_t i = 0; i < prof.Q.size(); ++i) {
    double x = double(i) * prof.h();
    worst = std::max(worst, std::abs(prof.Q[i] - closed_form(p, prof.v, x)));
  }
  return worst;
}

}  // namespace

TEST_CASE("closed-form oracle p=3 and p=2, v=1 and v=4") {
  for (double p : {2.0, 3.0}) {
    for (double v : {1.0, 4.0}) {
      auto prof = compute_profile(Nonlinearity::power(p), v);
      INFO("p=" << p << " v=" << v);
      CHECK(sup_error_vs_closed_form(prof, p) < 1e-8);
      CHECK(prof.Q[0] == Catch::Approx(prof.s0).margin(1e-14));
      CHECK(prof.dQ[0] == 0.0);
    }
  }
}

TEST_CASE("profile invariants: first integral and ODE residual") {
  for (double p : {2.0, 3.0, 7.0}) {
    auto prof = compute_profile(Nonlinearity::power(p), 1.0);
    INFO("p=" << p);
    CHECK(first_integral_residual(prof) < 1e-10 * prof.s0);
    CHECK(ode_residual(prof) < 1e-10 * prof.s0);
  }
  auto sat = compute_profile(Nonlinearity::saturating_cubic(), 0.5);
  CHECK(first_integral_residual(sat) < 1e-10 * sat.s0);
  CHECK(ode_residual(sat) < 1e-10 * sat.s0);
}

TEST_CASE("pointwise tail bound Q <= k0 e^{-sqrt(v)x} and tail asymptotics") {
  auto prof = compute_profile(Nonlinearity::power(7.0), 1.0);
  auto k0 = compute_k0(prof);
  for (std::size_t i = 0; i < prof.Q.size(); ++i) {
    double x = double(i) * prof.h();
    CHECK(prof.Q[i] <= k0.value * std::exp(-x) * (1.0 + 1e-12));
  }
  // |Q - k0 e^{-x}| <= C e^{-2x} on the outer half of the grid. Past
  // x ~ 27 the e^{-2x} correction sinks below the double-precision noise of
  // Q itself, so the constant is measured where it is observable and the
  // remainder of the outer half is held to a roundoff-scaled envelope.
  double C = 0.0;
  for (std::size_t i = prof.Q.size() / 2; i < prof.Q.size(); ++i) {
    double x = double(i) * prof.h();
    if (x > 26.0) break;
    C = std::max(C, std::abs(prof.Q[i] - k0.value * std::exp(-x)) / std::exp(-2.0 * x));
  }
  CHECK(C < 10.0 * k0.value * k0.value);
  for (std::size_t i = prof.Q.size() / 2; i < prof.Q.size(); ++i) {
    double x = double(i) * prof.h();
    double bound = std::max(C * std::exp(-2.0 * x), 1e-12 * k0.value * std::exp(-x));
    CHECK(std::abs(prof.Q[i] - k0.value * std::exp(-x)) <= bound);
  }
}

TEST_CASE("k0 closed forms: p=3 -> 2 sqrt(2), p=2 -> 6") {
  auto p3 = compute_profile(Nonlinearity::power(3.0), 1.0);
  auto r3 = compute_k0(p3);
  CHECK(r3.value == Catch::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK_FALSE(r3.warning);

  auto p2 = compute_profile(Nonlinearity::power(2.0), 1.0);
  auto r2 = compute_k0(p2);
  CHECK(r2.value == Catch::Approx(6.0).epsilon(1e-9));

  // Quadrature and tail fit agree to 1e-6 relative for p=7.
  auto p7 = compute_profile(Nonlinearity::power(7.0), 1.0);
  auto r7 = compute_k0(p7);
  CHECK(std::abs(r7.quadrature - r7.tail_fit) / r7.quadrature < 1e-6);
}

TEST_CASE("Qtilde center value, evenness, operator identity") {
  auto p3 = compute_profile(Nonlinearity::power(3.0), 1.0);
  auto qt = compute_Qtilde(p3);
  // Center value s0^2 / (2 (f(s0) - v s0)) = 1/sqrt(2) for p=3, v=1.
  CHECK(qt.Qt[0] == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(qt.dQt[0] == 0.0);

  auto p7 = compute_profile(Nonlinearity::power(7.0), 1.0);
  auto qt7 = compute_Qtilde(p7);
  CHECK(operator_identity_residual(p7, qt7) < 1e-7);

  // Evenness is structural: the curve evaluates symmetrically.
  auto curve = qt7.curve(p7);
  CHECK(curve.value(1.3) == curve.value(-1.3));
}

TEST_CASE("Qtilde variation-of-parameters vs finite-difference") {
  auto p7 = compute_profile(Nonlinearity::power(7.0), 1.0);
  auto a = compute_Qtilde(p7, QtildeMethod::variation_of_parameters);
  auto b = compute_Qtilde(p7, QtildeMethod::finite_difference);
  auto ca = inner_products(p7, a);
  double qq_b = 0.0;
  {
    std::vector<double> prod(p7.Q.size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = p7.Q[i] * b.Qt[i];
    qq_b = detail::half_line_integral(p7.h(), prod);
  }
  CHECK(std::abs(ca.qq_tilde - qq_b) / std::abs(ca.qq_tilde) < 1e-5);
}

TEST_CASE("inner products p=3 v=1: ||Q||^2 = 4, <Q,Qt> = 1") {
  auto prof = compute_profile(Nonlinearity::power(3.0), 1.0);
  auto qt = compute_Qtilde(prof);
  auto c = inner_products(prof, qt);
  CHECK(c.norm_sq == Catch::Approx(4.0).epsilon(1e-9));
  CHECK(c.qq_tilde == Catch::Approx(1.0).epsilon(1e-8));
  CHECK(c.mass == Catch::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("criticality: <Q,Qt> sign matches sign(5-p), vanishes at p=5") {
  struct Row { double p; int sign; };
  for (auto [p, sign] : {Row{3, +1}, Row{4, +1}, Row{4.5, +1}, Row{5, 0}, Row{6, -1}, Row{7, -1}}) {
    auto prof = compute_profile(Nonlinearity::power(p), 1.0);
    auto qt = compute_Qtilde(prof);
    auto c = inner_products(prof, qt);
    INFO("p=" << p << " qq=" << c.qq_tilde);
    if (sign == 0) {
      CHECK(std::abs(c.qq_tilde) <= 1e-6 * c.norm_sq);
    } else {
      CHECK(c.qq_tilde * double(sign) > 0.0);
      // Scaling law for power f: <Q,Qt> = (5-p)/(4(p-1)) ||Q_1||^2 at v=1.
      double predicted = (5.0 - p) / (4.0 * (p - 1.0)) * c.norm_sq;
      CHECK(c.qq_tilde == Catch::Approx(predicted).epsilon(1e-7));
    }
  }
}

TEST_CASE("kappa: error in stable regime, finite in unstable, v-scaling") {
  auto p3 = compute_profile(Nonlinearity::power(3.0), 1.0);
  auto c3 = inner_products(p3, compute_Qtilde(p3));
  CHECK_THROWS_AS(compute_kappa(c3), std::domain_error);
  CHECK_FALSE(c3.kappa_defined);

  auto p7 = compute_profile(Nonlinearity::power(7.0), 1.0);
  auto c7 = inner_products(p7, compute_Qtilde(p7));
  double kappa1 = compute_kappa(c7);
  CHECK(kappa1 > 0.0);
  CHECK(std::isfinite(kappa1));

  // kappa(v) = v^{3/2} kappa(1) for p=7 (from the profile scaling laws),
  // verified by direct recomputation at v=4.
  auto p7v4 = compute_profile(Nonlinearity::power(7.0), 4.0);
  auto c7v4 = inner_products(p7v4, compute_Qtilde(p7v4));
  double kappa4 = compute_kappa(c7v4);
  CHECK(kappa4 / kappa1 == Catch::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("grid refinement changes constants below 1e-8 relative") {
  auto coarse = compute_profile(Nonlinearity::power(7.0), 1.0, 40.0, 4096);
  auto fine = compute_profile(Nonlinearity::power(7.0), 1.0, 40.0, 8192);
  auto cc = inner_products(coarse, compute_Qtilde(coarse));
  auto cf = inner_products(fine, compute_Qtilde(fine));
  CHECK(std::abs(cc.k0 - cf.k0) / cf.k0 < 1e-8);
  CHECK(std::abs(cc.norm_sq - cf.norm_sq) / cf.norm_sq < 1e-8);
  CHECK(std::abs(cc.qq_tilde - cf.qq_tilde) / std::abs(cf.qq_tilde) < 1e-8);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(compute_profile(Nonlinearity::power(3.0), -1.0), std::domain_error);
  CHECK_THROWS_AS(compute_profile(Nonlinearity::saturating_cubic(), 1.2), std::domain_error);
  CHECK_THROWS_AS(compute_profile(Nonlinearity::power(3.0), 1.0, 5.0), std::domain_error);
  CHECK_THROWS_AS(compute_profile(Nonlinearity::power(3.0), 1.0, 40.0, 100), std::domain_error);
}
