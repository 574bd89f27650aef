#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gkdv/nonlinearity.hpp"

using namespace gkdv;

namespace {
std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[std::size_t(i)] = a + (b - a) * double(i) / double(n - 1);
  return v;
}
}  // namespace

TEST_CASE("power cubic passes admissibility on {0.1..10}") {
  auto nl = Nonlinearity::power(3.0);
  auto grid = linspace(0.1, 10.0, 200);
  auto rep = check_admissible(nl, grid);
  CHECK(rep.pass);
}

TEST_CASE("linear f fails with f'(0) != 0") {
  auto nl = Nonlinearity::custom(
      "linear", [](double u) { return u; }, [](double u) { return 0.5 * u * u; },
      [](double) { return 1.0; });
  auto grid = linspace(0.1, 2.0, 20);
  auto rep = check_admissible(nl, grid);
  CHECK_FALSE(rep.pass);
  CHECK(rep.first_violation.find("f'(0)") != std::string::npos);
}

TEST_CASE("saturating cubic passes on its convexity range") {
  auto nl = Nonlinearity::saturating_cubic();
  // f'' = (6u - 2u^3)/(1+u^2)^3 changes sign at sqrt(3); all admissible
  // amplitudes s0(v), v < v* = 1, stay below that.
  auto grid = linspace(0.05, 1.6, 160);
  auto rep = check_admissible(nl, grid);
  CHECK(rep.pass);
}

TEST_CASE("even f rejected as not odd") {
  auto nl = Nonlinearity::custom(
      "even-quartic", [](double u) { return u * u * u * u; },
      [](double u) { return std::pow(u, 5.0) / 5.0; },
      [](double u) { return 4.0 * u * u * u; });
  auto grid = linspace(0.1, 2.0, 20);
  auto rep = check_admissible(nl, grid);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("v_star values") {
  CHECK(Nonlinearity::power(3.0).v_star() == kInf);
  CHECK(Nonlinearity::power(7.0).v_star() == kInf);
  CHECK(Nonlinearity::saturating_cubic().v_star() == 1.0);
  // Detection path on a custom copy of the saturating cubic.
  auto nl = Nonlinearity::custom(
      "sat-copy", [](double u) { return u * u * u / (1.0 + u * u); },
      [](double u) { return 0.5 * (u * u - std::log1p(u * u)); },
      [](double u) {
        double u2 = u * u, d = 1.0 + u2;
        return (3.0 * u2 + u2 * u2) / (d * d);
      });
  CHECK(nl.v_star() == Catch::Approx(1.0).margin(1e-12));
  // Power growth in disguise is detected as unbounded.
  auto pw = Nonlinearity::custom(
      "cubic-copy", [](double u) { return u * u * u; },
      [](double u) { return 0.25 * u * u * u * u; }, [](double u) { return 3.0 * u * u; });
  CHECK(pw.v_star() == kInf);
}

TEST_CASE("tilde_F values") {
  auto p3 = Nonlinearity::power(3.0);
  CHECK(tilde_F(p3, 1.0) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(tilde_F(p3, std::sqrt(2.0)) == Catch::Approx(1.0).epsilon(1e-14));
  auto p7 = Nonlinearity::power(7.0);
  CHECK(tilde_F(p7, std::pow(4.0, 1.0 / 6.0)) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(tilde_F(p3, -1.0), std::domain_error);
}

TEST_CASE("s0_of_v closed forms and round trip") {
  auto p3 = Nonlinearity::power(3.0);
  CHECK(s0_of_v(p3, 1.0) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(s0_of_v(p3, 4.0) == Catch::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));
  auto p7 = Nonlinearity::power(7.0);
  CHECK(s0_of_v(p7, 1.0) == Catch::Approx(std::pow(4.0, 1.0 / 6.0)).epsilon(1e-13));
  CHECK_THROWS_AS(s0_of_v(p3, -1.0), std::domain_error);
  CHECK_THROWS_AS(s0_of_v(Nonlinearity::saturating_cubic(), 1.5), std::domain_error);

  // s0_of_v inverts tilde_F across nonlinearities and scales.
  for (double s : {0.3, 0.9, 1.7, 2.4}) {
    double v = tilde_F(p7, s);
    CHECK(s0_of_v(p7, v) == Catch::Approx(s).epsilon(1e-11));
  }
  auto sat = Nonlinearity::saturating_cubic();
  for (double s : {0.2, 0.8, 1.5}) {
    double v = tilde_F(sat, s);
    CHECK(s0_of_v(sat, v) == Catch::Approx(s).epsilon(1e-11));
  }
}

TEST_CASE("strict zero condition v s0 - f(s0) < 0") {
  for (double p : {2.0, 3.0, 4.5, 7.0}) {
    auto nl = Nonlinearity::power(p);
    for (double v : {0.25, 1.0, 4.0}) {
      double s0 = s0_of_v(nl, v);
      CHECK(v * s0 - nl.f(s0) < 0.0);
    }
  }
}

TEST_CASE("tilde_F strict monotonicity sampled") {
  auto sat = Nonlinearity::saturating_cubic();
  double prev = 0.0;
  for (double s = 0.05; s < 4.0; s += 0.05) {
    double cur = tilde_F(sat, s);
    CHECK(cur > prev);
    prev = cur;
  }
}
