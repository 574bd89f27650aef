#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gkdv/spectral.hpp"

using namespace gkdv;

namespace {

const SolitonProfile& profile_p3() {
  static SolitonProfile p = compute_profile(Nonlinearity::power(3.0), 1.0);
  return p;
}
const SolitonProfile& profile_p7() {
  static SolitonProfile p = compute_profile(Nonlinearity::power(7.0), 1.0);
  return p;
}

struct P7Spectral {
  UnstablePair pair;
  DiscreteOperator op;   // assembled on the pair grid
  AdjointBasis ab;
  double qq_tilde;
};

const P7Spectral& p7_spectral() {
  static P7Spectral s = [] {
    P7Spectral out;
    auto qt = compute_Qtilde(profile_p7());
    auto c = inner_products(profile_p7(), qt);
    out.qq_tilde = c.qq_tilde;
    out.pair = unstable_pair(profile_p7(), c.qq_tilde);
    out.op = assemble_L(profile_p7(), out.pair.grid.xm, out.pair.grid.n);
    out.ab = adjoint_basis(out.op, out.pair);
    return out;
  }();
  return s;
}

}  // namespace

TEST_CASE("discrete L: kernel residual, symmetry, order-4 refinement") {
  auto op = assemble_L(profile_p3(), 25.0, 2048);
  CHECK(kernel_residual(op) < 1e-7);
  CHECK(symmetry_defect(op) < 1e-12);

  auto op2 = assemble_L(profile_p3(), 25.0, 4096 + 1);
  double r1 = kernel_residual(op);
  double r2 = kernel_residual(op2);
  CHECK(r1 / r2 > 0.8 * 16.0);
}

TEST_CASE("Poeschl-Teller fixture: lambda_min = -3, kernel at 0") {
  // p=3, v=1: L = -dxx - 6 sech^2 + 1, bound levels at -3 and 0.
  auto op = assemble_L(profile_p3(), 25.0, 2499);
  auto eig = negative_eigenvalue(op);
  CHECK(eig.lambda_neg == Catch::Approx(-3.0).margin(1e-6));
  CHECK(std::abs(eig.lambda_kernel) < 1e-7);

  VectorXd dq = op.dxQ / op.nrm(op.dxQ);
  double cosine = std::abs(op.ip(eig.vec_kernel, dq));
  CHECK(cosine >= 1.0 - 1e-8);

  // Order-4 convergence of the ground state between two resolutions.
  auto opa = assemble_L(profile_p3(), 25.0, 624);
  auto opb = assemble_L(profile_p3(), 25.0, 1249);
  double ea = std::abs(negative_eigenvalue(opa).lambda_neg + 3.0);
  double eb = std::abs(negative_eigenvalue(opb).lambda_neg + 3.0);
  double order = std::log2(ea / eb);
  CHECK(order > 3.7);
}

TEST_CASE("Fourier scheme cross-check of the ground state") {
  auto op = assemble_L(profile_p3(), 20.0, 512, Scheme::fourier);
  MatrixXd Lm = MatrixXd(op.L);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (Lm + Lm.transpose()));
  CHECK(es.eigenvalues()(0) == Catch::Approx(-3.0).margin(1e-8));
}

TEST_CASE("p=7 exactly one negative eigenvalue") {
  auto op = assemble_L(profile_p7(), 25.0, 1999);
  auto eig = negative_eigenvalue(op);
  CHECK(eig.lambda_neg < 0.0);
  CHECK(std::abs(eig.lambda_kernel) < 1e-6);
}

TEST_CASE("instability pair p=7: nu, residual, defining identities") {
  const auto& s = p7_spectral();
  REQUIRE(s.pair.found);
  CHECK(s.pair.nu > 0.0);
  CHECK(s.pair.nu == Catch::Approx(1.6806377).epsilon(1e-5));
  CHECK(std::abs(s.pair.nu - s.pair.nu_refined) <= 1e-6 * s.pair.nu);
  CHECK(s.pair.residual <= 1e-8);

  const auto& op = s.op;
  const auto& pr = s.pair;
  double h = pr.grid.h();

  // Unit norms and reflection (structural).
  CHECK(std::sqrt(h) * pr.Ym.norm() == Catch::Approx(1.0).margin(1e-12));
  CHECK(std::sqrt(h) * pr.Yp.norm() == Catch::Approx(1.0).margin(1e-12));
  for (int i : {0, pr.grid.n / 3, pr.grid.n / 2, pr.grid.n - 1})
    CHECK(pr.Yp(i) == pr.Ym(pr.grid.reflect(i)));

  // The reflected residual: dx(L Yp) - nu Yp ~ 0.
  VectorXd resp = op.Dx * (op.L * pr.Yp) - pr.nu * pr.Yp;
  CHECK(std::sqrt(h) * resp.norm() <= 1e-8);

  // Zero integrals.
  CHECK(std::abs(h * pr.Ym.sum()) <= 1e-8);
  CHECK(std::abs(h * pr.Yp.sum()) <= 1e-8);

  // <Y, L Y> = 0 and <Y-, L Y+> bounded away from zero.
  CHECK(std::abs(op.ip(pr.Ym, op.L * pr.Ym)) <= 1e-8);
  CHECK(std::abs(op.ip(pr.Yp, op.L * pr.Yp)) <= 1e-8);
  double cross = op.ip(pr.Ym, op.L * pr.Yp);
  CHECK(std::abs(cross - op.ip(pr.Yp, op.L * pr.Ym)) <= 1e-10);
  CHECK(std::abs(cross) > 1e-3);

  // {Y-, Y+, dxQ} linearly independent: normalized Gram determinant.
  VectorXd q = op.dxQ / op.nrm(op.dxQ);
  Eigen::Matrix3d G;
  VectorXd vs[3] = {pr.Ym, pr.Yp, q};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) G(a, b) = op.ip(vs[a], vs[b]);
  CHECK(G.determinant() > 1e-4);

  // Eigenvalues of dx L come in +- pairs: -nu is also an eigenvalue, carried
  // by the reflected eigenvector.
  VectorXd resm = op.Dx * (op.L * pr.Ym) + pr.nu * pr.Ym;
  CHECK(std::sqrt(h) * resm.norm() <= 1e-8);
}

TEST_CASE("stable regime p=3 reports none") {
  auto qt = compute_Qtilde(profile_p3());
  auto c = inner_products(profile_p3(), qt);
  auto pair = unstable_pair(profile_p3(), c.qq_tilde);
  CHECK_FALSE(pair.found);
}

TEST_CASE("adjoint basis: biorthogonality and operator identities") {
  const auto& s = p7_spectral();
  const auto& op = s.op;
  const auto& ab = s.ab;
  const auto& pr = s.pair;

  CHECK(op.ip(ab.am, pr.Ym) == Catch::Approx(1.0).margin(1e-10));
  CHECK(op.ip(ab.ap, pr.Yp) == Catch::Approx(1.0).margin(1e-10));
  CHECK(std::abs(op.ip(ab.am, pr.Yp)) <= 1e-8);
  CHECK(std::abs(op.ip(ab.ap, pr.Ym)) <= 1e-8);
  CHECK(std::abs(op.ip(ab.am, op.dxQ)) <= 1e-8);
  CHECK(std::abs(op.ip(ab.ap, op.dxQ)) <= 1e-8);

  // L(dx alpha-) = nu alpha- and L(dx alpha+) = -nu alpha+.
  VectorXd rm = op.L * (op.Dx * ab.am) - pr.nu * ab.am;
  VectorXd rp = op.L * (op.Dx * ab.ap) + pr.nu * ab.ap;
  CHECK(std::sqrt(op.h()) * rm.norm() <= 1e-7);
  CHECK(std::sqrt(op.h()) * rp.norm() <= 1e-7);
}

TEST_CASE("Z direction: sign, rho limit, L(Z')+Q smallness") {
  auto p7 = profile_p7();
  auto qt = compute_Qtilde(p7);
  auto c = inner_products(p7, qt);

  auto op = assemble_L(p7, 90.0, 4499);
  auto z20 = make_Z(op, qt, 20.0, c.qq_tilde);
  CHECK(z20.zq > 0.0);

  auto z35 = make_Z(op, qt, 35.0, c.qq_tilde);
  CHECK(std::abs(z35.zq - (-c.qq_tilde)) <= 1e-6);

  CHECK_THROWS_AS(make_Z(op, qt, 3.0, c.qq_tilde), std::domain_error);

  // ||L(Z') + Q|| decreasing in rho, consistent with the rho^{-1/2} rate.
  double prev = kInf;
  std::vector<double> norms;
  for (double rho : {10.0, 20.0, 40.0}) {
    auto z = make_Z(op, qt, rho, c.qq_tilde);
    VectorXd zp(op.grid.n);
    for (int i = 0; i < op.grid.n; ++i) zp(i) = z.fn.deriv(op.grid.x(i));
    VectorXd r = op.L * zp + op.Q;
    double nr = std::sqrt(op.h()) * r.norm();
    norms.push_back(nr);
    CHECK(nr < prev);
    prev = nr;
  }
  CHECK(norms[2] < norms[0] / std::sqrt(2.0));
}

TEST_CASE("coercivity: constrained minimum positive, diagnostics") {
  const auto& s = p7_spectral();
  auto p7 = profile_p7();
  auto qt = compute_Qtilde(p7);

  auto op = assemble_L(p7, 40.0, 639);
  auto z = make_Z(op, qt, 20.0, s.qq_tilde);
  VectorXd am = resample(s.ab.grid, s.ab.am, s.ab.dam, op.grid);
  VectorXd ap = resample(s.ab.grid, s.ab.ap, s.ab.dap, op.grid);

  double lam0 = coercivity_min(op, {am, ap, z.samples});
  CHECK(lam0 > 0.0);

  // Dropping the Z constraint leaves the kernel direction dxQ unpenalized
  // (it is orthogonal to both alphas), so the minimum collapses to ~0-.
  double no_z = coercivity_min(op, {am, ap});
  CHECK(no_z <= 1e-6);
  CHECK(no_z > -0.5);

  // Unconstrained: negative, consistent with the ground state's quotient.
  double unc = coercivity_min(op, {});
  CHECK(unc < 0.0);
  auto eig = negative_eigenvalue(op);
  VectorXd g = eig.vec_neg;
  MatrixXd B = h1_gram(op);
  double quotient = g.dot(op.L * g) / g.dot(B * g);
  CHECK(unc <= quotient + 1e-12);
  CHECK(eig.lambda_neg < 0.0);
}

TEST_CASE("two-soliton Hessian minimum positive at q=15, both signs") {
  const auto& s = p7_spectral();
  auto p7 = profile_p7();
  auto qt = compute_Qtilde(p7);
  auto opz = assemble_L(p7, 90.0, 1999);
  auto z = make_Z(opz, qt, 20.0, s.qq_tilde);

  for (int sigma : {+1, -1}) {
    auto hess = two_soliton_hessian_min(p7, 15.0, sigma, s.pair, s.ab, z.fn, 0.1);
    INFO("sigma=" << sigma);
    CHECK(hess.min_projected > 0.0);
  }
  CHECK_THROWS_AS(two_soliton_hessian_min(p7, 5.0, 1, s.pair, s.ab, z.fn), std::domain_error);
}
