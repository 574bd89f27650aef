#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "gkdv/profile.hpp"
#include "gkdv/util/interp.hpp"
#include "gkdv/util/numerics.hpp"

namespace gkdv {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Interior Dirichlet nodes of [-xm, xm]: x_i = -xm + (i+1)h, h = 2 xm/(n+1).
/// The node set is symmetric under x -> -x (index i <-> n-1-i).
struct Fd4Grid {
  double xm = 0.0;
  int n = 0;

  double h() const { return 2.0 * xm / double(n + 1); }
  double x(int i) const { return -xm + double(i + 1) * h(); }
  int reflect(int i) const { return n - 1 - i; }
};

namespace fd {

/// Order-4 centered second derivative with Dirichlet truncation (symmetric).
inline SpMat build_dxx(const Fd4Grid& g) {
  const double h2 = g.h() * g.h();
  const double c0 = -5.0 / 2.0 / h2, c1 = 4.0 / 3.0 / h2, c2 = -1.0 / 12.0 / h2;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(g.n) * 5);
  for (int i = 0; i < g.n; ++i) {
    for (int d = -2; d <= 2; ++d) {
      int j = i + d;
      if (j < 0 || j >= g.n) continue;
      double c = (d == 0) ? c0 : (std::abs(d) == 1 ? c1 : c2);
      trip.emplace_back(i, j, c);
    }
  }
  SpMat m(g.n, g.n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Order-4 centered first derivative (antisymmetric under truncation).
inline SpMat build_dx(const Fd4Grid& g) {
  const double h = g.h();
  const double c1 = 2.0 / 3.0 / h, c2 = -1.0 / 12.0 / h;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(g.n) * 4);
  for (int i = 0; i < g.n; ++i) {
    for (int d : {-2, -1, 1, 2}) {
      int j = i + d;
      if (j < 0 || j >= g.n) continue;
      double c = (d == 1 ? c1 : d == -1 ? -c1 : d == 2 ? c2 : -c2);
      trip.emplace_back(i, j, c);
    }
  }
  SpMat m(g.n, g.n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Symmetric pentadiagonal LDL^T pivot signs: number of eigenvalues of
/// (A - sigma I) below zero. Unpivoted LDL^T is the classical Sturm count for
/// banded matrices; exact zero pivots are nudged.
class SymBand2 {
 public:
  explicit SymBand2(const SpMat& a) : n_(int(a.rows())) {
    d0_.assign(std::size_t(n_), 0.0);
    d1_.assign(std::size_t(n_), 0.0);
    d2_.assign(std::size_t(n_), 0.0);
    for (int k = 0; k < a.outerSize(); ++k)
      for (SpMat::InnerIterator it(a, k); it; ++it) {
        int i = int(it.row()), j = int(it.col());
        if (i == j) d0_[std::size_t(j)] = it.value();
        else if (i == j + 1) d1_[std::size_t(j)] = it.value();
        else if (i == j + 2) d2_[std::size_t(j)] = it.value();
      }
  }

  int count_below(double sigma) const {
    // Work arrays for one LDL^T sweep of (A - sigma I).
    const std::size_t nn = std::size_t(n_);
    std::vector<double> d(nn, 0.0), l1(nn, 0.0), l2(nn, 0.0);
    int neg = 0;
    for (int j = 0; j < n_; ++j) {
      double dj = d0_[std::size_t(j)] - sigma;
      if (j >= 1) dj -= l1[std::size_t(j - 1)] * l1[std::size_t(j - 1)] * d[std::size_t(j - 1)];
      if (j >= 2) dj -= l2[std::size_t(j - 2)] * l2[std::size_t(j - 2)] * d[std::size_t(j - 2)];
      if (dj == 0.0) dj = -1e-300;
      d[std::size_t(j)] = dj;
      if (dj < 0.0) ++neg;
      if (j + 1 < n_) {
        double a1 = d1_[std::size_t(j)];
        if (j >= 1) a1 -= l2[std::size_t(j - 1)] * l1[std::size_t(j - 1)] * d[std::size_t(j - 1)];
        l1[std::size_t(j)] = a1 / dj;
      }
      if (j + 2 < n_) l2[std::size_t(j)] = d2_[std::size_t(j)] / dj;
    }
    return neg;
  }

  /// k-th smallest eigenvalue (k = 0 based) by inertia bisection.
  double eigenvalue(int k, double lo, double hi, double tol = 1e-13) const {
    while (hi - lo > tol * (1.0 + std::abs(lo) + std::abs(hi))) {
      double mid = 0.5 * (lo + hi);
      if (count_below(mid) >= k + 1) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  int n_;
  std::vector<double> d0_, d1_, d2_;
};

inline VectorXd inverse_iteration(const SpMat& m, double shift, int iters = 8,
                                  const VectorXd* seed = nullptr) {
  SpMat shifted = m;
  for (int i = 0; i < m.rows(); ++i) shifted.coeffRef(i, i) -= shift;
  shifted.makeCompressed();
  Eigen::SparseLU<SpMat> lu(shifted);
  if (lu.info() != Eigen::Success) throw NumericalError("inverse_iteration: factorization failed");
  VectorXd y = seed ? *seed : VectorXd::Ones(m.rows());
  y.normalize();
  for (int it = 0; it < iters; ++it) {
    VectorXd z = lu.solve(y);
    double nz = z.norm();
    if (!(nz > 0.0) || !std::isfinite(nz))
      throw NumericalError("inverse_iteration: breakdown");
    y = z / nz;
  }
  return y;
}

}  // namespace fd

enum class Scheme { fd4, fourier };

/// Discretization of L = -dxx - f'(Q) + v, plus the skew factor dx.
struct DiscreteOperator {
  Scheme scheme = Scheme::fd4;
  Fd4Grid grid;
  double v = 0.0;
  Nonlinearity nl;
  SymmetricCurve Qc, dQc;   // profile evaluators (grid-independent)
  SpMat L, Dx;
  VectorXd Q, dxQ;          // profile samples on the grid

  double h() const { return grid.h(); }
  double ip(const VectorXd& a, const VectorXd& b) const { return h() * a.dot(b); }
  double nrm(const VectorXd& a) const { return std::sqrt(h()) * a.norm(); }
};

namespace fourier {

/// Dense periodic spectral differentiation matrices on [-xm, xm) with n rows
/// (n even). Used as an independent scheme for eigenvalue cross-checks.
inline MatrixXd diff_matrix(double xm, int n, int order) {
  const double L = 2.0 * xm;
  MatrixXd D = MatrixXd::Zero(n, n);
  std::vector<std::complex<double>> sym(std::size_t(n), 0.0);
  for (int m = 0; m < n; ++m) {
    int kk = (m <= n / 2) ? m : m - n;
    if (order == 2 && 2 * m == n) kk = n / 2;  // Nyquist survives for even order
    double k = 2.0 * M_PI * double(kk) / L;
    std::complex<double> ik(0.0, k);
    sym[std::size_t(m)] = (order == 1) ? ((2 * m == n) ? 0.0 : ik) : ik * ik;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::complex<double> s = 0.0;
      for (int m = 0; m < n; ++m) {
        double ph = 2.0 * M_PI * double(m) * double(i - j) / double(n);
        s += sym[std::size_t(m)] * std::polar(1.0, ph);
      }
      D(i, j) = s.real() / double(n);
    }
  return D;
}

}  // namespace fourier

inline DiscreteOperator assemble_L(const SolitonProfile& p, double xm, int n,
                                   Scheme scheme = Scheme::fd4) {
  DiscreteOperator op;
  op.scheme = scheme;
  op.grid = {xm, n};
  op.v = p.v;
  op.nl = p.nl;
  op.Qc = p.curve_Q();
  op.dQc = p.curve_dQ();
  op.Q.resize(n);
  op.dxQ.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = op.grid.x(i);
    op.Q(i) = op.Qc.value(x);
    op.dxQ(i) = op.dQc.value(x);
  }
  if (scheme == Scheme::fd4) {
    op.L = fd::build_dxx(op.grid);
    op.L *= -1.0;
    for (int i = 0; i < n; ++i) op.L.coeffRef(i, i) += p.v - p.nl.fp(op.Q(i));
    op.L.makeCompressed();
    op.Dx = fd::build_dx(op.grid);
  } else {
    // Periodic grid x_i = -xm + i * 2 xm / n; rebuild samples accordingly.
    MatrixXd D1 = fourier::diff_matrix(xm, n, 1);
    MatrixXd D2 = fourier::diff_matrix(xm, n, 2);
    for (int i = 0; i < n; ++i) {
      double x = -xm + 2.0 * xm * double(i) / double(n);
      op.Q(i) = op.Qc.value(x);
      op.dxQ(i) = op.dQc.value(x);
    }
    MatrixXd Lm = -D2;
    for (int i = 0; i < n; ++i) Lm(i, i) += p.v - p.nl.fp(op.Q(i));
    op.L = Lm.sparseView();
    op.Dx = D1.sparseView();
  }
  return op;
}

/// Symmetry defect max |<e_i, L e_j> - <L e_i, e_j>| over random probe pairs.
inline double symmetry_defect(const DiscreteOperator& op, int probes = 32,
                              unsigned seed = 12345) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    VectorXd a(op.grid.n), b(op.grid.n);
    for (int i = 0; i < op.grid.n; ++i) {
      a(i) = gauss(rng);
      b(i) = gauss(rng);
    }
    a.normalize();
    b.normalize();
    worst = std::max(worst, std::abs(a.dot(op.L * b) - (op.L * a).dot(b)));
  }
  return worst;
}

/// ||L(dx Q)|| / ||dx Q||: the discrete kernel residual, O(h^4).
inline double kernel_residual(const DiscreteOperator& op) {
  VectorXd r = op.L * op.dxQ;
  return r.norm() / op.dxQ.norm();
}

struct NegativeEigenpair {
  double lambda_neg = 0.0;
  VectorXd vec_neg;
  double lambda_kernel = 0.0;  // next-smallest eigenvalue, ~0
  VectorXd vec_kernel;
};

/// Smallest two eigenvalues of L by inertia bisection + inverse iteration.
/// Asserts exactly one eigenvalue below -tol (the Sturm-Liouville ground
/// state); the next one is the discretized kernel direction dx Q.
inline NegativeEigenpair negative_eigenvalue(const DiscreteOperator& op, double tol = 1e-3) {
  fd::SymBand2 band(op.L);
  // Gershgorin bounds.
  double lo = kInf, hi = -kInf;
  for (int k = 0; k < op.L.outerSize(); ++k) {
    double diag = 0.0, off = 0.0;
    for (SpMat::InnerIterator it(op.L, k); it; ++it) {
      if (it.row() == it.col()) diag = it.value();
      else off += std::abs(it.value());
    }
    lo = std::min(lo, diag - off);
    hi = std::max(hi, diag + off);
  }
  int below = band.count_below(-tol);
  if (below != 1)
    throw NumericalError("negative_eigenvalue: found " + std::to_string(below) +
                         " eigenvalues below -tol (discretization artifact)");
  NegativeEigenpair out;
  out.lambda_neg = band.eigenvalue(0, lo, hi);
  out.lambda_kernel = band.eigenvalue(1, lo, hi);
  double scale = std::max(1.0, std::abs(out.lambda_neg));
  out.vec_neg = fd::inverse_iteration(op.L, out.lambda_neg + 1e-11 * scale);
  out.vec_kernel = fd::inverse_iteration(op.L, out.lambda_kernel + 1e-11 * scale);
  out.vec_neg /= std::sqrt(op.h()) * (out.vec_neg.norm());
  out.vec_kernel /= std::sqrt(op.h()) * (out.vec_kernel.norm());
  return out;
}

struct UnstablePair {
  bool found = false;
  double nu = 0.0;
  Fd4Grid grid;          // the (finer) grid the eigenvectors live on
  VectorXd Ym, Yp;       // L2-normalized; Yp is the reflection of Ym
  double residual = 0.0; // ||dx(L Ym) + nu Ym||_L2 on the grid
  double nu_coarse = 0.0;
  double nu_refined = 0.0;  // value at doubled resolution (stability check)
};

namespace detail {

struct RealCandidate {
  double lambda;
  double tail_mass;
};

/// Dense eigensolve of dx L on a modest grid; returns real eigenvalues in
/// (lambda_min, lambda_max) with the fraction of eigenvector mass in the
/// outer 20% of the grid (continuous-spectrum approximants fail this filter).
inline std::vector<RealCandidate> real_spectrum_scan(const SolitonProfile& p, double xm, int n,
                                                     double lambda_min, double lambda_max) {
  DiscreteOperator op = assemble_L(p, xm, n);
  MatrixXd M = MatrixXd(op.Dx * op.L);
  Eigen::EigenSolver<MatrixXd> es(M);
  std::vector<RealCandidate> out;
  for (int k = 0; k < n; ++k) {
    std::complex<double> lam = es.eigenvalues()(k);
    if (std::abs(lam.imag()) > 1e-8 * (1.0 + std::abs(lam.real()))) continue;
    double re = lam.real();
    if (re <= lambda_min || re >= lambda_max) continue;
    VectorXd vec = es.eigenvectors().col(k).real();
    double total = vec.squaredNorm();
    int outer = std::max(1, n / 5);
    double tails = vec.head(outer / 2).squaredNorm() + vec.tail(outer / 2).squaredNorm();
    out.push_back({re, tails / total});
  }
  std::sort(out.begin(), out.end(),
            [](const RealCandidate& a, const RealCandidate& b) { return a.lambda < b.lambda; });
  return out;
}

/// Refine an isolated real eigenvalue of dx L by shifted inverse iteration
/// with one Rayleigh-quotient shift update.
inline std::pair<double, VectorXd> refine_real_eig(const DiscreteOperator& op, double shift) {
  SpMat M = (op.Dx * op.L).pruned();
  VectorXd y = fd::inverse_iteration(M, shift, 10);
  double lam = y.dot(M * y) / y.squaredNorm();
  y = fd::inverse_iteration(M, lam, 6, &y);
  lam = y.dot(M * y) / y.squaredNorm();
  return {lam, y};
}

}  // namespace detail

struct UnstablePairOptions {
  double h_fine = 0.005;
  double coarse_xm = 40.0;
  int coarse_n = 800;
  double lambda_floor = 1e-6;
  double tail_tol_coarse = 0.2;
  double stability_tol = 1e-5;  // relative nu change under grid refinement
};

/// Real point spectrum of dx L: the instability pair (+-nu, Y+-) in the
/// supercritical regime, "none" otherwise. The coarse dense scan locates the
/// candidate; sparse inverse iteration on a fine, wide grid pins it down.
/// The eigenvector tails decay like e^{-nu|x|} on one side, so the fine
/// domain is sized by the measured nu.
inline UnstablePair unstable_pair(const SolitonProfile& p, double qq_tilde,
                                  UnstablePairOptions opt = {}) {
  UnstablePair out;
  const double lam_max = 10.0 * p.v;
  auto candidates =
      detail::real_spectrum_scan(p, opt.coarse_xm, opt.coarse_n, opt.lambda_floor, lam_max);
  std::vector<detail::RealCandidate> decaying;
  for (const auto& c : candidates)
    if (c.tail_mass < opt.tail_tol_coarse) decaying.push_back(c);

  if (qq_tilde > 0.0) {
    if (!decaying.empty()) {
      // Cross-examine on a second coarse grid before declaring a surprise.
      auto second = detail::real_spectrum_scan(p, opt.coarse_xm * 1.3, opt.coarse_n + 80,
                                               opt.lambda_floor, lam_max);
      for (const auto& c : second)
        if (c.tail_mass < 0.5 * opt.tail_tol_coarse)
          throw NumericalError("unstable_pair: real eigenvalue found in the stable regime");
    }
    return out;  // none
  }
  if (decaying.empty())
    throw NumericalError("unstable_pair: no real eigenvalue candidate in unstable regime");

  // Fine stage: sparse inverse iteration from the coarse shift, on a domain
  // enlarged until the eigenvector tails are fully attenuated (the slow decay
  // rate depends on nu through the cubic characteristic equation).
  double nu_f = 0.0, nu_2 = 0.0;
  VectorXd yplus;
  Fd4Grid grid_f;
  bool settled = false;
  for (std::size_t ci = decaying.size(); ci-- > 0 && !settled;) {
    double nu0 = decaying[ci].lambda;
    out.nu_coarse = nu0;
    double xm = std::max(p.x_max, 50.0);
    for (int attempt = 0; attempt < 4; ++attempt) {
      auto solve_at = [&](double h_target) {
        int n = int(std::ceil(2.0 * xm / h_target)) | 1;
        DiscreteOperator op = assemble_L(p, xm, n);
        auto [lam, y] = detail::refine_real_eig(op, nu0);
        return std::tuple<double, VectorXd, Fd4Grid>(lam, y, op.grid);
      };
      auto [lam_a, y_a, grid_a] = solve_at(opt.h_fine);
      // A candidate that melts away from its coarse location is a
      // continuous-spectrum artifact, not the eigenvalue.
      if (!(lam_a > opt.lambda_floor) || std::abs(lam_a - nu0) > 0.3 * nu0) break;
      int edge = std::max(1, grid_a.n / 10);
      double att = std::max(y_a.head(edge).cwiseAbs().maxCoeff(),
                            y_a.tail(edge).cwiseAbs().maxCoeff()) /
                   y_a.cwiseAbs().maxCoeff();
      if (att > 1e-9) {
        xm *= 1.6;
        continue;
      }
      auto [lam_b, y_b, grid_b] = solve_at(opt.h_fine * 0.5);
      if (std::abs(lam_a - lam_b) > opt.stability_tol * std::abs(lam_b))
        throw NumericalError("unstable_pair: nu resolution-dependent beyond tolerance");
      nu_f = lam_a;
      nu_2 = lam_b;
      yplus = y_a;
      grid_f = grid_a;
      settled = true;
      break;
    }
  }
  if (!settled)
    throw NumericalError("unstable_pair: no refinement-stable decaying eigenpair found");
  out.nu_refined = nu_2;
  out.found = true;
  out.nu = nu_f;
  out.grid = grid_f;
  // yplus solves dx(L y) = +nu y; define Ym as its reflection (and vice versa).
  const int n = grid_f.n;
  VectorXd ym(n);
  for (int i = 0; i < n; ++i) ym(i) = yplus(grid_f.reflect(i));
  double scale = std::sqrt(grid_f.h()) * ym.norm();
  ym /= scale;
  // Deterministic sign: positive at the peak.
  int imax = 0;
  ym.cwiseAbs().maxCoeff(&imax);
  if (ym(imax) < 0.0) ym = -ym;
  out.Ym = ym;
  out.Yp.resize(n);
  for (int i = 0; i < n; ++i) out.Yp(i) = ym(grid_f.reflect(i));

  DiscreteOperator opf = assemble_L(p, grid_f.xm, grid_f.n);
  VectorXd res = opf.Dx * (opf.L * out.Ym) + out.nu * out.Ym;
  out.residual = std::sqrt(grid_f.h()) * res.norm();
  return out;
}

struct AdjointBasis {
  Fd4Grid grid;
  VectorXd am, ap;        // alpha-, alpha+
  VectorXd dam, dap;      // their x-derivatives (proportional to Y+-)
};

/// alpha~- = int_{-inf}^x Y+ and alpha~+ = int_{-inf}^x Y- (well defined since
/// int Y = 0), normalized so <alpha-, Y-> = <alpha+, Y+> = 1.
inline AdjointBasis adjoint_basis(const DiscreteOperator& op, const UnstablePair& pair) {
  if (!pair.found) throw std::domain_error("adjoint_basis: no unstable pair");
  const int n = pair.grid.n;
  const double h = pair.grid.h();
  auto cum = [&](const VectorXd& y) {
    std::vector<double> f(y.data(), y.data() + n);
    VectorXd dy = op.Dx * y;
    std::vector<double> df(dy.data(), dy.data() + n);
    auto c = cumulative_integral(h, f, df);
    return VectorXd(Eigen::Map<VectorXd>(c.data(), n));
  };
  VectorXd at_m = cum(pair.Yp);
  VectorXd at_p = cum(pair.Ym);
  double dm = h * at_m.dot(pair.Ym);
  double dp = h * at_p.dot(pair.Yp);
  if (std::abs(dm) < 1e-10 || std::abs(dp) < 1e-10)
    throw NumericalError("adjoint_basis: degenerate normalization (pairing ~ 0)");
  AdjointBasis b;
  b.grid = pair.grid;
  b.am = at_m / dm;
  b.ap = at_p / dp;
  b.dam = pair.Yp / dm;
  b.dap = pair.Ym / dp;
  return b;
}

/// Z(x) = chi(x/rho) int_0^x Qt dy sampled on a grid. The antiderivative
/// saturates to +-int_0^inf Qt beyond the profile grid.
struct ZDirection {
  double rho = 0.0;
  SymmetricCurve anti;  // int_0^x Qt (odd)
  double cap = 0.0;     // profile grid extent
  double tail = 0.0;    // int_0^inf Qt

  double anti_value(double x) const {
    if (std::abs(x) <= cap) return anti.value(x);
    return x > 0 ? tail : -tail;
  }
  double value(double x) const { return chi_cutoff(x / rho) * anti_value(x); }
  double deriv(double x) const {
    double d = std::abs(x) <= cap ? anti.deriv(x) : 0.0;
    return chi_cutoff_prime(x / rho) / rho * anti_value(x) + chi_cutoff(x / rho) * d;
  }
};

struct ZData {
  ZDirection fn;
  VectorXd samples;     // on the operator grid
  double zq = 0.0;      // <Z, dx Q>
  double zq_limit = 0.0;  // -<Q, Qt>, the rho -> infinity value
};

/// Builds the localized orthogonality direction. <Z, dxQ> must carry the sign
/// of -<Q,Qt> and a fair fraction of its magnitude, otherwise rho is too
/// small for the cut-off to keep the pairing nondegenerate.
inline ZData make_Z(const DiscreteOperator& op, const ProfileDerivative& qt, double rho,
                    double qq_tilde) {
  if (rho < 5.0 / std::sqrt(op.v)) throw std::domain_error("make_Z: rho below 5/sqrt(v)");
  ZData z;
  z.fn.rho = rho;
  z.fn.anti = qt.antiderivative();
  z.fn.cap = qt.x_max;
  z.fn.tail = qt.cumQt.back();
  z.samples.resize(op.grid.n);
  for (int i = 0; i < op.grid.n; ++i) z.samples(i) = z.fn.value(op.grid.x(i));
  z.zq = op.ip(z.samples, op.dxQ);
  z.zq_limit = -qq_tilde;
  if (z.zq * z.zq_limit <= 0.0 || std::abs(z.zq) < 0.25 * std::abs(z.zq_limit)) {
    double suggested = 2.0 * rho;
    throw NumericalError("make_Z: <Z, dxQ> degenerate; increase rho (try " +
                         std::to_string(suggested) + ")");
  }
  return z;
}

/// Minimum of <w, A w> / <w, B w> over the subspace {w : C^T w = 0}, computed
/// by Householder projection onto the constraint complement followed by a
/// dense generalized symmetric eigensolve.
inline double projected_min(const MatrixXd& A, const MatrixXd& B,
                            const std::vector<VectorXd>& constraints) {
  const int n = int(A.rows());
  if (constraints.empty()) {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }
  const int k = int(constraints.size());
  MatrixXd C(n, k);
  for (int j = 0; j < k; ++j) C.col(j) = constraints[std::size_t(j)];
  Eigen::HouseholderQR<MatrixXd> qr(C);
  MatrixXd Aq = A, Bq = B;
  Aq.applyOnTheLeft(qr.householderQ().adjoint());
  Aq.applyOnTheRight(qr.householderQ());
  Bq.applyOnTheLeft(qr.householderQ().adjoint());
  Bq.applyOnTheRight(qr.householderQ());
  MatrixXd Ap = Aq.bottomRightCorner(n - k, n - k);
  MatrixXd Bp = Bq.bottomRightCorner(n - k, n - k);
  Ap = 0.5 * (Ap + Ap.transpose());
  Bp = 0.5 * (Bp + Bp.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(Ap, Bp, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Discrete H^1 Gram matrix -dxx + I on the operator grid.
inline MatrixXd h1_gram(const DiscreteOperator& op) {
  MatrixXd B = -MatrixXd(fd::build_dxx(op.grid));
  for (int i = 0; i < op.grid.n; ++i) B(i, i) += 1.0;
  return B;
}

inline SpMat h1_gram_sparse(const Fd4Grid& g) {
  SpMat B = fd::build_dxx(g);
  B *= -1.0;
  for (int i = 0; i < g.n; ++i) B.coeffRef(i, i) += 1.0;
  B.makeCompressed();
  return B;
}

/// Smallest eigenvalue of A w = lambda B w restricted to {C^T w = 0}, by
/// inverse iteration on the bordered KKT system
///   [A - sigma B, C; C^T, 0] [w; mu] = [B w_prev; 0].
/// Keeps the banded sparsity, so fine grids stay cheap. The start shift must
/// lie below the constrained minimum.
inline double constrained_smallest(const SpMat& A, const SpMat& B, const MatrixXd& C,
                                   double sigma0 = -0.05) {
  const int n = int(A.rows());
  const int k = int(C.cols());
  auto factor = [&](double sigma) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(A.nonZeros() + B.nonZeros()) + std::size_t(2 * n * k + k));
    for (int c = 0; c < A.outerSize(); ++c)
      for (SpMat::InnerIterator it(A, c); it; ++it)
        trip.emplace_back(int(it.row()), int(it.col()), it.value());
    for (int c = 0; c < B.outerSize(); ++c)
      for (SpMat::InnerIterator it(B, c); it; ++it)
        trip.emplace_back(int(it.row()), int(it.col()), -sigma * it.value());
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i)
        if (C(i, j) != 0.0) {
          trip.emplace_back(i, n + j, C(i, j));
          trip.emplace_back(n + j, i, C(i, j));
        }
    for (int j = 0; j < k; ++j) trip.emplace_back(n + j, n + j, 0.0);
    SpMat K(n + k, n + k);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    auto lu = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu->compute(K);
    if (lu->info() != Eigen::Success)
      throw NumericalError("constrained_smallest: factorization failed");
    return lu;
  };

  // Deterministic start with no special parity: reflection-symmetric problems
  // decompose into even/odd sectors that the solves preserve, so a symmetric
  // seed could converge to the wrong sector minimum.
  VectorXd w(n);
  {
    std::mt19937_64 rng(987654321u);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < n; ++i) w(i) = gauss(rng);
  }
  w /= std::sqrt(w.dot(B * w));
  double lambda = w.dot(A * w);
  double sigma = sigma0;
  for (int outer = 0; outer < 6; ++outer) {
    auto lu = factor(sigma);
    double prev = kInf;
    for (int it = 0; it < 12; ++it) {
      VectorXd rhs(n + k);
      rhs.head(n) = B * w;
      rhs.tail(k).setZero();
      VectorXd z = lu->solve(rhs);
      w = z.head(n);
      double bn = std::sqrt(w.dot(B * w));
      if (!(bn > 0.0) || !std::isfinite(bn))
        throw NumericalError("constrained_smallest: iteration breakdown");
      w /= bn;
      lambda = w.dot(A * w);
      if (std::abs(lambda - prev) <= 1e-14 * std::max(1.0, std::abs(lambda))) break;
      prev = lambda;
    }
    if (std::abs(lambda - sigma) <= 1e-12 * std::max(1.0, std::abs(lambda))) break;
    sigma = lambda - 1e-8 * std::max(1.0, std::abs(lambda));
  }
  return lambda;
}

/// Empirical coercivity constant: min of <w,Lw>/||w||_{H1}^2 orthogonally to
/// {alpha-, alpha+, Z} (all resampled onto the operator grid). Dense
/// projection for modest grids, sparse bordered iteration for fine ones.
inline double coercivity_min(const DiscreteOperator& op, const std::vector<VectorXd>& constraints,
                             double sigma0 = -0.05) {
  if (op.grid.n <= 1600 || constraints.empty()) {
    MatrixXd A = MatrixXd(op.L);
    MatrixXd B = h1_gram(op);
    return projected_min(A, B, constraints);
  }
  MatrixXd C(op.grid.n, int(constraints.size()));
  for (int j = 0; j < C.cols(); ++j) C.col(j) = constraints[std::size_t(j)];
  return constrained_smallest(op.L, h1_gram_sparse(op.grid), C, sigma0);
}

/// Resample a (value, derivative) pair living on grid g onto grid target.
inline VectorXd resample(const Fd4Grid& g, const VectorXd& f, const VectorXd& df,
                         const Fd4Grid& target, double shift = 0.0) {
  std::vector<double> fv(f.data(), f.data() + g.n), dv(df.data(), df.data() + g.n);
  SampledFunction s(g.x(0), g.h(), fv, dv);
  VectorXd out(target.n);
  for (int i = 0; i < target.n; ++i) out(i) = s.value(target.x(i) - shift);
  return out;
}

struct TwoSolitonHessian {
  double q = 0.0;
  int sigma = 1;
  Fd4Grid grid;
  double min_projected = 0.0;
};

/// D2H(U) = -dxx - f'(U) + 1 for U = Q(.-q1) + sigma Q(.-q2), q2 - q1 = q,
/// minimized orthogonally to the six translated directions
/// {alpha-, alpha+, Z}(. -+ q/2). v = 1 normalization.
inline TwoSolitonHessian two_soliton_hessian_min(const SolitonProfile& p, double q, int sigma,
                                                 const UnstablePair& pair, const AdjointBasis& ab,
                                                 const ZDirection& zfn, double h_target = 0.0625,
                                                 double pad = 40.0) {
  if (q < 10.0) throw std::domain_error("two_soliton_hessian_min: q >= 10 required");
  if (std::abs(p.v - 1.0) > 1e-12)
    throw std::domain_error("two_soliton_hessian_min: v = 1 normalization required");
  TwoSolitonHessian out;
  out.q = q;
  out.sigma = sigma;
  double xm = 0.5 * q + pad;
  int n = int(std::ceil(2.0 * xm / h_target)) | 1;
  out.grid = {xm, n};

  SymmetricCurve Qc = p.curve_Q();
  SpMat A = fd::build_dxx(out.grid);
  A *= -1.0;
  for (int i = 0; i < n; ++i) {
    double x = out.grid.x(i);
    double U = Qc.value(x + 0.5 * q) + double(sigma) * Qc.value(x - 0.5 * q);
    A.coeffRef(i, i) += 1.0 - p.nl.fp(U);
  }
  A.makeCompressed();
  SpMat B = h1_gram_sparse(out.grid);

  MatrixXd C(n, 6);
  int col = 0;
  for (double qk : {-0.5 * q, 0.5 * q}) {
    C.col(col++) = resample(ab.grid, ab.am, ab.dam, out.grid, qk);
    C.col(col++) = resample(ab.grid, ab.ap, ab.dap, out.grid, qk);
    VectorXd zs(n);
    for (int i = 0; i < n; ++i) zs(i) = zfn.value(out.grid.x(i) - qk);
    C.col(col++) = zs;
  }
  if (n <= 1600) {
    std::vector<VectorXd> cons;
    for (int j = 0; j < 6; ++j) cons.push_back(C.col(j));
    out.min_projected = projected_min(MatrixXd(A), MatrixXd(B), cons);
  } else {
    out.min_projected = constrained_smallest(A, B, C, -0.05);
  }
  return out;
}

}  // namespace gkdv
