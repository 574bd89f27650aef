#pragma once

#include <memory>
#include <vector>

#include "gkdv/profile.hpp"
#include "gkdv/util/chebyshev.hpp"

namespace gkdv {

/// Profiles precomputed on a velocity window [v_lo, v_hi] at Chebyshev nodes,
/// collapsible to any interior v by barycentric interpolation. The derivative
/// of the interpolant in v doubles as dQ_v/dv, so the reduced system gets
/// smooth profile data for finite-difference gradients at negligible cost.
class ProfileFamily {
 public:
  ProfileFamily(const Nonlinearity& nl, double v_lo, double v_hi, int m = 21,
                double x_max = 0.0, int n = 0)
      : nl_(nl), basis_(v_lo, v_hi, m) {
    if (x_max <= 0.0) x_max = 40.0 / std::sqrt(v_lo);
    if (n <= 0) n = int(std::ceil(x_max / 0.005 / 1024.0)) * 1024;
    x_max_ = x_max;
    n_ = n;
    nodes_.reserve(std::size_t(m));
    for (double v : basis_.nodes()) nodes_.push_back(compute_profile(nl, v, x_max, n));
  }

  double x_max() const { return x_max_; }
  int n() const { return n_; }
  double h() const { return x_max_ / double(n_); }
  double v_lo() const { return basis_.nodes().back(); }   // nodes are descending
  double v_hi() const { return basis_.nodes().front(); }
  const Nonlinearity& nonlinearity() const { return nl_; }

  /// Interpolated profile at velocity v (samples share the family grid).
  SolitonProfile collapse(double v) const {
    SolitonProfile p;
    p.nl = nl_;
    p.v = v;
    p.s0 = s0_of_v(nl_, v);
    p.x_max = x_max_;
    p.n = n_;
    auto lam = basis_.eval_weights(v);
    combine(lam, p.Q, p.dQ);
    p.k0_tail = tail_fit(p);
    return p;
  }

  /// d/dv of the interpolated profile: the velocity derivative on the grid.
  ProfileDerivative collapse_deriv(double v) const {
    ProfileDerivative d;
    d.v = v;
    d.x_max = x_max_;
    d.n = n_;
    d.method = QtildeMethod::finite_difference;
    auto mu = basis_.deriv_weights(v);
    combine(mu, d.Qt, d.dQt);
    d.cumQt = cumulative_integral(h(), d.Qt, d.dQt);
    return d;
  }

 private:
  void combine(const std::vector<double>& w, std::vector<double>& Q,
               std::vector<double>& dQ) const {
    const std::size_t len = nodes_.front().Q.size();
    Q.assign(len, 0.0);
    dQ.assign(len, 0.0);
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      if (w[j] == 0.0) continue;
      const auto& nj = nodes_[j];
      for (std::size_t i = 0; i < len; ++i) {
        Q[i] += w[j] * nj.Q[i];
        dQ[i] += w[j] * nj.dQ[i];
      }
    }
  }

  double tail_fit(const SolitonProfile& p) const {
    double sv = std::sqrt(p.v);
    auto station = [&](double frac) {
      int i = std::min(int(frac * n_), n_);
      double x = double(i) * h();
      return std::pair<double, double>(x, p.Q[std::size_t(i)] * std::exp(sv * x));
    };
    auto [xa, ya] = station(0.60);
    auto [xb, yb] = station(0.72);
    double za = std::exp(-sv * xa), zb = std::exp(-sv * xb);
    return (ya * zb - yb * za) / (zb - za);
  }

  Nonlinearity nl_;
  ChebyshevBasis basis_;
  double x_max_ = 0.0;
  int n_ = 0;
  std::vector<SolitonProfile> nodes_;
};

}  // namespace gkdv
