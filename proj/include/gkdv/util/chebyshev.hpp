#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gkdv {

/// Chebyshev-Lobatto interpolation scaffold on [lo, hi]: nodes, barycentric
/// evaluation weights, and the spectral differentiation matrix (for taking
/// d/dv of interpolants through their nodal values).
class ChebyshevBasis {
 public:
  ChebyshevBasis(double lo, double hi, int m) : lo_(lo), hi_(hi), m_(m) {
    if (m < 2) throw std::invalid_argument("ChebyshevBasis: m >= 2 required");
    nodes_.resize(m);
    bary_.resize(m);
    for (int j = 0; j < m; ++j) {
      double y = std::cos(M_PI * double(j) / double(m - 1));  // descending in y
      nodes_[j] = lo + 0.5 * (hi - lo) * (1.0 + y);
      bary_[j] = (j % 2 == 0 ? 1.0 : -1.0);
    }
    bary_.front() *= 0.5;
    bary_.back() *= 0.5;
    build_diff_matrix();
  }

  int size() const { return m_; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Barycentric weights lambda_j(v): interpolant value = sum_j lambda_j f_j.
  std::vector<double> eval_weights(double v) const {
    std::vector<double> lam(m_, 0.0);
    double denom = 0.0;
    for (int j = 0; j < m_; ++j) {
      double d = v - nodes_[j];
      if (d == 0.0) { lam.assign(m_, 0.0); lam[j] = 1.0; return lam; }
      lam[j] = bary_[j] / d;
      denom += lam[j];
    }
    for (double& w : lam) w /= denom;
    return lam;
  }

  /// Weights mu_j such that d/dv of the interpolant = sum_j mu_j f_j.
  std::vector<double> deriv_weights(double v) const {
    std::vector<double> lam = eval_weights(v);
    std::vector<double> mu(m_, 0.0);
    for (int k = 0; k < m_; ++k)
      for (int j = 0; j < m_; ++j) mu[k] += lam[j] * diff_[j][k];
    return mu;
  }

 private:
  void build_diff_matrix() {
    // Trefethen's formulas for Chebyshev-Lobatto points, scaled to [lo,hi].
    diff_.assign(m_, std::vector<double>(m_, 0.0));
    std::vector<double> c(m_, 1.0);
    c.front() = 2.0;
    c.back() = 2.0;
    for (int i = 0; i < m_; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < m_; ++j) {
        if (i == j) continue;
        double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        diff_[i][j] = (c[i] / c[j]) * sgn / (nodes_[i] - nodes_[j]);
        row_sum += diff_[i][j];
      }
      diff_[i][i] = -row_sum;  // negative sum trick
    }
  }

  double lo_, hi_;
  int m_;
  std::vector<double> nodes_, bary_;
  std::vector<std::vector<double>> diff_;
};

}  // namespace gkdv
