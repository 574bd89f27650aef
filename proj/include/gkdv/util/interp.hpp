#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gkdv {

/// Piecewise quintic Hermite on a uniform grid: interpolates values and first
/// two derivatives at the nodes, O(h^6) accurate for smooth data. Evaluates to
/// zero outside the grid (intended for exponentially decaying samples).
class QuinticGrid {
 public:
  QuinticGrid() = default;
  QuinticGrid(double x0, double h, std::vector<double> f, std::vector<double> d1,
              std::vector<double> d2)
      : x0_(x0), h_(h), f_(std::move(f)), d1_(std::move(d1)), d2_(std::move(d2)) {
    if (f_.size() < 2 || f_.size() != d1_.size() || f_.size() != d2_.size())
      throw std::invalid_argument("QuinticGrid: inconsistent sample arrays");
  }

  bool empty() const { return f_.empty(); }
  double x_min() const { return x0_; }
  double x_max() const { return x0_ + h_ * double(f_.size() - 1); }
  double h() const { return h_; }
  std::size_t size() const { return f_.size(); }

  double value(double x) const {
    double v, d;
    eval(x, v, d, false);
    return v;
  }
  double deriv(double x) const {
    double v, d;
    eval(x, v, d, true);
    return d;
  }
  void value_and_deriv(double x, double& v, double& d) const { eval(x, v, d, true); }

 private:
  void eval(double x, double& val, double& der, bool want_der) const {
    val = 0.0;
    der = 0.0;
    if (f_.empty()) return;
    double u = (x - x0_) / h_;
    if (u < 0.0 || u > double(f_.size() - 1)) return;
    std::size_t i = std::min(std::size_t(u), f_.size() - 2);
    double t = u - double(i);
    // Quintic Hermite basis (Fergusson form).
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    double H2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
    double K0 = 10 * t3 - 15 * t4 + 6 * t5;
    double K1 = -4 * t3 + 7 * t4 - 3 * t5;
    double K2 = 0.5 * (t3 - 2 * t4 + t5);
    val = f_[i] * H0 + h_ * d1_[i] * H1 + h_ * h_ * d2_[i] * H2 + f_[i + 1] * K0 +
          h_ * d1_[i + 1] * K1 + h_ * h_ * d2_[i + 1] * K2;
    if (!want_der) return;
    double dH0 = -30 * t2 + 60 * t3 - 30 * t4;
    double dH1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    double dH2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
    double dK0 = -dH0;
    double dK1 = -12 * t2 + 28 * t3 - 15 * t4;
    double dK2 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
    der = (f_[i] * dH0 + h_ * d1_[i] * dH1 + h_ * h_ * d2_[i] * dH2 + f_[i + 1] * dK0 +
           h_ * d1_[i + 1] * dK1 + h_ * h_ * d2_[i + 1] * dK2) /
          h_;
  }

  double x0_ = 0.0, h_ = 1.0;
  std::vector<double> f_, d1_, d2_;
};

/// Even or odd function stored on the half line [0, x_max].
class SymmetricCurve {
 public:
  SymmetricCurve() = default;
  SymmetricCurve(int parity, QuinticGrid half) : parity_(parity), half_(std::move(half)) {
    if (parity != 1 && parity != -1) throw std::invalid_argument("parity must be +-1");
  }

  double value(double x) const {
    double v = half_.value(std::abs(x));
    return (x < 0 && parity_ == -1) ? -v : v;
  }
  double deriv(double x) const {
    double d = half_.deriv(std::abs(x));
    return (x < 0 && parity_ == 1) ? -d : d;  // derivative has opposite parity
  }
  double x_max() const { return half_.x_max(); }
  int parity() const { return parity_; }
  const QuinticGrid& half() const { return half_; }

 private:
  int parity_ = 1;
  QuinticGrid half_;
};

/// Function sampled on a full uniform grid (value + derivative), cubic Hermite
/// between nodes, zero outside. Used for eigenfunctions on truncated domains.
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(double x0, double h, std::vector<double> f, std::vector<double> d1)
      : x0_(x0), h_(h), f_(std::move(f)), d1_(std::move(d1)) {}

  double value(double x) const {
    if (f_.empty()) return 0.0;
    double u = (x - x0_) / h_;
    if (u < 0.0 || u > double(f_.size() - 1)) return 0.0;
    std::size_t i = std::min(std::size_t(u), f_.size() - 2);
    double t = u - double(i);
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * f_[i] + h10 * h_ * d1_[i] + h01 * f_[i + 1] + h11 * h_ * d1_[i + 1];
  }

  bool empty() const { return f_.empty(); }

 private:
  double x0_ = 0.0, h_ = 1.0;
  std::vector<double> f_, d1_;
};

}  // namespace gkdv
