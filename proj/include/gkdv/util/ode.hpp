#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "gkdv/util/numerics.hpp"

namespace gkdv {

/// Adaptive Dormand-Prince 5(4) integrator for small systems.
/// RHS signature: f(t, y, dydt). State is std::vector<double>.
class Dopri5 {
 public:
  using Rhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-14;
  double h_max = kInf;

  /// Advance y from t to t_end. Calls observer(t, y) after each accepted step
  /// when provided. Throws NumericalError on step-size underflow.
  void integrate(const Rhs& f, double& t, std::vector<double>& y, double t_end,
                 const std::function<void(double, const std::vector<double>&)>& observer = {}) {
    const std::size_t n = y.size();
    for (auto& k : k_) k.assign(n, 0.0);
    ytmp_.assign(n, 0.0);
    ynew_.assign(n, 0.0);
    double h = std::min({h_init, h_max, std::abs(t_end - t)});
    if (t_end < t) h = -h;
    f(t, y, k_[0]);
    while ((t_end - t) * (h > 0 ? 1.0 : -1.0) > 0) {
      if (std::abs(h) > std::abs(t_end - t)) h = t_end - t;
      step(f, t, y, h, n);
      double err = error_norm(y, n);
      if (err <= 1.0) {
        t += h;
        y.swap(ynew_);
        k_[0].swap(k_[6]);  // FSAL
        if (observer) observer(t, y);
        h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 1.0, 5.0);
        h = std::copysign(std::min(std::abs(h), h_max), h);
      } else {
        h *= std::max(0.9 * std::pow(err, -0.2), 0.2);
        if (std::abs(h) < h_min)
          throw NumericalError("Dopri5: step size underflow at t=" + std::to_string(t));
      }
    }
  }

 private:
  void step(const Rhs& f, double t, const std::vector<double>& y, double h, std::size_t n) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y[i] + h * a21 * k_[0][i];
    f(t + c2 * h, ytmp_, k_[1]);
    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y[i] + h * (a31 * k_[0][i] + a32 * k_[1][i]);
    f(t + c3 * h, ytmp_, k_[2]);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]);
    f(t + c4 * h, ytmp_, k_[3]);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a51 * k_[0][i] + a52 * k_[1][i] + a53 * k_[2][i] + a54 * k_[3][i]);
    f(t + c5 * h, ytmp_, k_[4]);
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y[i] + h * (a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] + a64 * k_[3][i] +
                             a65 * k_[4][i]);
    f(t + h, ytmp_, k_[5]);
    for (std::size_t i = 0; i < n; ++i)
      ynew_[i] = y[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] +
                             b6 * k_[5][i]);
    f(t + h, ynew_, k_[6]);
    herr_ = h;
  }

  double error_norm(const std::vector<double>& y, std::size_t n) const {
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = herr_ * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                          e6 * k_[5][i] + e7 * k_[6][i]);
      double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
      s += (e / sc) * (e / sc);
    }
    return std::sqrt(s / double(n));
  }

  std::vector<double> k_[7], ytmp_, ynew_;
  double herr_ = 0.0;
};

}  // namespace gkdv
