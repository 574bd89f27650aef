#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gkdv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when a numerical procedure fails beyond its contract (as opposed
/// to a domain_error on bad inputs). Carries a human-readable location.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Compensated (Kahan) summation; deterministic and insensitive to ordering noise.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

inline double kahan_total(std::span<const double> xs) {
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// Trapezoid rule on a uniform grid.
inline double trapezoid(double h, std::span<const double> f) {
  if (f.size() < 2) return 0.0;
  KahanSum s;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s.add(f[i]);
  return h * (0.5 * (f.front() + f.back()) + s.value());
}

/// Cumulative integral C[i] = int_{x0}^{x_i} f dx on a uniform grid with
/// Euler-Maclaurin end corrections. With first derivatives the segment rule is
/// O(h^4); adding third derivatives raises it to O(h^6).
inline std::vector<double> cumulative_integral(double h, std::span<const double> f,
                                               std::span<const double> df,
                                               std::span<const double> d3f = {}) {
  const std::size_t n = f.size();
  std::vector<double> c(n, 0.0);
  KahanSum s;
  const double h2 = h * h / 12.0;
  const double h4 = h * h * h * h / 720.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double seg = 0.5 * h * (f[i] + f[i + 1]);
    if (!df.empty()) seg -= h2 * (df[i + 1] - df[i]);
    if (!d3f.empty()) seg += h4 * (d3f[i + 1] - d3f[i]);
    s.add(seg);
    c[i + 1] = s.value();
  }
  return c;
}

/// Quintic smoothstep transition, s(0)=0, s(1)=1, with two vanishing
/// derivatives at both ends.
inline double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

inline double smoothstep5_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return t * t * (30.0 + t * (-60.0 + 30.0 * t));
}

/// Even cut-off: 1 on [-1,1], 0 outside (-2,2), smoothstep transition between.
inline double chi_cutoff(double y) {
  double a = std::abs(y);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  return 1.0 - smoothstep5(a - 1.0);
}

inline double chi_cutoff_prime(double y) {
  double a = std::abs(y);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  double d = -smoothstep5_prime(a - 1.0);
  return y < 0 ? -d : d;
}

/// Decreasing plateau: 1 on (-inf,1/3], 0 on [2/3,inf).
inline double psi_plateau(double x) {
  if (x <= 1.0 / 3.0) return 1.0;
  if (x >= 2.0 / 3.0) return 0.0;
  return 1.0 - smoothstep5(3.0 * x - 1.0);
}

/// Least-squares line y ~ a + b x. Returns {a, b, rms residual}.
struct LineFit {
  double intercept = 0.0, slope = 0.0, rms = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= double(n); my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - r.intercept - r.slope * x[i];
    ss += e * e;
  }
  r.rms = std::sqrt(ss / double(n));
  return r;
}

/// Least squares with the slope pinned: y ~ c + slope * x. Returns {c, rms}.
inline LineFit fit_offset(std::span<const double> x, std::span<const double> y, double slope) {
  const std::size_t n = x.size();
  if (n < 1 || y.size() != n) throw std::invalid_argument("fit_offset: empty input");
  double m = 0;
  for (std::size_t i = 0; i < n; ++i) m += y[i] - slope * x[i];
  m /= double(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - slope * x[i] - m;
    ss += e * e;
  }
  return {m, slope, std::sqrt(ss / double(n))};
}

}  // namespace gkdv
