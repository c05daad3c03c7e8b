#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mixlab {

using cd = std::complex<double>;
using cvec = std::vector<cd>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Scalar products are conjugate-linear in the FIRST slot everywhere in this
// repository: <x,y> = sum_k conj(x_k) y_k.  See docs/conventions.md.
inline cd inner(const cvec& x, const cvec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("inner: size mismatch");
  cd acc{0.0, 0.0};
  for (std::size_t k = 0; k < x.size(); ++k) acc += std::conj(x[k]) * y[k];
  return acc;
}

inline double norm_sq(const cvec& x) {
  double acc = 0.0;
  for (const cd& v : x) acc += std::norm(v);
  return acc;
}

inline double norm(const cvec& x) { return std::sqrt(norm_sq(x)); }

// Linear least squares of y against x plus intercept, with r^2.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need two matched points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

// Compensated (Kahan) accumulator; quadrature sums extract small Fourier
// coefficients from O(1) samples and need the extra digits.
template <typename T>
class KahanSum {
 public:
  void add(T v) {
    T y = v - comp_;
    T t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  T value() const { return sum_; }

 private:
  T sum_{};
  T comp_{};
};

}  // namespace mixlab
