#pragma once

#include <cmath>

#include <Eigen/Core>

namespace autowarp {

/// Forward-mode dual number carrying partials with respect to the three warp
/// parameters (alpha, gamma, epsilon).
struct Dual3 {
  using Partials = Eigen::Matrix<double, 3, 1>;

  double value = 0.0;
  Partials partials = Partials::Zero();

  Dual3() = default;
  Dual3(double v) : value(v) {}  // NOLINT: implicit lift of constants
  Dual3(double v, const Partials& p) : value(v), partials(p) {}

  /// Independent variable number k (0 = alpha, 1 = gamma, 2 = epsilon).
  static Dual3 variable(double v, int k) {
    Dual3 d(v);
    d.partials(k) = 1.0;
    return d;
  }

  Dual3& operator+=(const Dual3& o) {
    value += o.value;
    partials += o.partials;
    return *this;
  }
  Dual3& operator-=(const Dual3& o) {
    value -= o.value;
    partials -= o.partials;
    return *this;
  }
};

inline Dual3 operator+(const Dual3& a, const Dual3& b) { return {a.value + b.value, a.partials + b.partials}; }
inline Dual3 operator-(const Dual3& a, const Dual3& b) { return {a.value - b.value, a.partials - b.partials}; }
inline Dual3 operator-(const Dual3& a) { return {-a.value, -a.partials}; }
inline Dual3 operator*(const Dual3& a, const Dual3& b) {
  return {a.value * b.value, b.value * a.partials + a.value * b.partials};
}
inline Dual3 operator/(const Dual3& a, const Dual3& b) {
  const double inv = 1.0 / b.value;
  return {a.value / b.value, (a.partials - (a.value * inv) * b.partials) * inv};
}
inline Dual3 operator+(const Dual3& a, double b) { return {a.value + b, a.partials}; }
inline Dual3 operator+(double a, const Dual3& b) { return {a + b.value, b.partials}; }
inline Dual3 operator-(const Dual3& a, double b) { return {a.value - b, a.partials}; }
inline Dual3 operator-(double a, const Dual3& b) { return {a - b.value, -b.partials}; }
inline Dual3 operator*(const Dual3& a, double b) { return {a.value * b, a.partials * b}; }
inline Dual3 operator*(double a, const Dual3& b) { return {a * b.value, a * b.partials}; }
inline Dual3 operator/(double a, const Dual3& b) {
  return {a / b.value, (-a / (b.value * b.value)) * b.partials};
}
inline Dual3 operator/(const Dual3& a, double b) { return {a.value / b, a.partials / b}; }

inline Dual3 tanh(const Dual3& x) {
  const double t = std::tanh(x.value);
  return {t, (1.0 - t * t) * x.partials};
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual3& x) { return x.value; }

}  // namespace autowarp
