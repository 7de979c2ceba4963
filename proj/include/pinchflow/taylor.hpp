#pragma once

// Second-order forward-mode automatic differentiation.  A Taylor2 carries
// a value together with its gradient and Hessian in up to kMaxDim chart
// variables, which gives exact jets of closed-form charts.

#include <algorithm>
#include <array>
#include <cmath>

#include "pinchflow/tensor.hpp"

namespace pinchflow {

class Taylor2 {
 public:
  Taylor2() = default;
  Taylor2(double value, int vars) : vars_(vars), v_(value) {}

  static Taylor2 variable(double value, int index, int vars) {
    Taylor2 t(value, vars);
    t.g_[index] = 1.0;
    return t;
  }

  int vars() const { return vars_; }
  double value() const { return v_; }
  double d(int i) const { return g_[i]; }
  double dd(int i, int j) const { return h_[i * kMaxDim + j]; }

  friend Taylor2 operator+(Taylor2 a, const Taylor2& b) {
    a.vars_ = std::max(a.vars_, b.vars_);
    a.v_ += b.v_;
    for (int i = 0; i < kMaxDim; ++i) a.g_[i] += b.g_[i];
    for (int i = 0; i < kMaxDim * kMaxDim; ++i) a.h_[i] += b.h_[i];
    return a;
  }
  friend Taylor2 operator-(const Taylor2& a) { return a * -1.0; }
  friend Taylor2 operator-(const Taylor2& a, const Taylor2& b) { return a + (-b); }

  friend Taylor2 operator*(Taylor2 a, double s) {
    a.v_ *= s;
    for (double& x : a.g_) x *= s;
    for (double& x : a.h_) x *= s;
    return a;
  }
  friend Taylor2 operator*(double s, const Taylor2& a) { return a * s; }
  friend Taylor2 operator+(Taylor2 a, double s) {
    a.v_ += s;
    return a;
  }
  friend Taylor2 operator+(double s, const Taylor2& a) { return a + s; }
  friend Taylor2 operator-(const Taylor2& a, double s) { return a + (-s); }
  friend Taylor2 operator-(double s, const Taylor2& a) { return (-a) + s; }

  friend Taylor2 operator*(const Taylor2& a, const Taylor2& b) {
    Taylor2 r(a.v_ * b.v_, std::max(a.vars_, b.vars_));
    for (int i = 0; i < kMaxDim; ++i) r.g_[i] = a.g_[i] * b.v_ + a.v_ * b.g_[i];
    for (int i = 0; i < kMaxDim; ++i) {
      for (int j = 0; j < kMaxDim; ++j) {
        const int ij = i * kMaxDim + j;
        r.h_[ij] = a.h_[ij] * b.v_ + a.v_ * b.h_[ij] + a.g_[i] * b.g_[j] + a.g_[j] * b.g_[i];
      }
    }
    return r;
  }

  friend Taylor2 operator/(const Taylor2& a, double s) { return a * (1.0 / s); }

  /// f(a) given f, f', f'' at a.value().
  Taylor2 compose(double f, double df, double ddf) const {
    Taylor2 r(f, vars_);
    for (int i = 0; i < kMaxDim; ++i) r.g_[i] = df * g_[i];
    for (int i = 0; i < kMaxDim; ++i) {
      for (int j = 0; j < kMaxDim; ++j) {
        r.h_[i * kMaxDim + j] = df * h_[i * kMaxDim + j] + ddf * g_[i] * g_[j];
      }
    }
    return r;
  }

 private:
  int vars_ = 0;
  double v_ = 0.0;
  std::array<double, kMaxDim> g_{};
  std::array<double, kMaxDim * kMaxDim> h_{};
};

inline Taylor2 sin(const Taylor2& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  return a.compose(s, c, -s);
}

inline Taylor2 cos(const Taylor2& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  return a.compose(c, -s, -c);
}

}  // namespace pinchflow
