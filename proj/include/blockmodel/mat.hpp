#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace blockmodel {

// Dense row-major matrix of doubles. Small and unclever on purpose: the
// matrices in this codebase are K x K, C x K or N x K with K, C in the tens.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  std::span<double> row(int r) { return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
  std::span<const double> row(int r) const {
    return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }

  void fill(double v) { std::fill(a.begin(), a.end(), v); }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

inline double logsumexp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;  // all -inf
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

// Turns log-weights into a normalized distribution in place.
inline void softmax_in_place(std::span<double> lw) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : lw) m = std::max(m, v);
  double s = 0.0;
  for (double& v : lw) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : lw) v /= s;
}

inline double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline bool is_distribution(std::span<const double> x, double tol = 1e-9) {
  double s = 0.0;
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= tol;
}

inline double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  double m = 0.0;
  for (size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

// First index attaining the maximum, so ties resolve to the lowest index.
inline int argmax(std::span<const double> x) {
  int best = 0;
  for (size_t i = 1; i < x.size(); ++i)
    if (x[i] > x[best]) best = static_cast<int>(i);
  return best;
}

// Entropy of a distribution with the 0 log 0 = 0 convention.
inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}  // namespace blockmodel
