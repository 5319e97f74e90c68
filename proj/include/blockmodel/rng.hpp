#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace blockmodel {

// splitmix64 finalizer, used both for seed derivation and for whitening.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One run seed fans out into named substreams ("split", "init", "order",
// "restart", ...) so that changing e.g. the number of restarts never
// perturbs the split.
inline uint64_t derive_seed(uint64_t base, std::string_view stream, uint64_t index = 0) {
  uint64_t h = 1469598103934665603ULL;  // FNV-1a over the stream name
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return mix64(base ^ mix64(h) ^ mix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

// mt19937_64 with hand-rolled distributions. The standard distribution
// objects are implementation-defined, which would make seeded runs differ
// across toolchains; these are not.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(mix64(seed)) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(uniform01() * n) % n; }

  bool bernoulli(double p) { return uniform01() < p; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller; guard against log(0).
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1. Unit scale.
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform01();
      while (u <= 0.0) u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform01();
      while (u <= 0.0) u = uniform01();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  void dirichlet(std::span<double> out, double conc) {
    double s = 0.0;
    for (double& v : out) {
      v = gamma(conc);
      s += v;
    }
    for (double& v : out) v /= s;
  }

  // Draw from an unnormalized nonnegative weight vector.
  int categorical(std::span<const double> w) {
    double total = 0.0;
    for (double v : w) total += v;
    double u = uniform01() * total;
    double acc = 0.0;
    for (size_t i = 0; i + 1 < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace blockmodel
