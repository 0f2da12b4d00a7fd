#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rearrange {

enum class ErrorKind {
  InvalidInterval,
  InvalidGrid,
  NonNestedSections,
  TauTooLarge,
  DivergentQuadrature,
  EvalTooCloseToBoundary,
  InvalidOrdering,
  DegenerateHessian,
  InvalidProfile,
  NotUnitMass,
  NotDecreasing,
  Config,
  Parse
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInterval: return "InvalidInterval";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::NonNestedSections: return "NonNestedSections";
    case ErrorKind::TauTooLarge: return "TauTooLarge";
    case ErrorKind::DivergentQuadrature: return "DivergentQuadrature";
    case ErrorKind::EvalTooCloseToBoundary: return "EvalTooCloseToBoundary";
    case ErrorKind::InvalidOrdering: return "InvalidOrdering";
    case ErrorKind::DegenerateHessian: return "DegenerateHessian";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::NotUnitMass: return "NotUnitMass";
    case ErrorKind::NotDecreasing: return "NotDecreasing";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Parse: return "ParseError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Neumaier compensated sum.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  KahanSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    KahanSum s;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s.value();
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Worker count from REARRANGE_THREADS, default 1.
inline unsigned thread_count() {
  const char* env = std::getenv("REARRANGE_THREADS");
  if (!env) return 1;
  long v = std::strtol(env, nullptr, 10);
  if (v < 1) return 1;
  return static_cast<unsigned>(std::min<long>(v, 256));
}

// Runs body(i) for i in [0, n). Each index is written independently so results
// do not depend on the number of workers.
template <class F>
void parallel_for(std::size_t n, F&& body) {
  unsigned t = thread_count();
  if (t <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  t = static_cast<unsigned>(std::min<std::size_t>(t, n));
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += t) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

// splitmix64: 64-bit counter-based generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // Uniform in [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::uint64_t state_;
};

}  // namespace rearrange
