#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "grid_function.hpp"

namespace rearrange {

// Volume of the unit ball: c_1 = 2, c_2 = pi.
inline double unit_ball_volume(int n) {
  if (n == 1) return 2.0;
  if (n == 2) return M_PI;
  throw Error(ErrorKind::Config, "dimension must be 1 or 2");
}

// Radial profile v(|x|) in R^n sampled at r_i = i * r_max / (count - 1).
class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(int n, double r_max, std::vector<double> samples) : n_(n), r_max_(r_max), v_(std::move(samples)) {
    if (n_ != 1 && n_ != 2) throw Error(ErrorKind::InvalidProfile, "dimension must be 1 or 2");
    if (v_.size() < 3 || !(r_max_ > 0.0)) throw Error(ErrorKind::InvalidProfile, "need at least 3 samples and r_max > 0");
    for (double x : v_)
      if (!std::isfinite(x) || x < 0.0) throw Error(ErrorKind::InvalidProfile, "samples must be finite and non-negative");
    build_slopes();
  }

  static RadialProfile sample(int n, double r_max, std::size_t count, const std::function<double(double)>& fn) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = fn(r_max * static_cast<double>(i) / static_cast<double>(count - 1));
    return RadialProfile(n, r_max, std::move(v));
  }

  int dim() const { return n_; }
  double r_max() const { return r_max_; }
  std::size_t count() const { return v_.size(); }
  double dr() const { return r_max_ / static_cast<double>(v_.size() - 1); }
  double r(std::size_t i) const { return dr() * static_cast<double>(i); }
  const std::vector<double>& samples() const { return v_; }

  double value_linear(double r) const {
    r = std::fabs(r);
    double u = r / dr();
    if (u >= static_cast<double>(v_.size() - 1)) return 0.0;
    std::size_t i = static_cast<std::size_t>(u);
    double t = u - static_cast<double>(i);
    return (1 - t) * v_[i] + t * v_[i + 1];
  }

  // Monotone cubic Hermite interpolant, even in r.
  double value(double r) const {
    r = std::fabs(r);
    double h = dr();
    double u = r / h;
    if (u >= static_cast<double>(v_.size() - 1)) return 0.0;
    std::size_t i = static_cast<std::size_t>(u);
    double t = u - static_cast<double>(i);
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v_[i] + (t3 - 2 * t2 + t) * h * d_[i] + (-2 * t3 + 3 * t2) * v_[i + 1] +
           (t3 - t2) * h * d_[i + 1];
  }

  // Outer radius of the support (first node after the last positive sample).
  double support_radius() const {
    std::size_t last = 0;
    for (std::size_t i = 0; i < v_.size(); ++i)
      if (v_[i] > 0.0) last = i;
    return r(std::min(last + 1, v_.size() - 1));
  }

  bool nonincreasing() const {
    for (std::size_t i = 0; i + 1 < v_.size(); ++i)
      if (v_[i + 1] > v_[i]) return false;
    return true;
  }

  // Exact integral of r^(n-1) g over [r_i, r_{i+1}] for g linear between a and b.
  static double segment_moment(int n, double r0, double r1, double a, double b) {
    double h = r1 - r0;
    if (n == 1) return 0.5 * h * (a + b);
    return h * (r0 * (a + b) / 2.0 + h * (a + 2.0 * b) / 6.0);
  }

  // int_{R^n} v of the piecewise linear interpolant.
  double mass() const {
    KahanSum s;
    for (std::size_t i = 0; i + 1 < v_.size(); ++i) s += segment_moment(n_, r(i), r(i + 1), v_[i], v_[i + 1]);
    return n_ * unit_ball_volume(n_) * s.value();
  }

  RadialProfile scaled(double c) const {
    auto w = v_;
    for (auto& x : w) x *= c;
    return RadialProfile(n_, r_max_, std::move(w));
  }

  // Samples on a 1-D grid (n = 1) or a 2-D grid (n = 2) via the cubic interpolant.
  GridFunction to_grid(std::size_t count, double half_width) const {
    Axis ax{-half_width, half_width, count};
    if (n_ == 1) return GridFunction::sample1d(ax, [this](double x) { return value(x); });
    return GridFunction::sample({ax, ax}, [this](double x, double y) { return value(std::hypot(x, y)); });
  }

 private:
  void build_slopes() {
    std::size_t n = v_.size();
    double h = dr();
    d_.assign(n, 0.0);
    std::vector<double> sec(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) sec[i] = (v_[i + 1] - v_[i]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      // centred slope, limited to keep monotone pieces monotone
      if (sec[i - 1] * sec[i] > 0.0) {
        double m = std::min(std::fabs(sec[i - 1]), std::fabs(sec[i]));
        d_[i] = std::copysign(std::min(0.5 * std::fabs(sec[i - 1] + sec[i]), 3.0 * m), sec[i]);
      }
    }
    d_[0] = 0.0;
    d_[n - 1] = sec[n - 2];
  }

  int n_ = 1;
  double r_max_ = 1.0;
  std::vector<double> v_, d_;
};

// .rad files: JSON {"dim", "r_max", "samples"}.
inline nlohmann::json to_json(const RadialProfile& f) {
  return {{"dim", f.dim()}, {"r_max", f.r_max()}, {"samples", f.samples()}};
}

inline RadialProfile radial_from_json(const nlohmann::json& j) {
  try {
    return RadialProfile(j.at("dim").get<int>(), j.at("r_max").get<double>(), j.at("samples").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

inline void write_rad(const RadialProfile& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path);
  out << to_json(f).dump() << "\n";
}

inline RadialProfile read_rad(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  return radial_from_json(j);
}

}  // namespace rearrange
