#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "interval_sets.hpp"

namespace rearrange {

struct Axis {
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 2;
  double step() const { return (max - min) / static_cast<double>(count - 1); }
  double coord(std::size_t i) const { return min + step() * static_cast<double>(i); }
  bool operator==(const Axis&) const = default;
};

// Non-negative samples on a uniform 1-D or 2-D node grid, row-major, the last
// axis being the direction of symmetrization. Values vanish on the boundary.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<Axis> axes, std::vector<double> samples, bool check = true)
      : axes_(std::move(axes)), samples_(std::move(samples)) {
    if (axes_.empty() || axes_.size() > 2) throw Error(ErrorKind::InvalidGrid, "dimension must be 1 or 2");
    std::size_t n = 1;
    for (const auto& a : axes_) {
      if (a.count < 3 || !(a.max > a.min)) throw Error(ErrorKind::InvalidGrid, "each axis needs count >= 3 and max > min");
      n *= a.count;
    }
    if (samples_.size() != n) throw Error(ErrorKind::InvalidGrid, "sample count does not match axes");
    if (check) validate();
  }

  static GridFunction sample(std::vector<Axis> axes, const std::function<double(double, double)>& fn) {
    std::vector<double> s;
    if (axes.size() == 1) {
      for (std::size_t i = 0; i < axes[0].count; ++i) s.push_back(fn(axes[0].coord(i), 0.0));
    } else {
      for (std::size_t i = 0; i < axes[0].count; ++i)
        for (std::size_t j = 0; j < axes[1].count; ++j) s.push_back(fn(axes[0].coord(i), axes[1].coord(j)));
    }
    GridFunction g(std::move(axes), std::move(s), false);
    g.zero_boundary();
    g.validate();
    return g;
  }

  static GridFunction sample1d(Axis ax, const std::function<double(double)>& fn) {
    return sample({ax}, [&](double x, double) { return fn(x); });
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& sym_axis() const { return axes_.back(); }
  std::vector<double>& samples() { return samples_; }
  const std::vector<double>& samples() const { return samples_; }

  std::size_t slice_count() const { return dim() == 1 ? 1 : axes_[0].count; }
  std::size_t slice_len() const { return axes_.back().count; }
  double slice_coord(std::size_t k) const { return dim() == 1 ? 0.0 : axes_[0].coord(k); }
  const double* slice(std::size_t k) const { return samples_.data() + k * slice_len(); }
  double* slice(std::size_t k) { return samples_.data() + k * slice_len(); }

  double at(std::size_t i) const { return samples_[i]; }
  double at(std::size_t i, std::size_t j) const { return samples_[i * axes_[1].count + j]; }

  double cell_volume() const {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.step();
    return v;
  }

  double sup_norm() const {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, v);
    return m;
  }

  // Node-sum quadrature (the boundary values vanish, so this is the trapezoid rule).
  double lp_norm_p(double p) const {
    KahanSum s;
    for (double v : samples_) s += std::pow(v, p);
    return s.value() * cell_volume();
  }
  double integral() const { return lp_norm_p(1.0); }

  void zero_boundary() {
    if (dim() == 1) {
      samples_.front() = 0.0;
      samples_.back() = 0.0;
      return;
    }
    std::size_t nx = axes_[0].count, ny = axes_[1].count;
    for (std::size_t j = 0; j < ny; ++j) {
      samples_[j] = 0.0;
      samples_[(nx - 1) * ny + j] = 0.0;
    }
    for (std::size_t i = 0; i < nx; ++i) {
      samples_[i * ny] = 0.0;
      samples_[i * ny + ny - 1] = 0.0;
    }
  }

  void validate() const {
    for (double v : samples_)
      if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::InvalidGrid, "samples must be finite and non-negative");
    auto bad = [](double v) { return v != 0.0; };
    if (dim() == 1) {
      if (bad(samples_.front()) || bad(samples_.back())) throw Error(ErrorKind::InvalidGrid, "boundary samples must be zero");
      return;
    }
    std::size_t nx = axes_[0].count, ny = axes_[1].count;
    for (std::size_t j = 0; j < ny; ++j)
      if (bad(samples_[j]) || bad(samples_[(nx - 1) * ny + j])) throw Error(ErrorKind::InvalidGrid, "boundary samples must be zero");
    for (std::size_t i = 0; i < nx; ++i)
      if (bad(samples_[i * ny]) || bad(samples_[i * ny + ny - 1])) throw Error(ErrorKind::InvalidGrid, "boundary samples must be zero");
  }

  // Piecewise (bi)linear interpolant.
  double interpolate(double x, double y = 0.0) const {
    auto locate = [](const Axis& a, double c, std::size_t& i, double& t) {
      double u = (c - a.min) / a.step();
      if (u <= 0.0 || u >= static_cast<double>(a.count - 1)) return false;
      i = std::min<std::size_t>(static_cast<std::size_t>(u), a.count - 2);
      t = u - static_cast<double>(i);
      return true;
    };
    std::size_t i, j;
    double t, w;
    if (dim() == 1) {
      if (!locate(axes_[0], x, i, t)) return 0.0;
      return (1 - t) * samples_[i] + t * samples_[i + 1];
    }
    if (!locate(axes_[0], x, i, t) || !locate(axes_[1], y, j, w)) return 0.0;
    return (1 - t) * ((1 - w) * at(i, j) + w * at(i, j + 1)) + t * ((1 - w) * at(i + 1, j) + w * at(i + 1, j + 1));
  }

  // Resampled on a grid with half the number of cells (same extent).
  GridFunction coarsened() const {
    std::vector<Axis> ax = axes_;
    for (auto& a : ax) a.count = std::max<std::size_t>(3, (a.count - 1) / 2 + 1);
    if (dim() == 1) return sample(ax, [&](double x, double) { return interpolate(x); });
    return sample(ax, [&](double x, double y) { return interpolate(x, y); });
  }

 private:
  std::vector<Axis> axes_;
  std::vector<double> samples_;
};

// ---- .gfn files: JSON {"dim", "axes":[{"min","max","count"}], "samples":[...]} ----

inline nlohmann::json to_json(const GridFunction& f) {
  nlohmann::json j;
  j["dim"] = f.dim();
  j["axes"] = nlohmann::json::array();
  for (const auto& a : f.axes()) j["axes"].push_back({{"min", a.min}, {"max", a.max}, {"count", a.count}});
  j["samples"] = f.samples();
  return j;
}

inline GridFunction grid_from_json(const nlohmann::json& j) {
  try {
    int dim = j.at("dim").get<int>();
    std::vector<Axis> axes;
    for (const auto& a : j.at("axes")) axes.push_back({a.at("min").get<double>(), a.at("max").get<double>(), a.at("count").get<std::size_t>()});
    if (static_cast<int>(axes.size()) != dim) throw Error(ErrorKind::Parse, "axes length differs from dim");
    return GridFunction(std::move(axes), j.at("samples").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

inline void write_gfn(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path);
  out << to_json(f).dump() << "\n";
}

inline GridFunction read_gfn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  return grid_from_json(j);
}

// ---- level sets ----

// Midpoint heights (k - 1/2) * sup / n_h, each carrying weight sup / n_h.
struct HeightGrid {
  std::size_t count = 512;
  double sup = 1.0;
  double weight() const { return sup / static_cast<double>(count); }
  double height(std::size_t k) const { return (static_cast<double>(k) + 0.5) * weight(); }
  std::vector<double> heights() const {
    std::vector<double> h(count);
    for (std::size_t k = 0; k < count; ++k) h[k] = height(k);
    return h;
  }
};

namespace detail {

// Components of {F >= h} (closed = true) or {F > h} for the piecewise linear
// interpolant F of one slice.
inline std::vector<Interval> slice_sections(const double* v, std::size_t n, double x0, double dx, double h, bool closed) {
  std::vector<Interval> out;
  auto in = [&](std::size_t j) { return closed ? v[j] >= h : v[j] > h; };
  auto cross = [&](std::size_t j0, std::size_t j1) {
    double f0 = v[j0], f1 = v[j1];
    double t = (h - f0) / (f1 - f0);
    return x0 + dx * (static_cast<double>(j0) + t * (static_cast<double>(j1) - static_cast<double>(j0)));
  };
  std::size_t j = 0;
  while (j < n) {
    if (!in(j)) {
      ++j;
      continue;
    }
    std::size_t s = j;
    while (j + 1 < n && in(j + 1)) ++j;
    double a = (s == 0) ? x0 : cross(s - 1, s);
    double b = (j + 1 >= n) ? x0 + dx * static_cast<double>(n - 1) : cross(j + 1, j);
    if (closed || b > a) out.push_back({a, b});
    ++j;
  }
  return out;
}

}  // namespace detail

// {x_n : f(x', x_n) > h} on slice `slice` via linear interpolation.
inline IntervalUnion superlevel_section(const GridFunction& f, std::size_t slice, double h) {
  if (slice >= f.slice_count()) throw Error(ErrorKind::Config, "slice index out of range");
  const Axis& ax = f.sym_axis();
  return IntervalUnion(detail::slice_sections(f.slice(slice), ax.count, ax.min, ax.step(), h, false));
}

// sections[slice][k] = superlevel set at grid.height(k).
inline std::vector<std::vector<IntervalUnion>> extract_sections(const GridFunction& f, const HeightGrid& grid) {
  std::vector<std::vector<IntervalUnion>> out(f.slice_count());
  for (std::size_t s = 0; s < f.slice_count(); ++s)
    for (std::size_t k = 0; k < grid.count; ++k) out[s].push_back(superlevel_section(f, s, grid.height(k)));
  return out;
}

// g(x_n) = sum_k w_k chi_{U_k}(x_n) at the nodes of `axis`. Sections must be
// nested (decreasing in k) up to one cell.
inline std::vector<double> layer_cake(const std::vector<IntervalUnion>& sections, const std::vector<double>& weights, const Axis& axis) {
  if (sections.size() != weights.size()) throw Error(ErrorKind::Config, "sections and weights differ in length");
  for (std::size_t k = 1; k < sections.size(); ++k) {
    double excess = 0.0;
    for (const auto& v : sections[k].intervals()) {
      double covered = 0.0;
      for (const auto& u : sections[k - 1].intervals()) covered += std::max(0.0, std::min(v.b, u.b) - std::max(v.a, u.a));
      excess += v.length() - covered;
    }
    if (excess > axis.step() * (1.0 + 1e-9)) throw Error(ErrorKind::NonNestedSections, "section " + std::to_string(k) + " leaves its predecessor");
  }
  std::vector<double> g(axis.count, 0.0);
  for (std::size_t j = 0; j < axis.count; ++j) {
    double x = axis.coord(j);
    KahanSum s;
    for (std::size_t k = 0; k < sections.size(); ++k)
      if (sections[k].contains(x)) s += weights[k];
    g[j] = s.value();
  }
  return g;
}

}  // namespace rearrange
