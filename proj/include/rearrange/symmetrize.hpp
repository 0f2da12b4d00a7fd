#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "common.hpp"
#include "grid_function.hpp"
#include "interval_sets.hpp"

namespace rearrange {

struct SymmetrizeOptions {
  std::size_t heights = 512;
};

struct LipschitzReport {
  std::vector<double> per_axis;
  double c0 = 0.0;
};

inline LipschitzReport lipschitz_report(const GridFunction& f) {
  LipschitzReport r;
  if (f.dim() == 1) {
    double m = 0.0, dx = f.axes()[0].step();
    for (std::size_t i = 0; i + 1 < f.samples().size(); ++i) m = std::max(m, std::fabs(f.at(i + 1) - f.at(i)) / dx);
    r.per_axis = {m};
  } else {
    std::size_t nx = f.axes()[0].count, ny = f.axes()[1].count;
    double mx = 0.0, my = 0.0, dx = f.axes()[0].step(), dy = f.axes()[1].step();
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        if (i + 1 < nx) mx = std::max(mx, std::fabs(f.at(i + 1, j) - f.at(i, j)) / dx);
        if (j + 1 < ny) my = std::max(my, std::fabs(f.at(i, j + 1) - f.at(i, j)) / dy);
      }
    r.per_axis = {mx, my};
  }
  r.c0 = *std::max_element(r.per_axis.begin(), r.per_axis.end());
  return r;
}

struct SymmetrizeResult {
  GridFunction f;
  std::size_t clipped = 0;
  double c0 = 0.0;
};

// Moves the closed section at height h in place.
using SectionMotion = std::function<void(double h, std::vector<Interval>&)>;

namespace detail {

inline double signed_depth(const std::vector<Interval>& s, double x) {
  double d = -std::numeric_limits<double>::infinity();
  for (const auto& v : s) d = std::max(d, std::min(x - v.a, v.b - x));
  return d;
}

inline std::vector<Interval> intersect(const std::vector<Interval>& u, const std::vector<Interval>& v) {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < u.size() && j < v.size()) {
    double a = std::max(u[i].a, v[j].a), b = std::min(u[i].b, v[j].b);
    if (b >= a) out.push_back({a, b});
    if (u[i].b < v[j].b) ++i; else ++j;
  }
  return out;
}

inline double total_length(const std::vector<Interval>& s) {
  double m = 0.0;
  for (const auto& v : s) m += v.length();
  return m;
}

// Symmetrizes one slice. Sections are taken at every positive node value, at
// the midpoint heights of `grid` and at `extra` heights; after moving, each
// node value is recovered from the zero crossing of its signed depth between
// consecutive heights.
inline std::vector<double> symmetrize_slice(const double* v, std::size_t n, double x0, double dx, const HeightGrid& grid,
                                            const std::vector<double>& extra, const SectionMotion& motion,
                                            std::size_t& clipped) {
  std::vector<double> out(n, 0.0);
  double top = 0.0;
  for (std::size_t j = 0; j < n; ++j) top = std::max(top, v[j]);
  if (top <= 0.0) return out;
  std::vector<double> hs;
  hs.reserve(n + grid.count + extra.size());
  for (std::size_t j = 0; j < n; ++j)
    if (v[j] > 0.0) hs.push_back(v[j]);
  for (std::size_t k = 0; k < grid.count; ++k) {
    double h = grid.height(k);
    if (h < top) hs.push_back(h);
  }
  for (double h : extra)
    if (h > 0.0 && h < top) hs.push_back(h);
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  hs.insert(hs.begin(), 0.0);

  const std::size_t K = hs.size();
  std::vector<std::vector<Interval>> sec(K);
  const double tol = 1e-9 * dx;
  for (std::size_t k = 0; k < K; ++k) {
    sec[k] = slice_sections(v, n, x0, dx, hs[k], k > 0);
    motion(hs[k], sec[k]);
    if (k > 0) {
      double before = total_length(sec[k]);
      auto cut = intersect(sec[k], sec[k - 1]);
      double lost = before - total_length(cut);
      if (lost > tol || cut.size() < sec[k].size()) ++clipped;
      sec[k] = std::move(cut);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double x = x0 + dx * static_cast<double>(j);
    if (!(signed_depth(sec[0], x) > 0.0)) continue;
    std::size_t lo = 0, hi = K;  // depth > 0 at lo, <= 0 at hi (or hi == K)
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (signed_depth(sec[mid], x) > 0.0) lo = mid; else hi = mid;
    }
    if (hi == K) {
      out[j] = hs[K - 1];
      continue;
    }
    double d0 = signed_depth(sec[lo], x), d1 = signed_depth(sec[hi], x);
    if (!std::isfinite(d1)) {
      out[j] = hs[lo];
      continue;
    }
    out[j] = hs[lo] + (hs[hi] - hs[lo]) * d0 / (d0 - d1);
  }
  return out;
}

inline SymmetrizeResult symmetrize_with(const GridFunction& f, const SectionMotion& motion, const SymmetrizeOptions& opt,
                                        const std::vector<double>& extra = {}) {
  HeightGrid grid{opt.heights, f.sup_norm()};
  std::vector<double> s(f.samples().size(), 0.0);
  const Axis& ax = f.sym_axis();
  std::vector<std::size_t> clips(f.slice_count(), 0);
  parallel_for(f.slice_count(), [&](std::size_t k) {
    auto g = symmetrize_slice(f.slice(k), ax.count, ax.min, ax.step(), grid, extra, motion, clips[k]);
    std::copy(g.begin(), g.end(), s.begin() + static_cast<std::ptrdiff_t>(k * ax.count));
  });
  SymmetrizeResult r;
  r.f = GridFunction(f.axes(), std::move(s), false);
  r.f.zero_boundary();
  for (auto c : clips) r.clipped += c;
  return r;
}

}  // namespace detail

// Steiner symmetrization along the last axis.
inline GridFunction steiner_full(const GridFunction& f, const SymmetrizeOptions& opt = {}) {
  auto motion = [](double, std::vector<Interval>& s) {
    double m = detail::total_length(s);
    if (s.empty()) return;
    s = {{-0.5 * m, 0.5 * m}};
  };
  return detail::symmetrize_with(f, motion, opt).f;
}

// Continuous symmetrization f^tau.
inline GridFunction steiner_continuous(const GridFunction& f, double tau, const SymmetrizeOptions& opt = {}) {
  if (!(tau >= 0.0)) throw Error(ErrorKind::Config, "tau must be >= 0");
  auto motion = [tau](double, std::vector<Interval>& s) { detail::flow(s, tau); };
  return detail::symmetrize_with(f, motion, opt).f;
}

// Truncated continuous symmetrization with speed min(1, h/h0).
inline SymmetrizeResult steiner_truncated(const GridFunction& f, double tau, double h0, const SymmetrizeOptions& opt = {}) {
  if (!(tau >= 0.0) || !(h0 > 0.0)) throw Error(ErrorKind::Config, "need tau >= 0 and h0 > 0");
  double c0 = lipschitz_report(f).c0;
  if (c0 > 0.0 && tau >= h0 / c0)
    throw Error(ErrorKind::TauTooLarge, "tau must be below h0/c0 = " + std::to_string(h0 / c0));
  auto motion = [tau, h0](double h, std::vector<Interval>& s) { detail::flow(s, std::min(1.0, h / h0) * tau); };
  auto r = detail::symmetrize_with(f, motion, opt, {h0});
  r.c0 = c0;
  return r;
}

// Diameter of the box along the symmetrization axis; the flow is stationary past it.
inline double tau_infinity(const GridFunction& f) {
  const Axis& a = f.sym_axis();
  return a.max - a.min;
}

}  // namespace rearrange
