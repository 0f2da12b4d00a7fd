#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace rearrange {

struct Interval {
  double a = 0.0;
  double b = 0.0;
  double center() const { return 0.5 * (a + b); }
  double length() const { return b - a; }
  bool operator==(const Interval&) const = default;
};

namespace detail {

inline double touch_tol(double x, double y) {
  return 8.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::fabs(x), std::fabs(y)});
}

// Merges intervals whose closures meet; input sorted by left end.
inline void merge_touching(std::vector<Interval>& iv) {
  if (iv.empty()) return;
  std::size_t w = 0;
  for (std::size_t i = 1; i < iv.size(); ++i) {
    if (iv[i].a <= iv[w].b + touch_tol(iv[i].a, iv[w].b)) {
      iv[w].b = std::max(iv[w].b, iv[i].b);
    } else {
      iv[++w] = iv[i];
    }
  }
  iv.resize(w + 1);
}

enum class FlowStop { Time, FirstMerge, Settled };

struct FlowResult {
  double elapsed = 0.0;
  bool merged = false;
};

// Event-driven motion of a sorted family of closed intervals (zero length
// allowed): every interval moves toward the origin at unit speed until its
// centre reaches 0; intervals merge when they touch.
inline FlowResult flow(std::vector<Interval>& iv, double tau, FlowStop stop = FlowStop::Time) {
  FlowResult res;
  merge_touching(iv);
  double t = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<int> vel(iv.size());
  for (int guard = 0; guard < 100000; ++guard) {
    if (stop == FlowStop::Time && t >= tau) break;
    vel.resize(iv.size());
    bool moving = false;
    double dt = (stop == FlowStop::Time) ? tau - t : inf;
    for (std::size_t i = 0; i < iv.size(); ++i) {
      double c = iv[i].center();
      vel[i] = -sgn(c);
      if (vel[i] != 0) {
        moving = true;
        dt = std::min(dt, std::fabs(c));
      }
    }
    if (!moving) break;
    double merge_dt = inf;
    for (std::size_t i = 0; i + 1 < iv.size(); ++i) {
      int closing = vel[i] - vel[i + 1];
      if (closing > 0) merge_dt = std::min(merge_dt, (iv[i + 1].a - iv[i].b) / closing);
    }
    merge_dt = std::max(merge_dt, 0.0);
    bool merge_event = merge_dt <= dt;
    dt = std::min(dt, merge_dt);
    for (std::size_t i = 0; i < iv.size(); ++i) {
      if (vel[i] == 0) continue;
      double c = iv[i].center();
      if (std::fabs(std::fabs(c) - dt) <= touch_tol(c, dt)) {
        double h = 0.5 * iv[i].length();
        iv[i] = {-h, h};
      } else {
        iv[i].a += vel[i] * dt;
        iv[i].b += vel[i] * dt;
      }
    }
    t += dt;
    std::size_t before = iv.size();
    merge_touching(iv);
    if (iv.size() < before) res.merged = true;
    if (stop == FlowStop::FirstMerge && (res.merged || merge_event)) {
      res.merged = true;
      break;
    }
  }
  res.elapsed = t;
  return res;
}

}  // namespace detail

// Finite union of pairwise disjoint open intervals, kept sorted; intervals
// whose closures touch are merged and zero-length intervals are dropped.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> iv) : iv_(std::move(iv)) {
    for (const auto& x : iv_) {
      if (!std::isfinite(x.a) || !std::isfinite(x.b) || x.a > x.b)
        throw Error(ErrorKind::InvalidInterval, "interval endpoints must be finite with a <= b");
    }
    std::erase_if(iv_, [](const Interval& x) { return !(x.b > x.a); });
    std::sort(iv_.begin(), iv_.end(), [](const Interval& l, const Interval& r) { return l.a < r.a; });
    for (std::size_t i = 0; i + 1 < iv_.size(); ++i) {
      if (iv_[i + 1].a < iv_[i].b - detail::touch_tol(iv_[i + 1].a, iv_[i].b))
        throw Error(ErrorKind::InvalidInterval, "intervals overlap");
    }
    detail::merge_touching(iv_);
  }
  IntervalUnion(std::initializer_list<Interval> iv) : IntervalUnion(std::vector<Interval>(iv)) {}

  const std::vector<Interval>& intervals() const { return iv_; }
  std::size_t size() const { return iv_.size(); }
  bool empty() const { return iv_.empty(); }
  const Interval& operator[](std::size_t i) const { return iv_[i]; }

  double measure() const {
    KahanSum s;
    for (const auto& x : iv_) s += x.length();
    return s.value();
  }

  bool contains(double x) const {
    for (const auto& v : iv_)
      if (x > v.a && x < v.b) return true;
    return false;
  }

  bool contains(const IntervalUnion& other, double slack = 0.0) const {
    for (const auto& o : other.iv_) {
      bool ok = false;
      for (const auto& v : iv_)
        if (o.a >= v.a - slack && o.b <= v.b + slack) ok = true;
      if (!ok) return false;
    }
    return true;
  }

  std::vector<double> boundary() const {
    std::vector<double> out;
    for (const auto& v : iv_) {
      out.push_back(v.a);
      out.push_back(v.b);
    }
    return out;
  }

 private:
  std::vector<Interval> iv_;
};

// Centred interval of the same measure.
inline IntervalUnion rearrange_symmetric(const IntervalUnion& u) {
  double m = u.measure();
  if (m <= 0.0) return {};
  return IntervalUnion({{-0.5 * m, 0.5 * m}});
}

inline IntervalUnion m_tau(const IntervalUnion& u, double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorKind::Config, "tau must be >= 0");
  std::vector<Interval> iv = u.intervals();
  detail::flow(iv, tau);
  return IntervalUnion(std::move(iv));
}

// First time at which two intervals touch under the flow, if any.
inline std::optional<double> next_merge_time(const IntervalUnion& u) {
  std::vector<Interval> iv = u.intervals();
  auto r = detail::flow(iv, 0.0, detail::FlowStop::FirstMerge);
  if (!r.merged) return std::nullopt;
  return r.elapsed;
}

// Time after which the flow is stationary (a single centred interval).
inline double settle_time(const IntervalUnion& u) {
  std::vector<Interval> iv = u.intervals();
  return detail::flow(iv, 0.0, detail::FlowStop::Settled).elapsed;
}

// sup over p in `later` of the distance from p to the nearest point of `earlier`.
inline double directed_boundary_distance(const IntervalUnion& later, const IntervalUnion& earlier) {
  auto pb = later.boundary();
  auto qb = earlier.boundary();
  if (pb.empty()) return 0.0;
  if (qb.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (double p : pb) {
    double best = std::numeric_limits<double>::infinity();
    for (double q : qb) best = std::min(best, std::fabs(p - q));
    worst = std::max(worst, best);
  }
  return worst;
}

inline std::string to_string(const IntervalUnion& u) {
  std::string s = "{";
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) s += ", ";
    s += "(" + std::to_string(u[i].a) + ", " + std::to_string(u[i].b) + ")";
  }
  return s + "}";
}

}  // namespace rearrange
