#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <json.hpp>

#include "common.hpp"
#include "grid_function.hpp"
#include "interval_sets.hpp"
#include "kernel.hpp"

namespace rearrange {

// One slice x' of a good function: piecewise linear in x_n through (y_i, f_i).
struct ProfileSlice {
  double x = 0.0;
  std::vector<double> y, f;
};

struct Crossing {
  double y = 0.0;
  double dy_dh = 0.0;                                       // 1 / slope
  double dy_dx = std::numeric_limits<double>::quiet_NaN();  // across slices (2-D only)
};

struct LevelEndpoints {
  double h = 0.0;
  std::size_t slice = 0;
  std::vector<Crossing> crossings;
};

class GoodProfile {
 public:
  GoodProfile() = default;
  GoodProfile(int dim, std::vector<ProfileSlice> slices, double slice_width = 1.0, double min_slope = 1e-9)
      : dim_(dim), slices_(std::move(slices)), width_(slice_width) {
    if (dim_ != 1 && dim_ != 2) throw Error(ErrorKind::InvalidProfile, "dimension must be 1 or 2");
    if (slices_.empty() || (dim_ == 1 && slices_.size() != 1))
      throw Error(ErrorKind::InvalidProfile, "a 1-D profile has exactly one slice");
    if (!(width_ > 0.0)) throw Error(ErrorKind::InvalidProfile, "slice width must be positive");
    for (std::size_t a = 0; a < slices_.size(); ++a) {
      const auto& sl = slices_[a];
      if (sl.y.size() != sl.f.size() || sl.y.size() < 2) throw Error(ErrorKind::InvalidProfile, "slice needs matching y, f lists");
      if (sl.f.front() != 0.0 || sl.f.back() != 0.0) throw Error(ErrorKind::InvalidProfile, "profile must vanish at both ends");
      for (std::size_t i = 0; i < sl.y.size(); ++i) {
        if (!(sl.f[i] >= 0.0) || !std::isfinite(sl.f[i])) throw Error(ErrorKind::InvalidProfile, "values must be finite and >= 0");
        if (i + 1 < sl.y.size()) {
          double dy = sl.y[i + 1] - sl.y[i];
          if (!(dy > 0.0)) throw Error(ErrorKind::InvalidProfile, "breakpoints must increase");
          bool zero_run = sl.f[i] == 0.0 && sl.f[i + 1] == 0.0;
          if (!zero_run && std::fabs(sl.f[i + 1] - sl.f[i]) / dy < min_slope)
            throw Error(ErrorKind::InvalidProfile, "slope below the floor on slice " + std::to_string(a));
        }
      }
      if (a > 0 && !(sl.x > slices_[a - 1].x)) throw Error(ErrorKind::InvalidProfile, "slices must be sorted");
    }
  }

  static GoodProfile line(std::vector<double> y, std::vector<double> f, double min_slope = 1e-9) {
    return GoodProfile(1, {ProfileSlice{0.0, std::move(y), std::move(f)}}, 1.0, min_slope);
  }

  // Slices at the midpoints of nx cells of [x0, x1], each sampled at ny
  // breakpoints on [y0, y1].
  static GoodProfile sampled_2d(const std::function<double(double, double)>& fn, double x0, double x1, std::size_t nx, double y0,
                                double y1, std::size_t ny, double min_slope = 1e-9) {
    double dx = (x1 - x0) / static_cast<double>(nx);
    Axis ay{y0, y1, ny};
    std::vector<ProfileSlice> sl;
    for (std::size_t a = 0; a < nx; ++a) {
      ProfileSlice s;
      s.x = x0 + (static_cast<double>(a) + 0.5) * dx;
      for (std::size_t j = 0; j < ny; ++j) {
        s.y.push_back(ay.coord(j));
        s.f.push_back(j == 0 || j + 1 == ny ? 0.0 : std::max(0.0, fn(s.x, ay.coord(j))));
      }
      sl.push_back(std::move(s));
    }
    return GoodProfile(2, std::move(sl), dx, min_slope);
  }

  int dim() const { return dim_; }
  std::size_t slice_count() const { return slices_.size(); }
  const ProfileSlice& slice(std::size_t a) const { return slices_[a]; }
  double slice_width() const { return width_; }

  double sup() const {
    double m = 0.0;
    for (const auto& s : slices_)
      for (double v : s.f) m = std::max(m, v);
    return m;
  }

  std::vector<double> exceptional_heights() const {
    std::vector<double> e;
    for (const auto& s : slices_)
      for (double v : s.f)
        if (v > 0.0) e.push_back(v);
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
  }

  // Crossings of {f = h} on slice a, sorted; segment index and slope attached.
  std::vector<Crossing> crossings(std::size_t a, double h) const {
    const auto& s = slices_[a];
    std::vector<Crossing> out;
    for (std::size_t i = 0; i + 1 < s.y.size(); ++i) {
      double f0 = s.f[i], f1 = s.f[i + 1];
      if ((f0 < h) == (f1 < h)) continue;
      double t = (h - f0) / (f1 - f0);
      Crossing c;
      c.y = s.y[i] + t * (s.y[i + 1] - s.y[i]);
      c.dy_dh = (s.y[i + 1] - s.y[i]) / (f1 - f0);
      out.push_back(c);
    }
    return out;
  }

  std::vector<Interval> sections(std::size_t a, double h) const {
    auto c = crossings(a, h);
    std::vector<Interval> iv;
    for (std::size_t k = 0; k + 1 < c.size(); k += 2) iv.push_back({c[k].y, c[k + 1].y});
    return iv;
  }

  // Crossings with cross-slice derivatives by central differences over
  // neighbouring slices with the same crossing count (one-sided at the ends).
  LevelEndpoints endpoints(std::size_t a, double h) const {
    LevelEndpoints e{h, a, crossings(a, h)};
    if (dim_ == 1) {
      for (auto& c : e.crossings) c.dy_dx = 0.0;
      return e;
    }
    std::vector<Crossing> lo, hi;
    bool has_lo = a > 0, has_hi = a + 1 < slices_.size();
    if (has_lo) lo = crossings(a - 1, h);
    if (has_hi) hi = crossings(a + 1, h);
    bool ok_lo = has_lo && lo.size() == e.crossings.size(), ok_hi = has_hi && hi.size() == e.crossings.size();
    for (std::size_t i = 0; i < e.crossings.size(); ++i) {
      double y = e.crossings[i].y;
      if (ok_lo && ok_hi)
        e.crossings[i].dy_dx = (hi[i].y - lo[i].y) / (slices_[a + 1].x - slices_[a - 1].x);
      else if (ok_hi)
        e.crossings[i].dy_dx = (hi[i].y - y) / (slices_[a + 1].x - slices_[a].x);
      else if (ok_lo)
        e.crossings[i].dy_dx = (y - lo[i].y) / (slices_[a].x - slices_[a - 1].x);
    }
    return e;
  }

  double value(std::size_t a, double y) const {
    const auto& s = slices_[a];
    if (y <= s.y.front() || y >= s.y.back()) return 0.0;
    std::size_t i = static_cast<std::size_t>(std::upper_bound(s.y.begin(), s.y.end(), y) - s.y.begin()) - 1;
    double t = (y - s.y[i]) / (s.y[i + 1] - s.y[i]);
    return (1 - t) * s.f[i] + t * s.f[i + 1];
  }

  // Exact int |f|^p along each slice, summed with the slice width.
  double lp_norm_p(double p) const {
    KahanSum total;
    for (const auto& s : slices_) {
      for (std::size_t i = 0; i + 1 < s.y.size(); ++i) {
        double u = s.f[i], v = s.f[i + 1], dy = s.y[i + 1] - s.y[i];
        if (std::fabs(v - u) < 1e-14 * std::max(1.0, u))
          total += std::pow(0.5 * (u + v), p) * dy * width_;
        else
          total += (std::pow(v, p + 1) - std::pow(u, p + 1)) / ((p + 1) * (v - u)) * dy * width_;
      }
    }
    return total.value();
  }

  // 1-D profiles only: samples of the interpolant on a grid.
  GridFunction to_grid(const Axis& ax) const {
    if (dim_ != 1) throw Error(ErrorKind::InvalidProfile, "to_grid needs a 1-D profile");
    return GridFunction::sample1d(ax, [this](double y) { return value(0, y); });
  }

 private:
  int dim_ = 1;
  std::vector<ProfileSlice> slices_;
  double width_ = 1.0;
};

// .prof files: JSON {"dim", "slice_width", "slices": [{"x", "y", "f"}]}.
inline nlohmann::json to_json(const GoodProfile& g) {
  nlohmann::json sl = nlohmann::json::array();
  for (std::size_t a = 0; a < g.slice_count(); ++a) sl.push_back({{"x", g.slice(a).x}, {"y", g.slice(a).y}, {"f", g.slice(a).f}});
  return {{"dim", g.dim()}, {"slice_width", g.slice_width()}, {"slices", sl}};
}

inline GoodProfile profile_from_json(const nlohmann::json& j) {
  try {
    std::vector<ProfileSlice> sl;
    for (const auto& s : j.at("slices"))
      sl.push_back({s.value("x", 0.0), s.at("y").get<std::vector<double>>(), s.at("f").get<std::vector<double>>()});
    return GoodProfile(j.at("dim").get<int>(), std::move(sl), j.value("slice_width", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

// (Kbar(r), Kbarbar(r)) for an integrable kernel.
inline std::pair<double, double> antiderivatives(const KernelSpec& spec, double r) {
  const auto& t = kernel_table(spec);
  return {t.Kbar(r), t.Kbarbar(r)};
}

// Per-height motion applied to the sections of a slice.
using LevelMotion = std::function<void(std::size_t slice, double h, std::vector<Interval>&)>;

// Continuous Steiner symmetrization of each section for time tau.
inline LevelMotion steiner_motion(double tau) {
  return [tau](std::size_t, double, std::vector<Interval>& iv) { detail::flow(iv, tau); };
}

// Every off-centre section moves away from the origin by delta (the
// time-reversed flow, which never merges intervals).
inline LevelMotion reverse_motion(double delta) {
  return [delta](std::size_t, double, std::vector<Interval>& iv) {
    for (auto& I : iv) {
      double c = sgn(I.center());
      I.a += delta * c;
      I.b += delta * c;
    }
  };
}

struct LevelOptions {
  std::size_t heights = 512;
  bool estimate_error = true;
};

struct LevelEnergyReport {
  double F = 0.0;  // F_eps^p
  double I = 0.0;  // F - c_eps ||g||_p^p from the level-set formula
  double c_eps = 0.0;
  double lp = 0.0;
  double error_estimate = 0.0;
  std::size_t heights = 0;
};

struct DerivativeReport {
  double value = 0.0;
  double error_estimate = 0.0;
  bool monotone_in_eps = true;  // eps = 0 only: the eps-sequence was monotone
  std::vector<double> eps_sequence, eps_values;
};

namespace detail {

inline double center_sign(const Interval& I) {
  double c = I.a + I.b;
  if (std::fabs(c) <= 1e-12 * (1.0 + std::fabs(I.a) + std::fabs(I.b))) return 0.0;
  return c > 0.0 ? 1.0 : -1.0;
}

// Midpoint heights of a uniform partition of (0, sup), nudged off the
// exceptional heights.
inline std::vector<double> level_heights(const GoodProfile& g, std::size_t nh) {
  double sup = g.sup(), dh = sup / static_cast<double>(nh);
  auto ex = g.exceptional_heights();
  std::vector<double> h(nh);
  for (std::size_t i = 0; i < nh; ++i) {
    h[i] = (static_cast<double>(i) + 0.5) * dh;
    auto it = std::lower_bound(ex.begin(), ex.end(), h[i] - 1e-9 * dh);
    if (it != ex.end() && std::fabs(*it - h[i]) < 1e-9 * dh) h[i] += 1e-6 * dh;
  }
  return h;
}

// w(k) = int_{cell 0} int_{cell k} |h - u|^(p-2) dh du on cells of width dh.
inline std::vector<double> power_weights(double p, std::size_t nh, double dh) {
  auto G = [p](double t) { return std::pow(std::fabs(t), p) / (p * (p - 1.0)); };
  std::vector<double> w(nh);
  for (std::size_t k = 0; k < nh; ++k) {
    double kd = static_cast<double>(k);
    w[k] = (k == 0 ? 2.0 * G(1.0) : G(kd + 1.0) - 2.0 * G(kd) + G(kd - 1.0)) * std::pow(dh, p);
  }
  return w;
}

using Sections = std::vector<std::vector<std::vector<Interval>>>;  // [slice][height]

inline Sections level_sections(const GoodProfile& g, const std::vector<double>& h, const LevelMotion& motion) {
  Sections S(g.slice_count(), std::vector<std::vector<Interval>>(h.size()));
  for (std::size_t a = 0; a < g.slice_count(); ++a)
    for (std::size_t i = 0; i < h.size(); ++i) {
      S[a][i] = g.sections(a, h[i]);
      if (motion) motion(a, h[i], S[a][i]);
    }
  return S;
}

// sum over slice pairs and height pairs of w(|i - j|) * pair(table, I, J).
template <class Pair>
double level_double_sum(const GoodProfile& g, const Sections& S, const std::vector<double>& w, const KernelSpec& base, Pair&& pair) {
  std::size_t ns = g.slice_count(), nh = w.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = a; b < ns; ++b) pairs.push_back({a, b});
  std::vector<double> part(pairs.size(), 0.0);
  // build the tables up front so the parallel loop only reads
  std::vector<const KernelTable*> tabs(pairs.size());
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    KernelSpec spec = base;
    spec.ell = g.dim() == 1 ? 0.0 : std::fabs(g.slice(pairs[q].first).x - g.slice(pairs[q].second).x);
    tabs[q] = &kernel_table(spec);
  }
  parallel_for(pairs.size(), [&](std::size_t q) {
    auto [a, b] = pairs[q];
    const KernelTable& t = *tabs[q];
    KahanSum sum;
    for (std::size_t i = 0; i < nh; ++i) {
      if (S[a][i].empty()) continue;
      for (std::size_t j = 0; j < nh; ++j) {
        if (S[b][j].empty()) continue;
        double acc = 0.0;
        for (const auto& I : S[a][i])
          for (const auto& J : S[b][j]) acc += pair(t, I, J);
        if (acc != 0.0) sum += w[i > j ? i - j : j - i] * acc;
      }
    }
    part[q] = (a == b ? 1.0 : 2.0) * sum.value();
  });
  return pairwise_sum(part) * g.slice_width() * g.slice_width();
}

inline double kbb_bracket(const KernelTable& t, const Interval& x, const Interval& y) {
  return t.Kbarbar(x.b - y.b) - t.Kbarbar(x.b - y.a) - t.Kbarbar(x.a - y.b) + t.Kbarbar(x.a - y.a);
}

inline double kb_bracket(const KernelTable& t, const Interval& x, const Interval& y) {
  return t.Kbar(x.b - y.b) - t.Kbar(x.b - y.a) - t.Kbar(x.a - y.b) + t.Kbar(x.a - y.a);
}

inline double level_I(const GoodProfile& g, const KernelSpec& spec, std::size_t nh, const LevelMotion& motion) {
  auto h = level_heights(g, nh);
  auto S = level_sections(g, h, motion);
  auto w = power_weights(spec.p, nh, g.sup() / static_cast<double>(nh));
  double p = spec.p;
  return p * (p - 1.0) * level_double_sum(g, S, w, spec, kbb_bracket);
}

inline double level_derivative(const GoodProfile& g, const KernelSpec& spec, std::size_t nh) {
  auto h = level_heights(g, nh);
  auto S = level_sections(g, h, nullptr);
  auto w = power_weights(spec.p, nh, g.sup() / static_cast<double>(nh));
  double p = spec.p;
  return -p * (p - 1.0) * level_double_sum(g, S, w, spec, [](const KernelTable& t, const Interval& x, const Interval& y) {
           double ds = center_sign(x) - center_sign(y);
           return ds == 0.0 ? 0.0 : kb_bracket(t, x, y) * ds;
         });
}

inline KernelSpec level_spec(const GoodProfile& g, double s, double p, double eps) {
  if (!(p > 1.0)) throw Error(ErrorKind::Config, "level-set formulas need p > 1");
  return KernelSpec{g.dim(), s, p, eps, 0.0};
}

}  // namespace detail

// F_eps^p(g) from the level-set representation (second antiderivative
// bracket); motion, if given, is applied to every section first.
inline LevelEnergyReport energy_levels(const GoodProfile& g, double s, double p, double eps, const LevelOptions& opt = {},
                                       const LevelMotion& motion = nullptr) {
  if (!(eps > 0.0)) throw Error(ErrorKind::Config, "energy_levels needs eps > 0");
  auto spec = detail::level_spec(g, s, p, eps);
  LevelEnergyReport r;
  r.heights = opt.heights;
  r.I = detail::level_I(g, spec, opt.heights, motion);
  r.c_eps = c_eps(g.dim(), s, p, eps);
  r.lp = g.lp_norm_p(p);
  r.F = r.I + r.c_eps * r.lp;
  if (opt.estimate_error) r.error_estimate = std::fabs(r.I - detail::level_I(g, spec, opt.heights / 2, motion));
  return r;
}

// d/dtau F_eps^p(g^tau) at tau = 0 from the first antiderivative bracket.
// eps = 0 is the limit of a decreasing eps sequence.
inline DerivativeReport derivative_nonlocal(const GoodProfile& g, double s, double p, double eps, const LevelOptions& opt = {}) {
  DerivativeReport r;
  if (eps > 0.0) {
    auto spec = detail::level_spec(g, s, p, eps);
    r.value = detail::level_derivative(g, spec, opt.heights);
    if (opt.estimate_error) r.error_estimate = std::fabs(r.value - detail::level_derivative(g, spec, opt.heights / 2));
    return r;
  }
  if (eps < 0.0) throw Error(ErrorKind::Config, "eps must be >= 0");
  for (double e : {1e-3, 1e-4, 1e-5, 1e-6}) {
    r.eps_sequence.push_back(e);
    r.eps_values.push_back(detail::level_derivative(g, detail::level_spec(g, s, p, e), opt.heights));
  }
  const auto& v = r.eps_values;
  bool down = true, up = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    down = down && v[i] <= v[i - 1];
    up = up && v[i] >= v[i - 1];
  }
  r.monotone_in_eps = down || up;
  r.value = v.back();
  r.error_estimate = std::fabs(v.back() - v[v.size() - 2]);
  return r;
}

enum class BracketCase { Separated, Nested, NestedReversed, Overlapping };

inline std::string to_string(BracketCase c) {
  switch (c) {
    case BracketCase::Separated: return "separated";
    case BracketCase::Nested: return "nested";
    case BracketCase::NestedReversed: return "nested_reversed";
    case BracketCase::Overlapping: return "overlapping";
  }
  return "?";
}

struct BracketResult {
  double value = 0.0;
  BracketCase kind = BracketCase::Separated;
  double lower_bound = 0.0;
};

// Kbar(x+ - y+) - Kbar(x+ - y-) - Kbar(x- - y+) + Kbar(x- - y-) for intervals
// with (x+ + x-) > (y+ + y-), together with the geometric case and its
// explicit lower bound.
inline BracketResult bracket_sign(double xm, double xp, double ym, double yp, const KernelSpec& spec) {
  if (!(xm < xp) || !(ym < yp)) throw Error(ErrorKind::InvalidInterval, "need x- < x+ and y- < y+");
  double D = (xp + xm) - (yp + ym);
  if (!(D > 0.0)) throw Error(ErrorKind::InvalidOrdering, "need (x+ + x-) - (y+ + y-) > 0");
  double v = 0.0;
  if (spec.eps > 0.0) {
    v = detail::kb_bracket(kernel_table(spec), {xm, xp}, {ym, yp});
  } else {
    // integral over x in (x-, x+) of K(x - y+) - K(x - y-), split at the cusps
    std::vector<double> cuts = {xm, xp};
    for (double c : {ym, yp})
      if (c > xm && c < xp) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      v += detail::gk([&](double x) { return spec(x - yp) - spec(x - ym); }, cuts[i], cuts[i + 1], 1e-13);
  }
  auto min_dk = [&](double r0, double r1) { return std::min(std::fabs(spec.derivative(r0)), std::fabs(spec.derivative(r1))); };
  BracketResult r;
  r.value = v;
  if (yp <= xm) {
    r.kind = BracketCase::Separated;
    r.lower_bound = (xp - xm) * (yp - ym) * min_dk(xm - yp, xp - ym);
  } else if (xm <= ym && yp <= xp) {
    r.kind = BracketCase::Nested;
    r.lower_bound = D * (yp - ym) * min_dk(ym - xm, xp - ym);
  } else if (ym <= xm && xp <= yp) {
    r.kind = BracketCase::NestedReversed;
    r.lower_bound = D * (xp - xm) * min_dk(yp - xp, xp - ym);
  } else {
    r.kind = BracketCase::Overlapping;
    r.lower_bound = D * (yp - xm) * min_dk(0.0, xp - ym) + (xm - ym) * (xp - yp) * min_dk(0.0, D);
  }
  return r;
}

struct LocalDerivativeReport {
  double value = 0.0;     // general-p bracket
  double factored = std::numeric_limits<double>::quiet_NaN();  // p = 2 factored form
  double max_abs_integrand = 0.0;
};

namespace detail {

// Integrand of the local derivative for one section: a = |dy+/dh|,
// b = |dy-/dh|, X = dy+/dx, Y = dy-/dx.
inline double local_bracket(double p, double a, double b, double X, double Y) {
  double t = p * std::pow(X * X + 1.0, 0.5 * p - 1.0) * X * (X + Y) * a * std::pow(b, p) +
             p * std::pow(Y * Y + 1.0, 0.5 * p - 1.0) * Y * (X + Y) * b * std::pow(a, p) -
             (p - 1.0) * std::pow(X * X + 1.0, 0.5 * p) * std::pow(b, p) * (a - b) +
             (p - 1.0) * std::pow(Y * Y + 1.0, 0.5 * p) * std::pow(a, p) * (a - b);
  return t * std::pow(a, -p) * std::pow(b, -p);
}

inline double local_factored(double a, double b, double X, double Y) {
  double q = b * X + a * Y;
  return (a + b) * ((a - b) * (a - b) + q * q) / (a * a * b * b);
}

}  // namespace detail

// Local derivative with the box delta_eps(y+ + y-): the (x, h)-integral of
// -delta_eps * bracket. Within each height band between breakpoint values the
// crossings are linear in h, so the active part of the box is found exactly.
inline LocalDerivativeReport derivative_local(const GoodProfile& g, double p, double eps_speed) {
  if (!(p > 1.0) || !(eps_speed > 0.0)) throw Error(ErrorKind::Config, "need p > 1 and eps > 0");
  using GL = boost::math::quadrature::gauss<double, 8>;
  LocalDerivativeReport rep;
  KahanSum total, fact;
  for (std::size_t a = 0; a < g.slice_count(); ++a) {
    std::vector<double> hs = {0.0};
    for (std::size_t b = (a > 0 ? a - 1 : 0); b <= std::min(a + 1, g.slice_count() - 1); ++b)
      for (double v : g.slice(b).f) hs.push_back(v);
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    for (std::size_t k = 0; k + 1 < hs.size(); ++k) {
      double h0 = hs[k], h1 = hs[k + 1];
      if (h1 - h0 <= 0.0) continue;
      // locate sections at the band midpoint; sums are linear in h inside the band
      double hm = 0.5 * (h0 + h1);
      auto c0 = g.crossings(a, hm);
      for (std::size_t m = 0; m + 1 < c0.size(); m += 2) {
        double z = c0[m].y + c0[m + 1].y, dz = c0[m].dy_dh + c0[m + 1].dy_dh;
        // |z + dz (h - hm)| < eps on [h0, h1]
        double lo = h0, hi = h1;
        if (std::fabs(dz) < 1e-300) {
          if (std::fabs(z) >= eps_speed) continue;
        } else {
          double e1 = hm + (-eps_speed - z) / dz, e2 = hm + (eps_speed - z) / dz;
          lo = std::max(lo, std::min(e1, e2));
          hi = std::min(hi, std::max(e1, e2));
        }
        if (!(hi > lo)) continue;
        auto integrand = [&](double h, bool factored) {
          auto e = g.endpoints(a, h);
          if (e.crossings.size() != c0.size()) return 0.0;
          const auto &cm = e.crossings[m], &cp = e.crossings[m + 1];
          double A = std::fabs(cp.dy_dh), B = std::fabs(cm.dy_dh);
          double X = std::isnan(cp.dy_dx) ? 0.0 : cp.dy_dx, Y = std::isnan(cm.dy_dx) ? 0.0 : cm.dy_dx;
          double v = factored ? detail::local_factored(A, B, X, Y) : detail::local_bracket(p, A, B, X, Y);
          return v / (2.0 * eps_speed);
        };
        double v = GL::integrate([&](double h) { return integrand(h, false); }, lo, hi);
        total += -v * g.slice_width();
        rep.max_abs_integrand = std::max(rep.max_abs_integrand, std::fabs(v));
        if (p == 2.0) fact += -GL::integrate([&](double h) { return integrand(h, true); }, lo, hi) * g.slice_width();
      }
    }
  }
  rep.value = total.value();
  if (p == 2.0) rep.factored = fact.value();
  return rep;
}

struct AsymmetryReport {
  double measure_plus = 0.0, measure_zero = 0.0, measure_minus = 0.0;
  double I_pm = 0.0, I_p0 = 0.0, I_0m = 0.0;
  double derivative = 0.0;  // -p(p-1) [4 I(E+,E-) + 2 I(E+,E0) + 2 I(E0,E-)]
  double derivative_no_e0 = 0.0;  // -4 p(p-1) I(E+,E-)
};

// Splits the support by the sign of the centre of the section through each
// point and evaluates the spatial form of the nonlocal derivative,
// I(A, B) = int_A int_B f'(x) f'(y) Kbar(x - y) |f(x) - f(y)|^(p-2).
inline AsymmetryReport asymmetry_decomposition(const GoodProfile& g, double s, double p, double eps, std::size_t samples = 2000) {
  if (!(p >= 2.0)) throw Error(ErrorKind::Config, "the spatial form needs p >= 2");
  if (!(eps > 0.0)) throw Error(ErrorKind::Config, "eps must be > 0");
  struct Pt {
    double y, f, df, dy;
    int cls;  // +1, 0, -1
  };
  std::vector<std::vector<Pt>> pts(g.slice_count());
  AsymmetryReport rep;
  for (std::size_t a = 0; a < g.slice_count(); ++a) {
    const auto& sl = g.slice(a);
    double y0 = sl.y.front(), y1 = sl.y.back(), dy = (y1 - y0) / static_cast<double>(samples);
    for (std::size_t j = 0; j < samples; ++j) {
      double y = y0 + (static_cast<double>(j) + 0.5) * dy;
      double f = g.value(a, y);
      if (f <= 0.0) continue;
      std::size_t i = static_cast<std::size_t>(std::upper_bound(sl.y.begin(), sl.y.end(), y) - sl.y.begin()) - 1;
      double df = (sl.f[i + 1] - sl.f[i]) / (sl.y[i + 1] - sl.y[i]);
      auto c = g.crossings(a, f);
      if (c.size() < 2) continue;
      std::size_t best = 0;
      for (std::size_t k = 1; k < c.size(); ++k)
        if (std::fabs(c[k].y - y) < std::fabs(c[best].y - y)) best = k;
      std::size_t k0 = best - best % 2;
      if (k0 + 1 >= c.size()) continue;
      int cls = static_cast<int>(detail::center_sign({c[k0].y, c[k0 + 1].y}));
      pts[a].push_back({y, f, df, dy, cls});
      double m = dy * g.slice_width();
      (cls > 0 ? rep.measure_plus : cls < 0 ? rep.measure_minus : rep.measure_zero) += m;
    }
  }
  KernelSpec base{g.dim(), s, p, eps, 0.0};
  std::size_t ns = g.slice_count();
  std::vector<double> pm(ns * ns), p0(ns * ns), zm(ns * ns);
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = 0; b < ns; ++b) {
      KernelSpec spec = base;
      spec.ell = g.dim() == 1 ? 0.0 : std::fabs(g.slice(a).x - g.slice(b).x);
      kernel_table(spec);
    }
  parallel_for(ns * ns, [&](std::size_t q) {
    std::size_t a = q / ns, b = q % ns;
    KernelSpec spec = base;
    spec.ell = g.dim() == 1 ? 0.0 : std::fabs(g.slice(a).x - g.slice(b).x);
    const auto& t = kernel_table(spec);
    KahanSum spm, sp0, szm;
    for (const auto& X : pts[a]) {
      if (X.cls < 0) continue;
      for (const auto& Y : pts[b]) {
        if (Y.cls > 0 || (X.cls == 0 && Y.cls == 0)) continue;
        double v = X.df * Y.df * t.Kbar(X.y - Y.y) * X.dy * Y.dy;
        if (p != 2.0) v *= std::pow(std::fabs(X.f - Y.f), p - 2.0);
        if (X.cls > 0 && Y.cls < 0) spm += v;
        else if (X.cls > 0) sp0 += v;
        else szm += v;
      }
    }
    pm[q] = spm.value();
    p0[q] = sp0.value();
    zm[q] = szm.value();
  });
  double w2 = g.slice_width() * g.slice_width();
  rep.I_pm = pairwise_sum(pm) * w2;
  rep.I_p0 = pairwise_sum(p0) * w2;
  rep.I_0m = pairwise_sum(zm) * w2;
  rep.derivative = -p * (p - 1.0) * (4.0 * rep.I_pm + 2.0 * rep.I_p0 + 2.0 * rep.I_0m);
  rep.derivative_no_e0 = -4.0 * p * (p - 1.0) * rep.I_pm;
  return rep;
}

}  // namespace rearrange
