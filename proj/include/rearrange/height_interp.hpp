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
#include "energies.hpp"
#include "radial.hpp"

namespace rearrange {

// H(m) on the open midpoint grid m_j = (j + 1/2) / M, with H' and H'' taken
// exactly from the profile: H' = 1 / |{f > H}| and
// H'' = H'^3 n c_n rho^(n-1) / |f'(rho)|, rho the radius of {f > H}.
struct HeightFunction {
  int n = 1;
  std::vector<double> m, H, Hp, Hpp;
  double Hp0 = 0.0;  // H'(0+) = 1 / |supp f|
  double H1 = 0.0;   // H(1) = max f
  double Hp1 = std::numeric_limits<double>::infinity();  // H'(1-), finite only for a flat top
  double mass = 1.0;

  std::size_t size() const { return m.size(); }
  double dm() const { return 1.0 / static_cast<double>(m.size()); }

  // Radius of the level set of measure 1 / q.
  double radius(double q) const {
    if (!std::isfinite(q)) return 0.0;
    return std::pow(unit_ball_volume(n) * q, -1.0 / n);
  }
  double support_radius() const { return radius(Hp0); }

  // Linear interpolation of H in m, with H(0) = 0 and H(1) = H1.
  double value(double mm) const {
    if (mm <= m.front()) return H.front() * mm / m.front();
    if (mm >= m.back()) return H.back() + (H1 - H.back()) * (mm - m.back()) / (1.0 - m.back());
    double u = mm / dm() - 0.5;
    std::size_t j = std::min(static_cast<std::size_t>(u), m.size() - 2);
    double t = u - static_cast<double>(j);
    return (1 - t) * H[j] + t * H[j + 1];
  }
};

namespace detail {

// Level-set geometry of a nonincreasing piecewise linear radial profile.
class LevelGeometry {
 public:
  explicit LevelGeometry(const RadialProfile& f) : f_(f), cn_(unit_ball_volume(f.dim())) {
    const auto& v = f.samples();
    std::size_t N = v.size();
    suffix_.assign(N, 0.0);
    for (std::size_t i = N - 1; i-- > 0;)
      suffix_[i] = suffix_[i + 1] + f.dim() * cn_ * RadialProfile::segment_moment(f.dim(), f.r(i), f.r(i + 1), v[i], v[i + 1]);
  }

  // Index k with v_k > h >= v_{k+1}.
  std::size_t segment(double h) const {
    const auto& v = f_.samples();
    auto first_le = std::partition_point(v.begin(), v.end(), [h](double x) { return x > h; });
    return static_cast<std::size_t>(first_le - v.begin()) - 1;
  }

  double rho(double h, std::size_t k) const {
    const auto& v = f_.samples();
    return f_.r(k) + (v[k] - h) / (v[k] - v[k + 1]) * f_.dr();
  }

  double slope(std::size_t k) const { return (f_.samples()[k + 1] - f_.samples()[k]) / f_.dr(); }

  // int min(f, h) dx.
  double truncated_mass(double h) const {
    const auto& v = f_.samples();
    if (h >= v.front()) return suffix_.front();
    if (h <= 0.0) return 0.0;
    std::size_t k = segment(h);
    double r = rho(h, k);
    int n = f_.dim();
    double part = n * cn_ * RadialProfile::segment_moment(n, r, f_.r(k + 1), h, v[k + 1]);
    return h * cn_ * std::pow(r, n) + part + suffix_[k + 1];
  }

  double cn() const { return cn_; }

 private:
  const RadialProfile& f_;
  double cn_;
  std::vector<double> suffix_;
};

}  // namespace detail

// Solves int min(f, H(m)) dx = m * mass(f) by bisection on the midpoint
// m-grid; f is the piecewise linear interpolant of the samples.
inline HeightFunction height_function(const RadialProfile& f, std::size_t M = 16384) {
  const auto& v = f.samples();
  if (!f.nonincreasing()) throw Error(ErrorKind::NotDecreasing, "profile must be nonincreasing in r");
  if (v.back() != 0.0) throw Error(ErrorKind::InvalidProfile, "profile must vanish at r_max");
  double mass = f.mass();
  if (std::fabs(mass - 1.0) > 1e-3) throw Error(ErrorKind::NotUnitMass, "mass " + std::to_string(mass));
  if (M < 4) throw Error(ErrorKind::Config, "need at least 4 m-samples");
  detail::LevelGeometry geo(f);
  int n = f.dim();
  double cn = geo.cn();
  HeightFunction out;
  out.n = n;
  out.mass = mass;
  out.H1 = v.front();
  std::size_t first_zero = static_cast<std::size_t>(std::find(v.begin(), v.end(), 0.0) - v.begin());
  out.Hp0 = 1.0 / (cn * std::pow(f.r(first_zero), n));
  std::size_t top = 0;
  while (top + 1 < v.size() && v[top + 1] == v.front()) ++top;
  out.Hp1 = top == 0 ? std::numeric_limits<double>::infinity() : 1.0 / (cn * std::pow(f.r(top), n));
  out.m.resize(M);
  out.H.resize(M);
  out.Hp.resize(M);
  out.Hpp.resize(M);
  parallel_for(M, [&](std::size_t j) {
    double mm = (static_cast<double>(j) + 0.5) / static_cast<double>(M);
    double target = mm * mass, lo = 0.0, hi = v.front();
    for (int it = 0; it < 200 && hi - lo > 1e-14 * v.front(); ++it) {
      double mid = 0.5 * (lo + hi);
      (geo.truncated_mass(mid) < target ? lo : hi) = mid;
    }
    double h = 0.5 * (lo + hi);
    std::size_t k = geo.segment(h);
    double r = geo.rho(h, k);
    double hp = 1.0 / (cn * std::pow(r, n));
    out.m[j] = mm;
    out.H[j] = h;
    out.Hp[j] = hp;
    double sl = std::fabs(geo.slope(k));
    out.Hpp[j] = sl > 0.0 ? hp * hp * hp * n * cn * std::pow(r, n - 1) / sl : std::numeric_limits<double>::infinity();
  });
  return out;
}

// (1 - t) H0 + t H1, including the derivatives.
inline HeightFunction combine(const HeightFunction& a, const HeightFunction& b, double t) {
  if (a.n != b.n || a.size() != b.size()) throw Error(ErrorKind::Config, "height functions must share n and the m-grid");
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::Config, "t must lie in [0, 1]");
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  auto mix = [t](double x, double y) { return (1.0 - t) * x + t * y; };
  HeightFunction c = a;
  for (std::size_t j = 0; j < a.size(); ++j) {
    c.H[j] = mix(a.H[j], b.H[j]);
    c.Hp[j] = mix(a.Hp[j], b.Hp[j]);
    c.Hpp[j] = mix(a.Hpp[j], b.Hpp[j]);
  }
  c.Hp0 = mix(a.Hp0, b.Hp0);
  c.H1 = mix(a.H1, b.H1);
  c.Hp1 = mix(a.Hp1, b.Hp1);
  c.mass = 1.0;
  return c;
}

// The profile determined by H: f(rho(m)) = H(m), rho(m) the radius of the
// level set of measure 1 / H'(m), with f'(rho) = -H'^3 n c_n rho^(n-1) / H''.
// Cubic Hermite in r between these points; linear next to the support edge.
class HeightProfile {
 public:
  explicit HeightProfile(const HeightFunction& h) : n_(h.n) {
    const double nan = std::numeric_limits<double>::quiet_NaN(), cn = unit_ball_volume(n_);
    rho_.push_back(h.radius(h.Hp1));
    val_.push_back(h.H1);
    slope_.push_back(nan);
    for (std::size_t j = h.size(); j-- > 0;) {
      double r = h.radius(h.Hp[j]);
      if (r <= rho_.back()) continue;
      rho_.push_back(r);
      val_.push_back(h.H[j]);
      double q = h.Hp[j];
      slope_.push_back(std::isfinite(h.Hpp[j]) ? -q * q * q * n_ * cn * std::pow(r, n_ - 1) / h.Hpp[j] : 0.0);
    }
    double r0 = h.support_radius();
    if (r0 > rho_.back()) {
      rho_.push_back(r0);
      val_.push_back(0.0);
      slope_.push_back(nan);
    } else {
      val_.back() = 0.0;
      slope_.back() = nan;
    }
    // Without a flat top the cap above the last level is H1 - A r^k, with k
    // fixed by the mass 1 - m above that level.
    if (rho_.front() == 0.0 && rho_.size() > 2) {
      double rc = rho_[1], dh = val_[0] - val_[1];
      double X = (1.0 - h.m.back()) / (dh * unit_ball_volume(n_) * std::pow(rc, n_));
      if (X > 0.0 && X < 1.0) cap_k_ = n_ * X / (1.0 - X);
    }
  }

  double operator()(double r) const {
    r = std::fabs(r);
    if (r <= rho_.front()) return val_.front();
    if (r >= rho_.back()) return 0.0;
    if (r < rho_[1]) return cap(r);
    std::size_t i = static_cast<std::size_t>(std::upper_bound(rho_.begin(), rho_.end(), r) - rho_.begin()) - 1;
    return piece(i, r).first;
  }

  double support_radius() const { return rho_.back(); }

  // n c_n int g(r, f(r), f'(r)) r^(n-1) dr over the pieces.
  template <class G>
  double radial_integral(G&& g) const {
    using GL = boost::math::quadrature::gauss<double, 10>;
    double cn = unit_ball_volume(n_);
    KahanSum s;
    if (rho_.front() > 0.0)
      s += GL::integrate([&](double r) { return g(r, val_.front(), 0.0) * std::pow(r, n_ - 1); }, 0.0, rho_.front());
    s += GL::integrate([&](double r) { return g(r, cap(r), cap_slope(r)) * std::pow(r, n_ - 1); }, rho_[0], rho_[1]);
    for (std::size_t i = 1; i + 1 < rho_.size(); ++i) {
      s += GL::integrate(
          [&](double r) {
            auto [f, df] = piece(i, r);
            return g(r, f, df) * std::pow(r, n_ - 1);
          },
          rho_[i], rho_[i + 1]);
    }
    return n_ * cn * s.value();
  }

  double mass() const {
    return radial_integral([](double, double f, double) { return f; });
  }

  RadialProfile sampled(std::size_t count, double r_max) const {
    return RadialProfile::sample(n_, r_max, count, [this](double r) { return (*this)(r); });
  }

 private:
  std::pair<double, double> piece(std::size_t i, double r) const {
    double h = rho_[i + 1] - rho_[i], t = (r - rho_[i]) / h;
    double d0 = slope_[i], d1 = slope_[i + 1];
    if (std::isnan(d0) || std::isnan(d1)) return {(1 - t) * val_[i] + t * val_[i + 1], (val_[i + 1] - val_[i]) / h};
    double t2 = t * t, t3 = t2 * t;
    double f = (2 * t3 - 3 * t2 + 1) * val_[i] + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * val_[i + 1] + (t3 - t2) * h * d1;
    double df = ((6 * t2 - 6 * t) * val_[i] + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * val_[i + 1] + (3 * t2 - 2 * t) * h * d1) / h;
    return {f, df};
  }
  double cap(double r) const {
    double t = (r - rho_[0]) / (rho_[1] - rho_[0]);
    if (rho_[0] > 0.0) return (1 - t) * val_[0] + t * val_[1];
    return val_[0] - (val_[0] - val_[1]) * std::pow(t, cap_k_);
  }
  double cap_slope(double r) const {
    double dh = (val_[1] - val_[0]) / (rho_[1] - rho_[0]), t = (r - rho_[0]) / (rho_[1] - rho_[0]);
    return rho_[0] > 0.0 ? dh : dh * cap_k_ * std::pow(t, cap_k_ - 1.0);
  }

  int n_;
  std::vector<double> rho_, val_, slope_;
  double cap_k_ = 1.0;
};

inline RadialProfile reconstruct(const HeightFunction& h, std::size_t count = 4097, double r_max = 0.0) {
  HeightProfile prof(h);
  if (!(r_max > 0.0)) r_max = 1.25 * prof.support_radius();
  return prof.sampled(count, r_max);
}

inline RadialProfile interpolate(const HeightFunction& a, const HeightFunction& b, double t, std::size_t count = 4097,
                                 double r_max = 0.0) {
  if (!(r_max > 0.0)) r_max = 1.25 * std::max(a.support_radius(), b.support_radius());
  return reconstruct(combine(a, b, t), count, r_max);
}

struct HeightIntegralReport {
  double value = 0.0;
  double last_cell = 0.0;  // contribution of the cell next to m = 1
  std::size_t degenerate = 0;
};

// C_{n,p} int (H')^(p(2 + 1/n) - 2) (H'')^(1 - p) dm with C_{n,p} = n^p c_n^(p/n):
// the W^{1,p} seminorm in the height coordinate.
inline HeightIntegralReport w1p_from_height(const HeightFunction& h, double p) {
  if (!(p > 1.0)) throw Error(ErrorKind::Config, "p must exceed 1");
  double n = h.n, C = std::pow(n, p) * std::pow(unit_ball_volume(h.n), p / n), e = p * (2.0 + 1.0 / n) - 2.0;
  HeightIntegralReport r;
  KahanSum s;
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (!(h.Hpp[j] > 0.0)) {
      ++r.degenerate;
      continue;
    }
    double v = std::isfinite(h.Hpp[j]) ? C * std::pow(h.Hp[j], e) * std::pow(h.Hpp[j], 1.0 - p) * h.dm() : 0.0;
    s += v;
    if (j + 1 == h.size()) r.last_cell = v;
  }
  if (r.degenerate > h.size() / 20) throw Error(ErrorKind::DegenerateHessian, std::to_string(r.degenerate) + " degenerate cells");
  r.value = s.value();
  return r;
}

// int p H^(p-1) dm = int f^p dx.
inline double lp_from_height(const HeightFunction& h, double p) {
  KahanSum s;
  for (std::size_t j = 0; j < h.size(); ++j) s += p * std::pow(h.H[j], p - 1.0) * h.dm();
  return s.value();
}

struct PotentialDerivatives {
  double first = 0.0, second = 0.0;
};

// d/dt and d^2/dt^2 of int V f_t. With rho = rho_t(m), q = H_t'(m), dq = H_1' - H_0',
// Phi(rho) = int_{|x| < rho} V:
//   first  = int (Phi(rho) - c_n rho^n V(rho)) dq dm
//   second = int (1 / (c_n^(1/n) n)) V'(rho) q^(-2 - 1/n) dq^2 dm
inline PotentialDerivatives potential_convexity(const HeightFunction& a, const HeightFunction& b, double t,
                                                const std::function<double(double)>& V, const std::function<double(double)>& Vp) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  auto h = combine(a, b, t);
  double n = h.n, cn = unit_ball_volume(h.n);
  KahanSum s1, s2;
  for (std::size_t j = 0; j < h.size(); ++j) {
    double q = h.Hp[j], dq = b.Hp[j] - a.Hp[j], rho = h.radius(q);
    double phi = n * cn * GL::integrate([&](double r) { return V(r) * std::pow(r, n - 1.0); }, 0.0, rho);
    s1 += (phi - cn * std::pow(rho, n) * V(rho)) * dq * h.dm();
    s2 += Vp(rho) * std::pow(q, -2.0 - 1.0 / n) * dq * dq / (std::pow(cn, 1.0 / n) * n) * h.dm();
  }
  return {s1.value(), s2.value()};
}

enum class CurveFunctional { Hs, Lp, W1p, Potential };

inline std::string to_string(CurveFunctional f) {
  switch (f) {
    case CurveFunctional::Hs: return "hs";
    case CurveFunctional::Lp: return "lp";
    case CurveFunctional::W1p: return "w1p";
    case CurveFunctional::Potential: return "potential";
  }
  return "?";
}

struct FunctionalSpec {
  CurveFunctional kind = CurveFunctional::Hs;
  double s = 0.3;
  double p = 2.0;
  std::function<double(double)> V;
  std::size_t grid = 2049;  // nodes per axis for the H^s energy (n = 2: use ~129)
};

struct ConvexityCurve {
  std::vector<double> t, value, second_difference;  // second_difference is NaN at the ends
  double min_second_difference = std::numeric_limits<double>::infinity();
  double scale = 0.0;  // max |value|
};

// Value of the functional at f_t; H^s uses the Gagliardo energy of f_t on a
// grid, the others integrate the reconstructed profile or the height formula.
inline double curve_value(const HeightFunction& a, const HeightFunction& b, double t, const FunctionalSpec& spec) {
  auto h = combine(a, b, t);
  switch (spec.kind) {
    case CurveFunctional::Hs: {
      double R = 1.25 * std::max(a.support_radius(), b.support_radius());
      auto prof = HeightProfile(h);
      Axis ax{-R, R, spec.grid};
      GridFunction g = h.n == 1 ? GridFunction::sample1d(ax, [&](double x) { return prof(x); })
                                : GridFunction::sample({ax, ax}, [&](double x, double y) { return prof(std::hypot(x, y)); });
      return gagliardo(g, spec.s, 2.0, false).value;
    }
    case CurveFunctional::Lp: {
      double p = spec.p;
      return HeightProfile(h).radial_integral([p](double, double f, double) { return std::pow(f, p); });
    }
    case CurveFunctional::W1p: return w1p_from_height(h, spec.p).value;
    case CurveFunctional::Potential: {
      if (!spec.V) throw Error(ErrorKind::Config, "potential needs V");
      return HeightProfile(h).radial_integral([&](double r, double f, double) { return spec.V(r) * f; });
    }
  }
  return 0.0;
}

inline ConvexityCurve convexity_curve(const HeightFunction& a, const HeightFunction& b, const FunctionalSpec& spec,
                                      const std::vector<double>& t_grid) {
  ConvexityCurve c;
  c.t = t_grid;
  c.value.resize(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) c.value[i] = curve_value(a, b, t_grid[i], spec);
  c.second_difference.assign(t_grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < t_grid.size(); ++i) c.scale = std::max(c.scale, std::fabs(c.value[i]));
  for (std::size_t i = 1; i + 1 < t_grid.size(); ++i) {
    double h0 = t_grid[i] - t_grid[i - 1], h1 = t_grid[i + 1] - t_grid[i];
    double d = 2.0 * (h0 * c.value[i + 1] - (h0 + h1) * c.value[i] + h1 * c.value[i - 1]) / (h0 * h1 * (h0 + h1));
    c.second_difference[i] = d;
    c.min_second_difference = std::min(c.min_second_difference, d);
  }
  return c;
}

inline std::vector<double> uniform_t_grid(std::size_t steps) {
  std::vector<double> t(steps);
  for (std::size_t i = 0; i < steps; ++i) t[i] = static_cast<double>(i) / static_cast<double>(steps - 1);
  return t;
}

// CSV rows (t, value, second_difference); the ends have an empty last column.
inline std::string to_csv(const ConvexityCurve& c) {
  std::string out = "t,value,second_difference\n";
  char buf[128];
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    if (std::isnan(c.second_difference[i]))
      std::snprintf(buf, sizeof buf, "%.6f,%.17g,\n", c.t[i], c.value[i]);
    else
      std::snprintf(buf, sizeof buf, "%.6f,%.17g,%.17g\n", c.t[i], c.value[i], c.second_difference[i]);
    out += buf;
  }
  return out;
}

inline nlohmann::json to_json(const HeightFunction& h) {
  return {{"dim", h.n}, {"m_samples", h.size()}, {"H_prime_0", h.Hp0}, {"H_1", h.H1}, {"mass", h.mass}};
}

}  // namespace rearrange
