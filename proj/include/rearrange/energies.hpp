#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <json.hpp>

#include "common.hpp"
#include "grid_function.hpp"
#include "kernel.hpp"
#include "radial.hpp"

namespace rearrange {

struct EnergyReport {
  std::string functional;
  nlohmann::json params;
  double value = 0.0;
  double error_estimate = 0.0;
};

inline nlohmann::json to_json(const EnergyReport& r) {
  return {{"functional", r.functional}, {"params", r.params}, {"value", r.value}, {"error_estimate", r.error_estimate}};
}

// Constant of the quadratic form: c_{n,s} [v]^2_{H^s} = <(-Delta)^s v, v>.
inline double c_ns(int n, double s) {
  return 0.5 * std::pow(4.0, s) * std::tgamma(0.5 * n + s) / (std::pow(M_PI, 0.5 * n) * std::fabs(std::tgamma(-s)));
}

namespace detail {

inline double powp(double x, double p) {
  if (p == 2.0) return x * x;
  if (p == 1.0) return x;
  if (p == 3.0) return x * x * x;
  if (p == 1.5) return x * std::sqrt(x);
  return std::pow(x, p);
}

template <class F>
double gl20(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

// int_0^1 |ac t + ad (1 - t)|^p g(R(t)) dt with R(t) = 1 / max(t, 1 - t),
// split where the linear factor vanishes.
template <class G>
double adjacent_pair(double ac, double ad, double p, G&& g) {
  std::vector<double> cuts = {0.0, 0.5, 1.0};
  if (ac * ad < 0.0) {
    double t0 = ad / (ad - ac);
    if (t0 > 0.0 && t0 < 1.0) cuts.push_back(t0);
  }
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 0.0) continue;
    sum += gl20([&](double t) { return powp(std::fabs(ac * t + ad * (1.0 - t)), p) * g(1.0 / std::max(t, 1.0 - t)); }, cuts[i],
                cuts[i + 1]);
  }
  return sum;
}

struct Cells1D {
  double dx = 0.0, lo = 0.0, hi = 0.0;
  std::vector<double> F, a, m;
};

inline Cells1D cells_1d(const GridFunction& f) {
  Cells1D c;
  const Axis& ax = f.axes()[0];
  c.dx = ax.step();
  c.lo = ax.min;
  c.hi = ax.max;
  std::size_t n = ax.count;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    c.F.push_back(0.5 * (f.at(i) + f.at(i + 1)));
    c.a.push_back((f.at(i + 1) - f.at(i)) / c.dx);
    c.m.push_back(ax.coord(i) + 0.5 * c.dx);
  }
  return c;
}

// sum_{c, d : |c - d| = k} |F_c - F_d|^p for all k, weighted by w(k), k >= 2.
inline double far_sum_1d(const std::vector<double>& F, double p, const std::function<double(std::size_t)>& w) {
  KahanSum total;
  std::size_t M = F.size();
  for (std::size_t k = 2; k < M; ++k) {
    double wk = w(k);
    if (wk == 0.0) continue;
    KahanSum s;
    for (std::size_t c = 0; c + k < M; ++c) {
      double d = std::fabs(F[c + k] - F[c]);
      if (d != 0.0) s += powp(d, p);
    }
    total += 2.0 * wk * s.value();
  }
  return total.value();
}

// Cell pairs 2 <= k <= near_shells apart: replaces |F_c - F_d|^p by the
// piecewise linear difference under a tensor Gauss rule, keeping the exact
// kernel weight of the midpoint term.
constexpr std::size_t near_shells = 64;

inline double near_correction_1d(const Cells1D& c, double p, const std::function<double(double)>& kernel) {
  using GL = boost::math::quadrature::gauss<double, 8>;
  std::vector<double> u, w;
  for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
    double a = GL::abscissa()[i] * 0.5 * c.dx, wi = GL::weights()[i] * 0.5 * c.dx;
    u.push_back(a);
    w.push_back(wi);
    if (a != 0.0) {
      u.push_back(-a);
      w.push_back(wi);
    }
  }
  const std::size_t q = u.size(), M = c.F.size();
  KahanSum total;
  std::vector<double> ker(q * q);
  for (std::size_t k = 2; k <= near_shells && k < M; ++k) {
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j) ker[i * q + j] = w[i] * w[j] * kernel(static_cast<double>(k) * c.dx + u[i] - u[j]);
    KahanSum s;
    for (std::size_t d = 0; d + k < M; ++d) {
      std::size_t e = d + k;
      double D = c.F[e] - c.F[d], ae = c.a[e], ad = c.a[d];
      if (ae == 0.0 && ad == 0.0) continue;
      double mid = powp(std::fabs(D), p), acc = 0.0;
      for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j) acc += (powp(std::fabs(D + ae * u[i] - ad * u[j]), p) - mid) * ker[i * q + j];
      s += acc;
    }
    total += 2.0 * s.value();
  }
  return total.value();
}

// Exact int |f|^p of the piecewise linear interpolant of non-negative samples.
inline double lp_pl_1d(const GridFunction& f, double p) {
  KahanSum s;
  double dx = f.axes()[0].step();
  for (std::size_t i = 0; i + 1 < f.samples().size(); ++i) {
    double u = f.at(i), v = f.at(i + 1);
    if (std::fabs(v - u) < 1e-14 * std::max(1.0, u)) {
      s += std::pow(0.5 * (u + v), p) * dx;
    } else {
      s += (std::pow(v, p + 1) - std::pow(u, p + 1)) / ((p + 1) * (v - u)) * dx;
    }
  }
  return s.value();
}

inline double gagliardo_1d(const GridFunction& f, double s, double p) {
  Cells1D c = cells_1d(f);
  const double sig = s * p, q = p - 1.0 - sig, dx = c.dx;
  auto G = [q](double t) { return std::pow(std::fabs(t), q + 2.0) / ((q + 1.0) * (q + 2.0)); };
  KahanSum total;
  // same cell: |a|^p int int |x - y|^q
  double j0 = 2.0 * G(dx);
  for (double a : c.a) total += powp(std::fabs(a), p) * j0;
  // adjacent cells: exact for the piecewise linear interpolant
  double scale = std::pow(dx, q + 2.0);
  for (std::size_t i = 0; i + 1 < c.a.size(); ++i) {
    if (c.a[i] == 0.0 && c.a[i + 1] == 0.0) continue;
    total += 2.0 * scale * adjacent_pair(c.a[i], c.a[i + 1], p, [q](double R) { return std::pow(R, q + 2.0) / (q + 2.0); });
  }
  // remaining cell pairs: exact kernel weight times midpoint difference
  auto Gk = [sig](double t) {
    if (std::fabs(sig - 1.0) < 1e-12) return -std::log(t);
    return std::pow(t, 1.0 - sig) / ((1.0 - sig) * (-sig));
  };
  total += far_sum_1d(c.F, p, [&](std::size_t k) {
    double kd = static_cast<double>(k);
    return Gk((kd + 1.0) * dx) - 2.0 * Gk(kd * dx) + Gk((kd - 1.0) * dx);
  });
  total += near_correction_1d(c, p, [sig](double r) { return std::pow(r, -1.0 - sig); });
  // pairs with one point outside the box, where f = 0
  KahanSum tail;
  for (std::size_t i = 0; i < c.F.size(); ++i) {
    if (c.F[i] == 0.0) continue;
    tail += powp(c.F[i], p) * (std::pow(c.m[i] - c.lo, -sig) + std::pow(c.hi - c.m[i], -sig)) / sig;
  }
  total += 2.0 * tail.value() * dx;
  return total.value();
}

struct Box2D {
  double x0, x1, y0, y1;
};

// int_0^{2 pi} g(r_b(theta)) dtheta, r_b the distance from (px, py) to the
// rectangle boundary along direction theta.
template <class G>
double rect_angular(double px, double py, const Box2D& b, G&& g) {
  double dR = b.x1 - px, dL = px - b.x0, dT = b.y1 - py, dB = py - b.y0;
  double t1 = std::atan2(dT, dR), t2 = M_PI - std::atan2(dT, dL), t3 = M_PI + std::atan2(dB, dL),
         t4 = 2.0 * M_PI - std::atan2(dB, dR);
  auto arc = [&](double a, double c, auto dist) { return gl20([&](double t) { return g(dist(t)); }, a, c); };
  double s = 0.0;
  s += arc(t4 - 2.0 * M_PI, t1, [&](double t) { return dR / std::cos(t); });
  s += arc(t1, t2, [&](double t) { return dT / std::sin(t); });
  s += arc(t2, t3, [&](double t) { return -dL / std::cos(t); });
  s += arc(t3, t4, [&](double t) { return -dB / std::sin(t); });
  return s;
}

struct Cells2D {
  std::size_t nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  Box2D box{};
  std::vector<double> F, gnorm, cx, cy;
};

inline Cells2D cells_2d(const GridFunction& f) {
  Cells2D c;
  const Axis &ax = f.axes()[0], &ay = f.axes()[1];
  c.nx = ax.count - 1;
  c.ny = ay.count - 1;
  c.dx = ax.step();
  c.dy = ay.step();
  c.box = {ax.min, ax.max, ay.min, ay.max};
  for (std::size_t i = 0; i < c.nx; ++i)
    for (std::size_t j = 0; j < c.ny; ++j) {
      double f00 = f.at(i, j), f01 = f.at(i, j + 1), f10 = f.at(i + 1, j), f11 = f.at(i + 1, j + 1);
      c.F.push_back(0.25 * (f00 + f01 + f10 + f11));
      double gx = ((f10 + f11) - (f00 + f01)) / (2.0 * c.dx), gy = ((f01 + f11) - (f00 + f10)) / (2.0 * c.dy);
      c.gnorm.push_back(std::hypot(gx, gy));
      c.cx.push_back(ax.coord(i) + 0.5 * c.dx);
      c.cy.push_back(ay.coord(j) + 0.5 * c.dy);
    }
  return c;
}

inline bool near_offset(long i, long j) { return i * i + j * j <= 6; }
constexpr double near_cells = 21.0;  // number of offsets with i^2 + j^2 <= 6

// Cell-pair weights int int kernel(|x - y|) for offsets (i, j) >= 0; near
// offsets are zero (handled by local linearization).
inline std::vector<double> pair_weights_2d(const Cells2D& c, const std::function<double(double)>& kernel) {
  std::vector<double> w(c.nx * c.ny, 0.0);
  for (std::size_t i = 0; i < c.nx; ++i)
    for (std::size_t j = 0; j < c.ny; ++j) {
      long li = static_cast<long>(i), lj = static_cast<long>(j);
      if (near_offset(li, lj)) continue;
      double X = c.dx * static_cast<double>(i), Y = c.dy * static_cast<double>(j);
      double val;
      if (li * li + lj * lj <= 50) {
        auto inner = [&](double u) {
          return gl20([&](double v) { return (c.dx - std::fabs(u)) * (c.dy - std::fabs(v)) * kernel(std::hypot(X + u, Y + v)); }, -c.dy,
                      c.dy);
        };
        val = gl20(inner, -c.dx, 0.0) + gl20(inner, 0.0, c.dx);
      } else {
        val = c.dx * c.dy * c.dx * c.dy * kernel(std::hypot(X, Y));
      }
      w[i * c.ny + j] = val;
    }
  return w;
}

inline double pair_sum_2d(const Cells2D& c, const std::vector<double>& w, double p) {
  std::size_t N = c.F.size();
  std::vector<double> row(N, 0.0);
  parallel_for(N, [&](std::size_t a) {
    if (c.F[a] == 0.0 && a > 0) {
      // still needed: pairs with non-zero partners
    }
    std::size_t ai = a / c.ny, aj = a % c.ny;
    KahanSum s;
    for (std::size_t b = a + 1; b < N; ++b) {
      double d = std::fabs(c.F[a] - c.F[b]);
      if (d == 0.0) continue;
      std::size_t bi = b / c.ny, bj = b % c.ny;
      std::size_t di = bi > ai ? bi - ai : ai - bi, dj = bj > aj ? bj - aj : aj - bj;
      double wk = w[di * c.ny + dj];
      if (wk != 0.0) s += wk * powp(d, p);
    }
    row[a] = 2.0 * s.value();
  });
  return pairwise_sum(row);
}

inline double abs_cos_moment(double p) {
  return 2.0 * std::sqrt(M_PI) * std::tgamma(0.5 * (p + 1.0)) / std::tgamma(0.5 * p + 1.0);
}

inline double gagliardo_2d(const GridFunction& f, double s, double p) {
  Cells2D c = cells_2d(f);
  const double sig = s * p;
  auto w = pair_weights_2d(c, [sig](double r) { return std::pow(r, -2.0 - sig); });
  double total = pair_sum_2d(c, w, p);
  double R = std::sqrt(near_cells * c.dx * c.dy / M_PI);
  double near = abs_cos_moment(p) * std::pow(R, p - sig) / (p - sig);
  KahanSum loc, tail;
  for (std::size_t a = 0; a < c.F.size(); ++a) {
    loc += powp(c.gnorm[a], p) * near;
    if (c.F[a] != 0.0)
      tail += powp(c.F[a], p) * rect_angular(c.cx[a], c.cy[a], c.box, [sig](double r) { return std::pow(r, -sig) / sig; });
  }
  return total + (loc.value() + 2.0 * tail.value()) * c.dx * c.dy;
}

inline double regularized_1d(const GridFunction& f, double s, double p, double eps) {
  Cells1D c = cells_1d(f);
  const auto& tab = kernel_table({1, s, p, eps, 0.0});
  const double dx = c.dx;
  auto W = [&](double r) { return tab.K(r); };
  KahanSum total;
  double j0 = 2.0 * gk([&](double u) { return (dx - u) * std::pow(u, p) * W(u); }, 0.0, dx);
  for (double a : c.a) total += powp(std::fabs(a), p) * j0;
  // Phi(R) = int_0^{R dx} r^(p+1) W(r) dr for R in [1, 2], cubic Hermite table
  auto phi_density = [&](double r) { return std::pow(r, p + 1.0) * W(r); };
  const std::size_t nt = 256;
  const double hR = 1.0 / static_cast<double>(nt);
  std::vector<double> tab_v(nt + 1), tab_d(nt + 1);
  tab_v[0] = gk(phi_density, 0.0, dx);
  for (std::size_t i = 0; i <= nt; ++i) {
    double R = 1.0 + hR * static_cast<double>(i);
    if (i > 0) tab_v[i] = tab_v[i - 1] + gl20(phi_density, dx * (R - hR), dx * R);
    tab_d[i] = dx * phi_density(dx * R);
  }
  auto Phi = [&](double R) {
    double u = std::clamp((R - 1.0) / hR, 0.0, static_cast<double>(nt));
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(u), nt - 1);
    double t = u - static_cast<double>(i), t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * tab_v[i] + (t3 - 2 * t2 + t) * hR * tab_d[i] + (-2 * t3 + 3 * t2) * tab_v[i + 1] +
           (t3 - t2) * hR * tab_d[i + 1];
  };
  for (std::size_t i = 0; i + 1 < c.a.size(); ++i) {
    if (c.a[i] == 0.0 && c.a[i + 1] == 0.0) continue;
    total += 2.0 * adjacent_pair(c.a[i], c.a[i + 1], p, Phi);
  }
  total += far_sum_1d(c.F, p, [&](std::size_t k) {
    double X = dx * static_cast<double>(k);
    return gl20([&](double u) { return (dx - std::fabs(u)) * W(X + u); }, -dx, 0.0) +
           gl20([&](double u) { return (dx - std::fabs(u)) * W(X + u); }, 0.0, dx);
  });
  total += near_correction_1d(c, p, W);
  KahanSum tail;
  for (std::size_t i = 0; i < c.F.size(); ++i) {
    if (c.F[i] == 0.0) continue;
    tail += powp(c.F[i], p) * (tab.tail(c.m[i] - c.lo) + tab.tail(c.hi - c.m[i]));
  }
  total += 2.0 * tail.value() * dx;
  return total.value();
}

inline double regularized_2d(const GridFunction& f, double s, double p, double eps) {
  Cells2D c = cells_2d(f);
  const auto& tab = kernel_table({2, s, p, eps, 0.0});
  auto w = pair_weights_2d(c, [&](double r) { return tab.K(r); });
  double total = pair_sum_2d(c, w, p);
  double R = std::sqrt(near_cells * c.dx * c.dy / M_PI);
  double near = abs_cos_moment(p) * gk([&](double r) { return std::pow(r, p + 1.0) * tab.K(r); }, 0.0, R);
  KahanSum loc, tail;
  for (std::size_t a = 0; a < c.F.size(); ++a) {
    loc += powp(c.gnorm[a], p) * near;
    if (c.F[a] != 0.0)
      tail += powp(c.F[a], p) * rect_angular(c.cx[a], c.cy[a], c.box, [&](double r) { return tab.tail_first_moment(r); });
  }
  return total + (loc.value() + 2.0 * tail.value()) * c.dx * c.dy;
}

template <class Fn>
EnergyReport with_refinement(const std::string& name, nlohmann::json params, const GridFunction& f, Fn&& eval, bool estimate,
                             bool check_divergence) {
  EnergyReport r{name, std::move(params), eval(f), 0.0};
  if (estimate) {
    double coarse = eval(f.coarsened());
    r.error_estimate = std::fabs(r.value - coarse);
    if (check_divergence && r.error_estimate > 0.1 * std::fabs(r.value))
      throw Error(ErrorKind::DivergentQuadrature, name + " changes by more than 10% under refinement");
  }
  return r;
}

}  // namespace detail

// [f]^p_{W^{s,p}} = int int |f(x) - f(y)|^p / |x - y|^(n + s p).
inline EnergyReport gagliardo(const GridFunction& f, double s, double p, bool estimate_error = true) {
  if (!(s > 0.0 && s < 1.0) || !(p >= 1.0)) throw Error(ErrorKind::Config, "need 0 < s < 1 and p >= 1");
  auto eval = [&](const GridFunction& g) { return g.dim() == 1 ? detail::gagliardo_1d(g, s, p) : detail::gagliardo_2d(g, s, p); };
  return detail::with_refinement("gagliardo", {{"s", s}, {"p", p}, {"n", f.dim()}}, f, eval, estimate_error, true);
}

struct RegularizedReport {
  EnergyReport F;  // int int |f(x) - f(y)|^p W_eps(x - y)
  double c_eps = 0.0;
  double lp = 0.0;  // ||f||_p^p
  double I = 0.0;   // F - c_eps ||f||_p^p
};

inline double lp_norm_p(const GridFunction& f, double p) {
  if (f.dim() == 1) return detail::lp_pl_1d(f, p);
  return f.lp_norm_p(p);
}

// Regularized energy with W_eps(z) = 1 / (|z|^(n + s p) + eps).
inline RegularizedReport regularized_energy(const GridFunction& f, double s, double p, double eps, bool estimate_error = true) {
  if (!(eps > 0.0)) throw Error(ErrorKind::Config, "eps must be > 0");
  auto eval = [&](const GridFunction& g) {
    return g.dim() == 1 ? detail::regularized_1d(g, s, p, eps) : detail::regularized_2d(g, s, p, eps);
  };
  RegularizedReport r;
  r.F = detail::with_refinement("regularized", {{"s", s}, {"p", p}, {"eps", eps}, {"n", f.dim()}}, f, eval, estimate_error, false);
  r.c_eps = c_eps(f.dim(), s, p, eps);
  r.lp = lp_norm_p(f, p);
  r.I = r.F.value - r.c_eps * r.lp;
  return r;
}

// int int f(x) f(y) W(|x - y|).
inline EnergyReport interaction_energy(const GridFunction& f, const std::function<double(double)>& W) {
  KahanSum total;
  if (f.dim() == 1) {
    auto c = detail::cells_1d(f);
    double dx = c.dx;
    std::size_t M = c.F.size();
    std::vector<double> w(M);
    for (std::size_t k = 0; k < M; ++k) {
      double X = dx * static_cast<double>(k);
      w[k] = detail::gl20([&](double u) { return (dx - std::fabs(u)) * W(std::fabs(X + u)); }, -dx, 0.0) +
             detail::gl20([&](double u) { return (dx - std::fabs(u)) * W(std::fabs(X + u)); }, 0.0, dx);
    }
    for (std::size_t a = 0; a < M; ++a) {
      if (c.F[a] == 0.0) continue;
      for (std::size_t b = 0; b < M; ++b) total += c.F[a] * c.F[b] * w[a > b ? a - b : b - a];
    }
  } else {
    auto c = detail::cells_2d(f);
    double vol = c.dx * c.dy;
    for (std::size_t a = 0; a < c.F.size(); ++a) {
      if (c.F[a] == 0.0) continue;
      for (std::size_t b = 0; b < c.F.size(); ++b)
        total += c.F[a] * c.F[b] * W(std::hypot(c.cx[a] - c.cx[b], c.cy[a] - c.cy[b])) * vol * vol;
    }
  }
  return {"interaction", {{"n", f.dim()}}, total.value(), 0.0};
}

// int V(|x|) f(x) with two-point Gauss rules per cell.
inline EnergyReport potential_energy(const GridFunction& f, const std::function<double(double)>& V) {
  const double g = 0.5 / std::sqrt(3.0);
  KahanSum total;
  if (f.dim() == 1) {
    const Axis& ax = f.axes()[0];
    double dx = ax.step();
    for (std::size_t i = 0; i + 1 < ax.count; ++i) {
      for (double t : {0.5 - g, 0.5 + g}) {
        double x = ax.coord(i) + t * dx;
        double v = (1 - t) * f.at(i) + t * f.at(i + 1);
        total += 0.5 * dx * V(std::fabs(x)) * v;
      }
    }
  } else {
    const Axis &ax = f.axes()[0], &ay = f.axes()[1];
    double dx = ax.step(), dy = ay.step();
    for (std::size_t i = 0; i + 1 < ax.count; ++i)
      for (std::size_t j = 0; j + 1 < ay.count; ++j)
        for (double t : {0.5 - g, 0.5 + g})
          for (double u : {0.5 - g, 0.5 + g}) {
            double v = (1 - t) * ((1 - u) * f.at(i, j) + u * f.at(i, j + 1)) + t * ((1 - u) * f.at(i + 1, j) + u * f.at(i + 1, j + 1));
            total += 0.25 * dx * dy * V(std::hypot(ax.coord(i) + t * dx, ay.coord(j) + u * dy)) * v;
          }
  }
  return {"potential", {{"n", f.dim()}}, total.value(), 0.0};
}

// int |grad f|^p with difference quotients at cell centres.
inline EnergyReport local_seminorm(const GridFunction& f, double p) {
  KahanSum total;
  if (f.dim() == 1) {
    auto c = detail::cells_1d(f);
    for (double a : c.a) total += detail::powp(std::fabs(a), p) * c.dx;
  } else {
    auto c = detail::cells_2d(f);
    for (double g : c.gnorm) total += detail::powp(g, p) * c.dx * c.dy;
  }
  return {"local_seminorm", {{"p", p}, {"n", f.dim()}}, total.value(), 0.0};
}

// E(v) = c_{n,s} [v]^2_{H^s} + (beta / 2) int |y|^2 v.
inline EnergyReport thin_film_energy(const GridFunction& v, double s, double beta, bool estimate_error = true) {
  if (!(beta > 0.0)) throw Error(ErrorKind::Config, "beta must be > 0");
  auto g = gagliardo(v, s, 2.0, estimate_error);
  double c = c_ns(v.dim(), s);
  double pot = potential_energy(v, [](double r) { return r * r; }).value;
  return {"thin_film", {{"s", s}, {"beta", beta}, {"n", v.dim()}, {"c_ns", c}}, c * g.value + 0.5 * beta * pot, c * g.error_estimate};
}

// (-Delta)^s v at the given radii for a radial profile in R^n.
inline std::vector<double> frac_laplacian_radial(const RadialProfile& v, double s, const std::vector<double>& radii) {
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::Config, "need 0 < s < 1");
  const int n = v.dim();
  const double dr = v.dr(), Rs = v.support_radius(), c = c_ns(n, s);
  using GL = boost::math::quadrature::gauss<double, 8>;
  std::vector<double> out(radii.size());
  for (std::size_t e = 0; e < radii.size(); ++e) {
    double r = std::fabs(radii[e]);
    if (r > v.r_max() - 4.0 * dr || std::fabs(r - Rs) < 4.0 * dr)
      throw Error(ErrorKind::EvalTooCloseToBoundary, "evaluation radius " + std::to_string(r) + " within 4 cells of a boundary");
    double v0 = v.value(r);
    std::function<double(double)> second;  // 2 v(x) - average of v(x + z), v(x - z), times the angular measure
    double measure;
    if (n == 1) {
      measure = 2.0;
      second = [&, r, v0](double z) { return 2.0 * (2.0 * v0 - v.value(r + z) - v.value(r - z)); };
    } else {
      measure = 2.0 * M_PI;
      second = [&, r, v0](double z) {
        double ang = boost::math::quadrature::gauss<double, 64>::integrate(
            [&](double t) { return v.value(std::sqrt(r * r + z * z + 2.0 * r * z * std::cos(t))); }, 0.0, M_PI);
        return 2.0 * (2.0 * M_PI * v0 - 2.0 * ang);
      };
    }
    auto integrand = [&](double z) { return second(z) * std::pow(z, -1.0 - 2.0 * s); };
    // near z = 0 the bracket is A z^2 + B z^3 (piecewise cubic profile);
    // fit it where cancellation is harmless and integrate exactly
    KahanSum sum;
    double h0 = 0.25 * dr;
    double s1 = second(h0), s2 = second(0.5 * h0);
    double B = (s1 - 4.0 * s2) / (0.5 * h0 * h0 * h0), A = (s1 - B * h0 * h0 * h0) / (h0 * h0);
    sum += A * std::pow(h0, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) + B * std::pow(h0, 3.0 - 2.0 * s) / (3.0 - 2.0 * s);
    double Z = Rs + r;
    double width = (n == 1) ? 0.5 * dr : dr;
    std::size_t panels = static_cast<std::size_t>(std::ceil((Z - h0) / width));
    double w = (Z - h0) / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) sum += GL::integrate(integrand, h0 + w * k, h0 + w * (k + 1));
    sum += measure * 2.0 * v0 * std::pow(Z, -2.0 * s) / (2.0 * s);
    out[e] = c * sum.value();
  }
  return out;
}

}  // namespace rearrange
