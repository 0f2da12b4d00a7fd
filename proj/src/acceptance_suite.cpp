#include "acceptance_suite.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <optional>

#include <rearrange/energies.hpp>
#include <rearrange/fixtures.hpp>
#include <rearrange/good_funcs.hpp>
#include <rearrange/height_interp.hpp>
#include <rearrange/interval_sets.hpp>
#include <rearrange/symmetrize.hpp>
#include <rearrange/thinfilm.hpp>

namespace rearrange::acceptance {

namespace {

using nlohmann::json;

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string g3(double x) { return fmt("%.3g", x); }

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.samples().size(); ++i) m = std::max(m, std::fabs(a.samples()[i] - b.samples()[i]));
  return m;
}

// ---- 1: interval flow ----

IntervalUnion random_union(SplitMix64& rng, int max_count) {
  int n = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(max_count)));
  std::vector<double> pts;
  for (int i = 0; i < 2 * n; ++i) pts.push_back(rng.uniform(-5.0, 5.0));
  std::sort(pts.begin(), pts.end());
  std::vector<Interval> iv;
  for (int i = 0; i < n; ++i)
    if (pts[2 * i + 1] > pts[2 * i]) iv.push_back({pts[2 * i], pts[2 * i + 1]});
  return IntervalUnion(iv);
}

// Merge times of the event-driven flow, one entry per interval absorbed.
std::vector<double> exact_merges(const IntervalUnion& u) {
  std::vector<Interval> iv = u.intervals();
  std::vector<double> out;
  double t = 0.0;
  while (iv.size() > 1) {
    std::size_t before = iv.size();
    auto r = detail::flow(iv, 0.0, detail::FlowStop::FirstMerge);
    if (!r.merged) break;
    t += r.elapsed;
    for (std::size_t k = iv.size(); k < before; ++k) out.push_back(t);
  }
  return out;
}

// Fixed-step explicit motion, merging after each step.
std::vector<double> stepped_merges(std::vector<Interval> iv, double dt) {
  std::vector<double> out;
  double t = 0.0;
  while (iv.size() > 1) {
    bool moving = false;
    for (auto& v : iv) {
      double c = v.center();
      if (c == 0.0) continue;
      double move = std::min(dt, std::fabs(c)) * (c > 0 ? -1.0 : 1.0);
      v.a += move;
      v.b += move;
      moving = true;
    }
    if (!moving) break;
    t += dt;
    std::size_t w = 0;
    for (std::size_t i = 1; i < iv.size(); ++i) {
      if (iv[i].a <= iv[w].b) {
        iv[w].b = std::max(iv[w].b, iv[i].b);
        out.push_back(t);
      } else {
        iv[++w] = iv[i];
      }
    }
    iv.resize(w + 1);
  }
  return out;
}

CriterionResult c1_intervals(std::uint64_t seed) {
  CriterionResult r;
  SplitMix64 rng(seed);
  const int unions = 1000, oracle_unions = 64;
  double semigroup = 0.0, measure = 0.0, merge = 0.0;
  std::size_t size_mismatch = 0, event_mismatch = 0, oracle_runs = 0, events = 0;
  for (int k = 0; k < unions; ++k) {
    auto u = random_union(rng, 8);
    double t1 = rng.uniform(0.0, 3.0), t2 = rng.uniform(0.0, 3.0);
    auto a = m_tau(u, t1 + t2), b = m_tau(m_tau(u, t1), t2);
    measure = std::max(measure, std::fabs(a.measure() - u.measure()));
    if (a.size() != b.size()) {
      ++size_mismatch;
      continue;
    }
    for (std::size_t i = 0; i < a.size(); ++i) semigroup = std::max({semigroup, std::fabs(a[i].a - b[i].a), std::fabs(a[i].b - b[i].b)});
    if (oracle_runs < static_cast<std::size_t>(oracle_unions) && u.size() >= 2) {
      ++oracle_runs;
      auto e = exact_merges(u), s = stepped_merges(u.intervals(), 1e-6);
      if (e.size() != s.size()) {
        ++event_mismatch;
        continue;
      }
      events += e.size();
      for (std::size_t i = 0; i < e.size(); ++i) merge = std::max(merge, std::fabs(e[i] - s[i]));
    }
  }
  r.pass = size_mismatch == 0 && semigroup <= 1e-12 && measure <= 1e-12 && event_mismatch == 0 && merge <= 1e-5;
  r.details = {{"unions", unions},
               {"max_intervals", 8},
               {"semigroup_max_error", semigroup},
               {"measure_max_error", measure},
               {"size_mismatches", size_mismatch},
               {"oracle_step", 1e-6},
               {"oracle_unions", oracle_runs},
               {"merge_events", events},
               {"event_count_mismatches", event_mismatch},
               {"merge_time_max_error", merge},
               {"tolerance_exact", 1e-12},
               {"tolerance_merge", 1e-5}};
  r.summary = "semigroup " + g3(semigroup) + ", measure " + g3(measure) + ", merge times " + g3(merge) + " over " +
              std::to_string(events) + " events";
  return r;
}

// ---- 2: L^p preservation ----

std::vector<std::pair<std::string, std::function<double(double)>>> lp_fixtures() {
  using namespace fixtures;
  return {{"shifted_triangle", [](double x) { return tent(x, 0.4, 1.0, 1.0); }},
          {"two_tent", [](double x) { return tent(x, -0.8, 0.7, 1.0) + tent(x, 0.6, 0.7, 0.6); }},
          {"two_bump", [](double x) { return smooth_bump(x, -1.1, 0.6, 1.0) + smooth_bump(x, 0.9, 0.5, 0.7); }},
          {"bump_and_tent", [](double x) { return smooth_bump(x, -0.5, 0.8, 1.0) + tent(x, 1.0, 0.4, 0.5); }},
          {"three_tents", [](double x) { return tent(x, -1.2, 0.5, 0.8) + tent(x, 0.1, 0.4, 1.0) + tent(x, 1.1, 0.6, 0.5); }}};
}

CriterionResult c2_lp() {
  CriterionResult r;
  const std::vector<double> taus = {0.05, 0.15, 0.3, 0.6, 1.2}, ps = {1.0, 2.0, 5.0};
  double worst = 0.0;
  bool halving = true;
  json rows = json::array(), failures = json::array();
  for (const auto& [name, fn] : lp_fixtures()) {
    for (double p : ps) {
      std::vector<double> env;
      // doubling refines the x grid and the height grid together
      for (auto [n, nh] : {std::pair<std::size_t, std::size_t>{1025, 512}, {2049, 1024}}) {
        auto f = GridFunction::sample1d(Axis{-2.5, 2.5, n}, fn);
        double base = std::pow(f.lp_norm_p(p), 1.0 / p), e = 0.0;
        for (double tau : taus) {
          double v = std::pow(steiner_continuous(f, tau, {nh}).lp_norm_p(p), 1.0 / p);
          e = std::max(e, std::fabs(v - base) / base);
        }
        env.push_back(e);
      }
      bool h = env[1] <= 0.5 * env[0] || env[1] <= 1e-6;
      halving = halving && h;
      if (!h) failures.push_back(name + " p=" + fmt("%g", p));
      worst = std::max(worst, env[0]);
      rows.push_back({{"fixture", name}, {"p", p}, {"error_N1024_H512", env[0]}, {"error_N2048_H1024", env[1]}, {"halves", h}});
    }
  }
  r.pass = worst <= 1e-3 && halving;
  r.details = {{"cells", 1024}, {"heights", 512}, {"tau", taus}, {"rows", rows}, {"max_error_N1024", worst}, {"tolerance", 1e-3},
               {"halving_floor", 1e-6}, {"halving_failures", failures}};
  r.summary = "max relative error " + g3(worst) + (halving ? ", halves under doubling" : ", does not halve for " + failures.dump());
  return r;
}

// ---- 3: strict decrease along the continuous symmetrization ----

CriterionResult c3_decrease() {
  CriterionResult r;
  // nodes on the bump support ends -1.7, -0.5, 0.4, 1.4
  auto f = fixtures::two_bump(Axis{-2.5, 2.5, 8001});
  std::vector<double> taus;
  for (int i = 0; i <= 10; ++i) taus.push_back(0.02 * i);
  std::vector<GridFunction> path;
  for (double tau : taus) path.push_back(tau == 0.0 ? f : steiner_continuous(f, tau));
  bool ok = true;
  double min_ratio = std::numeric_limits<double>::infinity(), max_gamma = -std::numeric_limits<double>::infinity();
  json rows = json::array();
  for (double s : {0.25, 0.45, 0.75}) {
    for (double p : {1.5, 2.0, 3.0}) {
      std::vector<double> E, err;
      for (const auto& g : path) {
        auto e = gagliardo(g, s, p);
        E.push_back(e.value);
        err.push_back(e.error_estimate);
      }
      bool dec = true;
      double ratio = std::numeric_limits<double>::infinity(), num = 0.0, den = 0.0;
      for (std::size_t i = 1; i < E.size(); ++i) {
        double d = E[i - 1] - E[i];
        if (!(d > 0.0)) dec = false;
        ratio = std::min(ratio, d / (3.0 * std::max(err[i - 1], err[i])));
        num += (E[i] - E[0]) * taus[i];
        den += taus[i] * taus[i];
      }
      double gamma = num / den;
      bool pass = dec && ratio > 1.0 && gamma < 0.0;
      ok = ok && pass;
      min_ratio = std::min(min_ratio, ratio);
      max_gamma = std::max(max_gamma, gamma);
      rows.push_back({{"s", s}, {"p", p}, {"energy", E}, {"error_estimate", err}, {"strictly_decreasing", dec},
                      {"min_decrement_over_3err", ratio}, {"gamma", gamma}, {"pass", pass}});
    }
  }
  r.pass = ok;
  r.details = {{"fixture", "two_bump"}, {"nodes", 8001}, {"tau", taus}, {"rows", rows}};
  r.summary = "min decrement/(3 err) " + g3(min_ratio) + ", max fitted gamma " + g3(max_gamma);
  return r;
}

// ---- 4: indicator seminorm ----

CriterionResult c4_indicator() {
  CriterionResult r;
  auto f = fixtures::indicator(Axis{-0.25, 1.25, 2049}, 0.0, 1.0);
  auto e = gagliardo(f, 0.25, 2.0);
  double closed = 4.0 / (0.5 * 0.5), rel = std::fabs(e.value / closed - 1.0);
  r.pass = rel <= 0.02;
  r.details = {{"s", 0.25}, {"p", 2.0}, {"cells", 2048}, {"value", e.value}, {"closed_form", closed}, {"relative_error", rel},
               {"tolerance", 0.02}};
  r.summary = "[chi]^2 = " + fmt("%.4f", e.value) + " vs 16, relative error " + g3(rel);
  return r;
}

// ---- 5: level-set derivative and bracket positivity ----

CriterionResult c5_derivative(std::uint64_t seed) {
  CriterionResult r;
  std::vector<std::pair<std::string, GoodProfile>> good = {
      {"two_tents", GoodProfile::line({-1.5, -0.8, -0.1, 0.2, 0.6, 1.3}, {0.0, 1.0, 0.0, 0.0, 0.6, 0.0})},
      {"skew_peak", GoodProfile::line({-0.6, -0.1, 0.9}, {0.0, 1.0, 0.0})},
      {"valley", GoodProfile::line({-1.6, -1.0, -0.4, 0.1, 0.8, 1.5}, {0.0, 0.8, 0.3, 1.0, 0.4, 0.0})}};
  const double s = 0.3, p = 2.0, eps = 1e-2, dt = 1e-3;
  double worst = 0.0;
  json rows = json::array();
  for (const auto& [name, g] : good) {
    double d = derivative_nonlocal(g, s, p, eps).value;
    double Fp = energy_levels(g, s, p, eps, {512, false}, steiner_motion(dt)).F;
    double Fm = energy_levels(g, s, p, eps, {512, false}, reverse_motion(dt)).F;
    double fd = (Fp - Fm) / (2.0 * dt), rel = std::fabs(d / fd - 1.0);
    worst = std::max(worst, rel);
    rows.push_back({{"fixture", name}, {"derivative", d}, {"finite_difference", fd}, {"relative_error", rel}});
  }
  SplitMix64 rng(seed ^ 0x5bd1e995ULL);
  KernelSpec spec{1, s, p, eps, 0.0};
  const std::size_t target = 30000;
  std::size_t accepted = 0, violations = 0, bound_violations = 0;
  std::array<std::size_t, 4> by_case{};
  for (std::size_t k = 0; accepted < target; ++k) {
    double xm, xp, ym, yp;
    switch (k % 4) {
      case 0:
        ym = rng.uniform(-2, 0), yp = ym + rng.uniform(0.01, 1), xm = yp + rng.uniform(0.0, 1), xp = xm + rng.uniform(0.01, 1);
        break;
      case 1:
        xm = rng.uniform(-2, 0), xp = xm + rng.uniform(0.1, 2), ym = xm + rng.uniform(0.0, 0.45) * (xp - xm),
        yp = ym + rng.uniform(0.01, 1.0) * (xm + xp - 2 * ym) * 0.5;
        break;
      case 2:
        ym = rng.uniform(-2, 0), yp = ym + rng.uniform(0.1, 2), xm = ym + rng.uniform(0.5, 0.99) * (yp - ym),
        xp = xm + rng.uniform(0.01, 1.0) * (yp - xm);
        break;
      default:
        ym = rng.uniform(-2, 0), yp = ym + rng.uniform(0.1, 2), xm = rng.uniform(ym + 1e-3, yp - 1e-3), xp = yp + rng.uniform(0.01, 1);
    }
    if (!(xm < xp && ym < yp && (xp + xm) - (yp + ym) > 0.0)) continue;
    auto b = bracket_sign(xm, xp, ym, yp, spec);
    ++accepted;
    ++by_case[static_cast<std::size_t>(b.kind)];
    if (!(b.value > 0.0)) ++violations;
    if (b.value < b.lower_bound * (1.0 - 1e-9)) ++bound_violations;
  }
  r.pass = worst <= 0.05 && violations == 0;
  r.details = {{"s", s},
               {"p", p},
               {"eps", eps},
               {"fd_step", dt},
               {"fixtures", rows},
               {"max_relative_error", worst},
               {"tolerance", 0.05},
               {"quadruples", accepted},
               {"separated", by_case[0]},
               {"nested", by_case[1]},
               {"nested_reversed", by_case[2]},
               {"overlapping", by_case[3]},
               {"violations", violations},
               {"lower_bound_violations", bound_violations}};
  r.summary = "FD agreement " + g3(worst) + ", " + std::to_string(violations) + " bracket violations in " + std::to_string(accepted);
  return r;
}

// ---- 6: Example 4.6 ----

CriterionResult c6_two_cones() {
  CriterionResult r;
  auto g = GoodProfile::sampled_2d(fixtures::example_4_6, -1.5, 1.5, 32, -3.5, 3.5, 281);
  auto loc = derivative_local(g, 2.0, 1e-2);
  auto d = derivative_nonlocal(g, 0.3, 2.0, 1e-2, {128, true});
  double scale = std::max(1.0, std::fabs(d.value));
  bool local_zero = std::fabs(loc.value) <= 1e-8 * scale, negative = d.value < -3.0 * d.error_estimate;
  r.pass = local_zero && negative;
  r.details = {{"slices", 32},
               {"s", 0.3},
               {"p", 2.0},
               {"eps", 1e-2},
               {"heights", 128},
               {"local_derivative", loc.value},
               {"scale", scale},
               {"local_tolerance", 1e-8 * scale},
               {"nonlocal_derivative", d.value},
               {"nonlocal_error_estimate", d.error_estimate}};
  r.summary = "local " + g3(loc.value) + ", nonlocal " + g3(d.value) + " +- " + g3(d.error_estimate);
  return r;
}

// ---- 7: height function ----

CriterionResult c7_height() {
  CriterionResult r;
  auto h = height_function(fixtures::triangle_profile(1));
  double closed = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) closed = std::max(closed, std::fabs(h.H[j] - (1.0 - std::sqrt(1.0 - h.m[j]))));
  double round = 0.0;
  for (int n : {1, 2}) {
    for (const auto& f : {fixtures::triangle_profile(n), fixtures::parabola_profile(n)}) {
      auto g = reconstruct(height_function(f), f.count(), f.r_max());
      for (std::size_t i = 0; i < f.count(); ++i) round = std::max(round, std::fabs(g.samples()[i] - f.samples()[i]));
    }
  }
  double slope = std::fabs(h.Hp[0] - 0.5);
  r.pass = closed <= 1e-6 && round <= 1e-3 && slope <= 1e-3;
  r.details = {{"m_samples", h.size()},
               {"closed_form_max_error", closed},
               {"round_trip_max_error", round},
               {"Hp_first_sample", h.Hp[0]},
               {"Hp0", h.Hp0},
               {"Hp_error", slope},
               {"tolerances", {{"closed_form", 1e-6}, {"round_trip", 1e-3}, {"Hp0", 1e-3}}}};
  r.summary = "closed form " + g3(closed) + ", round trip " + g3(round) + ", |H'(0+) - 1/2| " + g3(slope);
  return r;
}

// ---- 8: convexity along the height interpolation ----

CriterionResult c8_convexity() {
  CriterionResult r;
  using namespace fixtures;
  auto t = uniform_t_grid(21);
  json d;
  bool ok = true;

  // (a)
  std::vector<std::pair<HeightFunction, HeightFunction>> pairs = {{height_function(triangle_profile(1)), height_function(parabola_profile(1))},
                                                                  {height_function(wide_tent_profile()), height_function(quartic_profile())}};
  json a = json::array();
  double min_a = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (double s : {0.2, 0.45}) {
      FunctionalSpec spec;
      spec.kind = CurveFunctional::Hs;
      spec.s = s;
      auto c = convexity_curve(pairs[k].first, pairs[k].second, spec, t);
      min_a = std::min(min_a, c.min_second_difference);
      a.push_back({{"pair", k}, {"s", s}, {"min_second_difference", c.min_second_difference}, {"scale", c.scale}});
    }
  }
  bool pa = min_a > 0.0;
  d["a_hs"] = {{"curves", a}, {"pass", pa}};

  // (b)
  auto h0 = height_function(triangle_profile(1)), h1 = height_function(parabola_profile(1));
  auto interior_max = [](const ConvexityCurve& c) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < c.t.size(); ++i) m = std::max(m, c.second_difference[i]);
    return m;
  };
  FunctionalSpec lp;
  lp.kind = CurveFunctional::Lp;
  lp.p = 1.5;
  auto c15 = convexity_curve(h0, h1, lp, t);
  lp.p = 3.0;
  auto c3 = convexity_curve(h0, h1, lp, t);
  lp.p = 2.0;
  auto c2 = convexity_curve(h0, h1, lp, t);
  double flat = std::max(std::fabs(c2.min_second_difference), std::fabs(interior_max(c2))) / c2.scale;
  bool pb = interior_max(c15) < 0.0 && c3.min_second_difference > 0.0 && flat <= 1e-6;
  d["b_lp"] = {{"p1.5_max_second_difference", interior_max(c15)},
               {"p3_min_second_difference", c3.min_second_difference},
               {"p2_relative_flatness", flat},
               {"tolerance", 1e-6},
               {"pass", pb}};

  // (c)
  json cc = json::array();
  bool pc = true;
  for (auto [n, p] : {std::pair{1, 2.0}, std::pair{2, 1.5}, std::pair{2, 2.0}}) {
    FunctionalSpec spec;
    spec.kind = CurveFunctional::W1p;
    spec.p = p;
    auto c = convexity_curve(height_function(triangle_profile(n)), height_function(parabola_profile(n)), spec, t);
    bool ok_c = c.min_second_difference >= -1e-8 * c.scale;
    pc = pc && ok_c;
    cc.push_back({{"n", n}, {"p", p}, {"min_second_difference", c.min_second_difference}, {"scale", c.scale}, {"pass", ok_c}});
  }
  d["c_w1p"] = {{"curves", cc}, {"tolerance_relative", 1e-8}, {"pass", pc}};

  // (d)
  auto w = w1p_from_height(h0, 2.0);
  double direct = local_seminorm(triangle_profile(1).to_grid(4001, 2.0), 2.0).value;
  double C12 = std::pow(1.0, 2.0) * std::pow(unit_ball_volume(1), 2.0);
  bool pd = std::fabs(w.value / 2.0 - 1.0) <= 0.01 && std::fabs(w.value / direct - 1.0) <= 0.01;
  d["d_triangle_w12"] = {{"height_formula", w.value}, {"direct", direct}, {"C_12", C12}, {"tolerance", 0.01}, {"pass", pd}};

  // (e)
  auto V = [](double x) { return x * x; };
  auto Vp = [](double x) { return 2.0 * x; };
  const double dt = 0.05;
  auto E = [&](double tt) { return potential_energy(interpolate(h0, h1, tt, 4001, 1.25).to_grid(4001, 1.25), V).value; };
  json ee = json::array();
  double worst_e = 0.0;
  for (double tt : {0.25, 0.5, 0.75}) {
    auto pc2 = potential_convexity(h0, h1, tt, V, Vp);
    double fd2 = (E(tt + dt) - 2.0 * E(tt) + E(tt - dt)) / (dt * dt);
    double rel = std::fabs(pc2.second / fd2 - 1.0);
    worst_e = std::max(worst_e, rel);
    ee.push_back({{"t", tt}, {"closed_form", pc2.second}, {"finite_difference", fd2}, {"relative_error", rel}});
  }
  bool pe = worst_e <= 0.05;
  d["e_potential"] = {{"V", "|x|^2"}, {"points", ee}, {"tolerance", 0.05}, {"pass", pe}};

  ok = pa && pb && pc && pd && pe;
  r.pass = ok;
  r.details = d;
  r.summary = std::string("(a) ") + (pa ? "ok" : "FAIL") + " (b) " + (pb ? "ok" : "FAIL") + " (c) " + (pc ? "ok" : "FAIL") + " (d) " +
              (pd ? "ok" : "FAIL") + " (e) " + (pe ? "ok" : "FAIL") + "; W12 = " + fmt("%.4f", w.value) + ", potential FD " + g3(worst_e);
  return r;
}

// ---- 9: truncated symmetrization ----

CriterionResult c9_truncated() {
  CriterionResult r;
  std::vector<std::pair<std::string, GridFunction>> fx = {{"example_4_6", fixtures::example_4_6_grid(61, 281)},
                                                          {"two_bump", fixtures::two_bump(Axis{-2.5, 2.5, 1001})},
                                                          {"two_tent", fixtures::two_tent(Axis{-2.0, 2.0, 801})}};
  const std::vector<std::pair<double, double>> pairs = {{0.25, 0.8}, {0.15, 0.5}, {0.1, 0.25}};  // (h0, tau c0 / h0)
  bool ok = true;
  json rows = json::array();
  for (const auto& [name, f] : fx) {
    double c0 = lipschitz_report(f).c0, dx = f.sym_axis().step();
    for (auto [h0, frac] : pairs) {
      double tau = frac * h0 / c0;
      auto t = steiner_truncated(f, tau, h0);
      bool support = true;
      for (std::size_t i = 0; i < f.samples().size(); ++i)
        if ((f.samples()[i] > 0.0) != (t.f.samples()[i] > 0.0)) support = false;
      double sup = max_abs_diff(t.f, f), sup_bound = tau * c0 + 2.0 * c0 * dx;
      double lip = lipschitz_report(t.f).c0, lip_bound = c0 * h0 / (h0 - c0 * tau) + 2.0 * c0 * dx / h0;
      bool pass = support && sup <= sup_bound && lip <= lip_bound;
      ok = ok && pass;
      rows.push_back({{"fixture", name}, {"c0", c0}, {"h0", h0}, {"tau", tau}, {"support_preserved", support}, {"sup_difference", sup},
                      {"sup_bound", sup_bound}, {"lipschitz", lip}, {"lipschitz_bound", lip_bound}, {"pass", pass}});
    }
  }
  r.pass = ok;
  r.details = {{"cases", rows}};
  r.summary = std::to_string(rows.size()) + " cases, " + (ok ? "all bounds hold" : "bound violated");
  return r;
}

// ---- 10: stationary profile ----

CriterionResult c10_stationary() {
  CriterionResult r;
  double k = kappa(0.5, 1), kerr = std::fabs(k - 1.5);
  json rows = json::array();
  bool ok = kerr <= 4.0 * std::numeric_limits<double>::epsilon();
  double worst = 0.0, contrast = std::numeric_limits<double>::infinity();
  for (double s : {0.25, 0.45}) {
    auto p = explicit_solution(1.0, s, 1);
    auto res = stationary_residual(p);
    auto bumped = perturb_profile(p.v, 0.05 * p.v.samples()[0], 0.3, 0.2);
    double pert = stationary_residual(bumped, s, 1.0).residual;
    bool pass = res.residual <= 1e-2 && pert > 10.0 * res.residual;
    ok = ok && pass;
    worst = std::max(worst, res.residual);
    contrast = std::min(contrast, pert / res.residual);
    rows.push_back({{"n", 1}, {"s", s}, {"residual", res.residual}, {"fit_a", res.a}, {"fit_b", res.b}, {"perturbed_residual", pert},
                    {"pass", pass}});
  }
  r.pass = ok;
  r.details = {{"kappa_half_1", k}, {"kappa_error", kerr}, {"profiles", rows}, {"residual_tolerance", 1e-2}, {"contrast_required", 10.0}};
  r.summary = "kappa(1/2,1) - 3/2 = " + g3(k - 1.5) + ", residual " + g3(worst) + ", contrast " + g3(contrast);
  return r;
}

// ---- 11: descent of the thin-film energy ----

CriterionResult c11_descent() {
  CriterionResult r;
  const double s = 0.3;
  auto p = explicit_solution(1.0, s, 1);
  Axis ax{-2.5, 2.5, 2001};
  auto shifted = GridFunction::sample1d(ax, [&](double x) { return p.v.value(x - 0.3); });
  auto centred = GridFunction::sample1d(ax, [&](double x) { return p.v.value(x); });
  double h0 = 0.2 * p.v.samples()[0], c0 = lipschitz_report(shifted).c0;
  std::vector<double> tau;
  for (int i = 0; i <= 10; ++i) tau.push_back(0.8 * h0 / c0 * i / 10.0);
  auto a = descent_experiment(shifted, s, 1.0, h0, tau);
  auto c = descent_experiment(centred, s, 1.0, h0, tau, false);
  auto bumps = fixtures::two_bump(ax);
  double c0b = lipschitz_report(bumps).c0;
  std::vector<double> tb;
  for (int i = 0; i <= 10; ++i) tb.push_back(0.8 * 0.2 / c0b * i / 10.0);
  auto b = descent_experiment(bumps, s, 1.0, 0.2, tb);
  auto descends = [](const DescentReport& d) { return d.strictly_decreasing && d.min_decrement_ratio > 1.0 && d.support_preserved; };
  bool flat = c.max_relative_change <= 1e-4, slope = std::fabs(c.fitted_slope) <= 1e-3 * c.energy.front();
  r.pass = descends(a) && descends(b) && flat && slope;
  auto j = [](const DescentReport& d) {
    auto o = to_json(d);
    o["min_decrement_over_3err"] = d.min_decrement_ratio;
    return o;
  };
  r.details = {{"s", s}, {"beta", 1.0}, {"shifted_stationary", j(a)}, {"two_bump", j(b)}, {"centred_stationary", to_json(c)},
               {"flat_tolerance", 1e-4}, {"slope_tolerance_relative", 1e-3}};
  r.summary = "decrement/(3 err) " + g3(std::min(a.min_decrement_ratio, b.min_decrement_ratio)) + ", centred change " +
              g3(c.max_relative_change) + ", slope/E " + g3(std::fabs(c.fitted_slope) / c.energy.front());
  return r;
}

// ---- 12: determinism ----

class ThreadOverride {
 public:
  explicit ThreadOverride(unsigned n) {
    if (const char* v = std::getenv("REARRANGE_THREADS")) old_ = v;
    ::setenv("REARRANGE_THREADS", std::to_string(n).c_str(), 1);
  }
  ~ThreadOverride() {
    if (old_)
      ::setenv("REARRANGE_THREADS", old_->c_str(), 1);
    else
      ::unsetenv("REARRANGE_THREADS");
  }

 private:
  std::optional<std::string> old_;
};

json criteria_json(const std::vector<CriterionResult>& v) {
  json a = json::array();
  for (const auto& c : v)
    a.push_back({{"id", c.id}, {"name", c.name}, {"status", c.pass ? "PASS" : "FAIL"}, {"summary", c.summary}, {"details", c.details}});
  return a;
}

}  // namespace

std::string criterion_name(int id) {
  static const char* names[] = {"",
                                "interval flow exactness",
                                "L^p preservation",
                                "strict decrease of the Gagliardo energy",
                                "closed-form indicator seminorm",
                                "level-set derivative and bracket positivity",
                                "two cones: local zero, nonlocal negative",
                                "height function closed form",
                                "convexity along the height interpolation",
                                "truncated symmetrization bounds",
                                "stationary thin-film profile",
                                "thin-film descent and perturbation",
                                "determinism"};
  if (id < 1 || id > criterion_count) throw Error(ErrorKind::Config, "unknown criterion " + std::to_string(id));
  return names[id];
}

CriterionResult run_criterion(int id, std::uint64_t seed) {
  auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    switch (id) {
      case 1: r = c1_intervals(seed); break;
      case 2: r = c2_lp(); break;
      case 3: r = c3_decrease(); break;
      case 4: r = c4_indicator(); break;
      case 5: r = c5_derivative(seed); break;
      case 6: r = c6_two_cones(); break;
      case 7: r = c7_height(); break;
      case 8: r = c8_convexity(); break;
      case 9: r = c9_truncated(); break;
      case 10: r = c10_stationary(); break;
      case 11: r = c11_descent(); break;
      default: throw Error(ErrorKind::Config, "criterion " + std::to_string(id) + " is not a standalone check");
    }
  } catch (const std::exception& e) {
    r = {};
    r.pass = false;
    r.summary = std::string("error: ") + e.what();
    r.details = {{"error", e.what()}};
  }
  r.id = id;
  r.name = criterion_name(id);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

SuiteReport run_acceptance(const SuiteOptions& opt, const Progress& progress) {
  for (int id : opt.only)
    if (id < 1 || id > criterion_count) throw Error(ErrorKind::Config, "unknown criterion " + std::to_string(id));
  auto selected = [&](int id) { return opt.only.empty() || opt.only.count(id) > 0; };
  SuiteReport rep;
  rep.seed = opt.seed;
  for (int id = 1; id < criterion_count; ++id) {
    if (!selected(id)) continue;
    rep.criteria.push_back(run_criterion(id, opt.seed));
    if (progress) progress(rep.criteria.back());
  }
  if (selected(criterion_count)) {
    auto start = std::chrono::steady_clock::now();
    std::string first = criteria_json(rep.criteria).dump(2);
    std::vector<CriterionResult> again;
    {
      ThreadOverride guard(opt.second_run_threads);
      for (const auto& c : rep.criteria) again.push_back(run_criterion(c.id, opt.seed));
    }
    std::string second = criteria_json(again).dump(2);
    long diff = -1;
    for (std::size_t i = 0; i < std::min(first.size(), second.size()); ++i)
      if (first[i] != second[i]) {
        diff = static_cast<long>(i);
        break;
      }
    if (diff < 0 && first.size() != second.size()) diff = static_cast<long>(std::min(first.size(), second.size()));
    CriterionResult c;
    c.id = criterion_count;
    c.name = criterion_name(criterion_count);
    c.pass = diff < 0;
    c.details = {{"runs", 2},
                 {"repeat_threads", opt.second_run_threads},
                 {"criteria_compared", rep.criteria.size()},
                 {"manifest_bytes", first.size()},
                 {"identical", diff < 0},
                 {"first_difference", diff}};
    c.summary = diff < 0 ? "second run byte-identical (" + std::to_string(first.size()) + " bytes)"
                         : "manifests differ at byte " + std::to_string(diff);
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.criteria.push_back(c);
    if (progress) progress(rep.criteria.back());
  }
  return rep;
}

bool SuiteReport::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
}

std::size_t SuiteReport::passed() const {
  return static_cast<std::size_t>(std::count_if(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; }));
}

nlohmann::json SuiteReport::manifest() const {
  return {{"suite", "acceptance"},
          {"version", suite_version},
          {"seed", seed},
          {"prng", "splitmix64"},
          {"criteria", criteria_json(criteria)},
          {"passed", passed()},
          {"total", criteria.size()},
          {"status", all_pass() ? "PASS" : "FAIL"}};
}

std::string SuiteReport::manifest_text() const { return manifest().dump(2) + "\n"; }

}  // namespace rearrange::acceptance
