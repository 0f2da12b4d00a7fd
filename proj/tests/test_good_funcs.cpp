#include <catch_amalgamated.hpp>

#include <rearrange/energies.hpp>
#include <rearrange/fixtures.hpp>
#include <rearrange/good_funcs.hpp>

using namespace rearrange;
using Catch::Approx;

namespace {

// Two tents on opposite sides of the origin, unequal heights and widths.
GoodProfile two_tents() { return GoodProfile::line({-1.5, -0.8, -0.1, 0.2, 0.6, 1.3}, {0.0, 1.0, 0.0, 0.0, 0.6, 0.0}); }

// Level-set form of int |f'|^p for a single peak whose sides are moved by
// the eps-speed flow: y+- -> y+- - t V(y+ + y-), V(z) = clamp(z / 2eps, -1/2, 1/2).
double peak_seminorm(double ym, double yc, double yp, double p, double eps, double t, std::size_t nh) {
  auto V = [eps](double z) { return std::clamp(z / (2.0 * eps), -0.5, 0.5); };
  auto side = [&](double h) {
    double a = ym + h * (yc - ym), b = yp - h * (yp - yc);
    double v = V(a + b);
    return std::pair{a - t * v, b - t * v};
  };
  double dh = 1.0 / static_cast<double>(nh), sum = 0.0;
  for (std::size_t k = 0; k < nh; ++k) {
    auto [a0, b0] = side(k * dh);
    auto [a1, b1] = side((k + 1) * dh);
    sum += dh * (std::pow(std::fabs(a1 - a0) / dh, 1.0 - p) + std::pow(std::fabs(b1 - b0) / dh, 1.0 - p));
  }
  return sum;
}

}  // namespace

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(GoodProfile::line({0.0, 1.0, 0.5}, {0.0, 1.0, 0.0}), Error);
  CHECK_THROWS_AS(GoodProfile::line({0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}), Error);
  CHECK_THROWS_AS(GoodProfile::line({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 1.0, 0.0}), Error);
  CHECK_NOTHROW(GoodProfile::line({0.0, 1.0, 2.0, 3.0, 4.0}, {0.0, 1.0, 0.0, 0.0, 0.0}));
  auto g = two_tents();
  CHECK(g.sup() == 1.0);
  CHECK(g.lp_norm_p(2.0) == Approx((1.4 + 1.1 * 0.36) / 3.0).epsilon(1e-13));
  auto iv = g.sections(0, 0.5);
  REQUIRE(iv.size() == 2);
  CHECK(iv[0].a == Approx(-1.15));
  CHECK(iv[1].b == Approx(0.6 + 0.7 / 6.0));
  auto back = profile_from_json(to_json(g));
  CHECK(back.slice(0).y == g.slice(0).y);
}

TEST_CASE("Example 4.6 slice at x = 0, h = 1/2") {
  auto g = GoodProfile::sampled_2d(fixtures::example_4_6, -1.5, 1.5, 31, -3.5, 3.5, 281);
  std::size_t mid = 15;
  REQUIRE(g.slice(mid).x == Approx(0.0).margin(1e-12));
  auto iv = g.sections(mid, 0.5);
  REQUIRE(iv.size() == 2);
  CHECK(iv[0].a == Approx(-2.75).margin(1e-12));
  CHECK(iv[0].b == Approx(-1.25).margin(1e-12));
  CHECK(iv[1].a == Approx(1.5).margin(1e-12));
  CHECK(iv[1].b == Approx(2.5).margin(1e-12));
}

TEST_CASE("level-set energy matches the regularized energy") {
  auto g = GoodProfile::line({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0});
  auto f = fixtures::triangle(Axis{-2.0, 2.0, 2049});
  for (double p : {2.0, 3.0}) {
    CAPTURE(p);
    auto e = energy_levels(g, 0.3, p, 1e-2);
    double reg = regularized_energy(f, 0.3, p, 1e-2, false).F.value;
    CHECK(std::fabs(e.F / reg - 1.0) <= 1e-3);
    CHECK(e.error_estimate <= 1e-3 * e.F);
    CHECK(e.F == Approx(e.I + e.c_eps * e.lp));
  }
}

TEST_CASE("nonlocal derivative against central differences of the energy") {
  auto g = two_tents();
  for (double p : {2.0, 3.0}) {
    CAPTURE(p);
    double d = derivative_nonlocal(g, 0.3, p, 1e-2).value;
    const double dt = 1e-3;
    double Fp = energy_levels(g, 0.3, p, 1e-2, {512, false}, steiner_motion(dt)).F;
    double Fm = energy_levels(g, 0.3, p, 1e-2, {512, false}, reverse_motion(dt)).F;
    double fd = (Fp - Fm) / (2.0 * dt);
    CHECK(d < 0.0);
    CHECK(std::fabs(d / fd - 1.0) <= 1e-3);
  }
}

TEST_CASE("symmetric profiles are stationary") {
  auto g = GoodProfile::line({-1.0, -0.3, 0.3, 1.0}, {0.0, 0.8, 0.8 + 1e-3, 0.0});
  auto sym = GoodProfile::line({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0});
  CHECK(derivative_nonlocal(sym, 0.3, 2.0, 1e-2).value == 0.0);
  CHECK(derivative_nonlocal(g, 0.3, 2.0, 1e-2).value <= 0.0);
  CHECK(derivative_local(sym, 2.0, 1e-2).value == Approx(0.0).margin(1e-12));
}

TEST_CASE("spatial decomposition agrees with the level-set derivative") {
  auto g = two_tents();
  for (double p : {2.0, 3.0}) {
    CAPTURE(p);
    auto a = asymmetry_decomposition(g, 0.3, p, 1e-2, 2000);
    double d = derivative_nonlocal(g, 0.3, p, 1e-2).value;
    CHECK(std::fabs(a.derivative / d - 1.0) <= 0.05);
    CHECK(a.measure_plus == Approx(1.1).epsilon(1e-2));
    CHECK(a.measure_minus == Approx(1.4).epsilon(1e-2));
    CHECK(a.measure_zero == 0.0);
  }
  CHECK_THROWS_AS(asymmetry_decomposition(g, 0.3, 1.5, 1e-2), Error);
}

TEST_CASE("two cones: local part vanishes, nonlocal part is negative") {
  auto g = GoodProfile::sampled_2d(fixtures::example_4_6, -1.5, 1.5, 32, -3.5, 3.5, 281);
  auto loc = derivative_local(g, 2.0, 1e-2);
  CHECK(std::fabs(loc.value) <= 1e-8);
  auto d = derivative_nonlocal(g, 0.3, 2.0, 1e-2, {128, true});
  CHECK(d.value < -3.0 * d.error_estimate);
  auto a = asymmetry_decomposition(g, 0.3, 2.0, 1e-2, 281);
  CHECK(std::fabs(a.derivative / d.value - 1.0) <= 0.05);
  CHECK(a.measure_plus == Approx(M_PI).epsilon(0.02));
  CHECK(a.measure_minus == Approx(M_PI).epsilon(0.02));
}

TEST_CASE("local derivative of a single peak") {
  // sides of slope 2 and -1; the box integrates to 2 over its band
  auto g = GoodProfile::line({-0.6, -0.1, 0.9}, {0.0, 1.0, 0.0});
  auto r = derivative_local(g, 2.0, 1e-2);
  CHECK(r.value == Approx(-3.0).epsilon(1e-10));
  CHECK(r.factored == Approx(r.value).epsilon(1e-10));
  for (double p : {2.0, 3.0}) {
    CAPTURE(p);
    double eps = 1e-2, dt = 1e-4;
    double fd = (peak_seminorm(-0.6, -0.1, 0.9, p, eps, dt, 20000) - peak_seminorm(-0.6, -0.1, 0.9, p, eps, -dt, 20000)) / (2.0 * dt);
    CHECK(std::fabs(derivative_local(g, p, eps).value / fd - 1.0) <= 0.1);
  }
}

TEST_CASE("bracket positivity and explicit lower bounds") {
  SplitMix64 rng(5);
  for (double eps : {1e-2, 0.1}) {
    KernelSpec spec{1, 0.3, 2.0, eps, 0.0};
    std::size_t violations = 0, bound_violations = 0;
    for (int k = 0; k < 15000; ++k) {
      double xm, xp, ym, yp;
      switch (k % 4) {
        case 0:  // separated
          ym = rng.uniform(-2, 0), yp = ym + rng.uniform(0.01, 1), xm = yp + rng.uniform(0.0, 1), xp = xm + rng.uniform(0.01, 1);
          break;
        case 1:  // y inside x, x centred to the right
          xm = rng.uniform(-2, 0), xp = xm + rng.uniform(0.1, 2), ym = xm + rng.uniform(0.0, 0.45) * (xp - xm),
          yp = ym + rng.uniform(0.01, 1.0) * (xm + xp - 2 * ym) * 0.5;
          break;
        case 2:  // x inside y, x centred to the right
          ym = rng.uniform(-2, 0), yp = ym + rng.uniform(0.1, 2), xm = ym + rng.uniform(0.5, 0.99) * (yp - ym),
          xp = xm + rng.uniform(0.01, 1.0) * (yp - xm);
          break;
        default:  // overlapping
          ym = rng.uniform(-2, 0), yp = ym + rng.uniform(0.1, 2), xm = rng.uniform(ym + 1e-3, yp - 1e-3), xp = yp + rng.uniform(0.01, 1);
      }
      if (!((xp + xm) - (yp + ym) > 0.0)) continue;
      auto b = bracket_sign(xm, xp, ym, yp, spec);
      if (k % 50 == 0) {
        std::vector<double> cuts = {xm, xp};
        for (double c : {ym, yp})
          if (c > xm && c < xp) cuts.push_back(c);
        std::sort(cuts.begin(), cuts.end());
        double direct = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
          direct += detail::gk([&](double x) { return spec(x - yp) - spec(x - ym); }, cuts[i], cuts[i + 1], 1e-13);
        CHECK(b.value == Approx(direct).epsilon(1e-8).margin(1e-12));
      }
      if (!(b.value > 0.0)) ++violations;
      if (b.value < b.lower_bound * (1.0 - 1e-9)) ++bound_violations;
    }
    CHECK(violations == 0);
    CHECK(bound_violations == 0);
  }
  KernelSpec spec{1, 0.3, 2.0, 1e-2, 0.0};
  CHECK(bracket_sign(1.0, 2.0, -0.5, 0.5, spec).kind == BracketCase::Separated);
  CHECK(bracket_sign(0.0, 2.0, 0.2, 0.5, spec).kind == BracketCase::Nested);
  CHECK(bracket_sign(0.2, 2.0, -1.0, 2.5, spec).kind == BracketCase::NestedReversed);
  CHECK(bracket_sign(0.2, 2.0, 0.0, 1.0, spec).kind == BracketCase::Overlapping);
  CHECK(bracket_sign(1.0, 2.0, -0.5, 0.5, spec).lower_bound > 0.0);
  try {
    bracket_sign(0.0, 1.0, 0.0, 1.0, spec);
    FAIL("expected InvalidOrdering");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidOrdering);
  }
  try {
    bracket_sign(1.0, 0.0, 0.0, 1.0, spec);
    FAIL("expected InvalidInterval");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInterval);
  }
}

TEST_CASE("eps -> 0 limit of the nonlocal derivative") {
  auto g = two_tents();
  auto r = derivative_nonlocal(g, 0.3, 2.0, 0.0, {256, true});
  CHECK(r.monotone_in_eps);
  REQUIRE(r.eps_values.size() == 4);
  CHECK(r.value < 0.0);
  CHECK(r.error_estimate <= 1e-2 * std::fabs(r.value));
}

TEST_CASE("antiderivatives") {
  KernelSpec spec{1, 0.3, 2.0, 0.1, 0.0};
  auto [kb, kbb] = antiderivatives(spec, 0.7);
  CHECK(kb == Approx(detail::gk([&](double r) { return spec(r); }, 0.0, 0.7)).epsilon(1e-9));
  CHECK(kbb == Approx(detail::gk([&](double r) { return (0.7 - r) * spec(r); }, 0.0, 0.7)).epsilon(1e-9));
}
