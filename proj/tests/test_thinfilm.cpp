#include <catch_amalgamated.hpp>

#include <rearrange/fixtures.hpp>
#include <rearrange/thinfilm.hpp>

using namespace rearrange;
using Catch::Approx;

TEST_CASE("kappa and the rescaling exponents") {
  CHECK(kappa(0.5, 1) == Approx(1.5).epsilon(1e-15));
  CHECK(kappa(1e-9, 1) == Approx(1.0).epsilon(1e-8));
  // n = 2: 4^s Gamma(s + 2) Gamma(s + 1)
  CHECK(kappa(0.3, 2) == Approx(std::pow(4.0, 0.3) * std::tgamma(2.3) * std::tgamma(1.3)).epsilon(1e-14));
  double prev = kappa(0.01, 1);
  for (double s = 0.02; s < 0.99; s += 0.01) {
    double k = kappa(s, 1);
    CHECK(std::fabs(k - prev) < 0.05 * k);
    prev = k;
  }
  auto e = barenblatt_exponents(1, 0.5);
  CHECK(e.alpha == Approx(0.25).epsilon(1e-15));
  CHECK(e.beta == Approx(0.25).epsilon(1e-15));
  e = barenblatt_exponents(2, 0.25);
  CHECK(e.alpha == Approx(4.0 / 9.0).epsilon(1e-15));
  CHECK(e.beta == Approx(2.0 / 9.0).epsilon(1e-15));
  SplitMix64 rng(3);
  for (int i = 0; i < 100; ++i) {
    int n = 1 + static_cast<int>(rng.next() % 2);
    double s = rng.uniform(0.01, 0.99);
    auto r = barenblatt_exponents(n, s);
    CHECK(r.alpha == Approx(n * r.beta).epsilon(1e-15));
  }
  CHECK_THROWS_AS(kappa(1.2, 1), Error);
}

TEST_CASE("explicit stationary profile") {
  for (double lambda : {1.0, 2.0}) {
    auto p = explicit_solution(lambda, 0.3, 1);
    CHECK(p.v.samples()[0] == Approx(std::pow(lambda, -0.3) / kappa(0.3, 1)).epsilon(1e-14));
    CHECK(std::fabs(p.v.support_radius() - 1.0 / std::sqrt(lambda)) <= p.v.dr() * 1.000001);
  }
  auto a = explicit_solution(1.0, 0.3, 1), b = explicit_solution(2.0, 0.3, 1);
  CHECK(b.support_radius() == Approx(a.support_radius() / std::sqrt(2.0)));
  CHECK(b.v.samples()[0] / a.v.samples()[0] == Approx(std::pow(2.0, -0.3)));
  // the discrete gradient decays like dist^s toward the support edge
  const auto& v = a.v.samples();
  std::size_t edge = 3200;
  CHECK(v[edge] == 0.0);
  auto slope = [&](std::size_t i) { return (v[i - 1] - v[i]) / a.v.dr(); };
  CHECK(slope(edge) < slope(edge - 10));
  // cell averages of dist^0.3 over the last cell and the 100th
  CHECK(slope(edge) / slope(edge - 99) == Approx(1.0 / (std::pow(100.0, 1.3) - std::pow(99.0, 1.3))).epsilon(0.1));
}

TEST_CASE("stationary equation: quadratic fit") {
  for (auto [n, s] : {std::pair{1, 0.25}, std::pair{1, 0.45}, std::pair{2, 0.25}}) {
    CAPTURE(n, s);
    auto p = explicit_solution(1.0, s, n);
    auto r = stationary_residual(p);
    CHECK(r.residual <= 1e-2);
    // (-Delta)^s v = 1 - (1 + 2s/n) |x|^2 for this normalisation
    CHECK(r.a == Approx(1.0).epsilon(1e-3));
    CHECK(r.b == Approx(-(1.0 + 2.0 * s / n)).epsilon(1e-3));
    auto bumped = perturb_profile(p.v, 0.05 * p.v.samples()[0], 0.3, 0.2);
    CHECK(stationary_residual(bumped, s, 1.0).residual > 10.0 * r.residual);
  }
  auto p = explicit_solution(1.0, 0.25, 1);
  CHECK_THROWS_AS(stationary_residual(p, 0.9), Error);
}

TEST_CASE("support components and their masses") {
  Axis ax{-2.5, 2.5, 1001};
  auto f = fixtures::two_bump(ax);
  auto [label, count] = support_components(f);
  CHECK(count == 2);
  auto m = component_masses(f, label, count);
  // int (1 - u^2)^3 = 32/35 per unit half-width
  CHECK(m[0] == Approx(32.0 / 35.0 * 0.6).epsilon(1e-4));
  CHECK(m[1] == Approx(32.0 / 35.0 * 0.5 * 0.7).epsilon(1e-4));
  auto g = fixtures::example_4_6_grid(61, 141);
  CHECK(support_components(g).second == 2);
}

TEST_CASE("descent along the truncated symmetrization") {
  const double s = 0.3;
  auto p = explicit_solution(1.0, s, 1);
  Axis ax{-2.5, 2.5, 2001};
  auto shifted = GridFunction::sample1d(ax, [&](double x) { return p.v.value(x - 0.3); });
  auto centred = GridFunction::sample1d(ax, [&](double x) { return p.v.value(x); });
  double h0 = 0.2 * p.v.samples()[0], c0 = lipschitz_report(shifted).c0;
  std::vector<double> tau;
  for (int i = 0; i <= 10; ++i) tau.push_back(0.8 * h0 / c0 * i / 10.0);

  auto d = descent_experiment(shifted, s, 1.0, h0, tau);
  CHECK(d.strictly_decreasing);
  CHECK(d.min_decrement_ratio > 1.0);
  CHECK(d.support_preserved);
  CHECK(d.max_component_mass_error <= 1e-3);
  CHECK(d.fitted_slope < 0.0);

  auto c = descent_experiment(centred, s, 1.0, h0, tau, false);
  CHECK(c.max_relative_change <= 1e-4);
  CHECK(std::fabs(c.fitted_slope) <= 1e-3 * c.energy.front());

  auto bumps = fixtures::two_bump(ax);
  double c0b = lipschitz_report(bumps).c0;
  std::vector<double> tb;
  for (int i = 0; i <= 10; ++i) tb.push_back(0.8 * 0.2 / c0b * i / 10.0);
  auto b = descent_experiment(bumps, s, 1.0, 0.2, tb);
  CHECK(b.strictly_decreasing);
  CHECK(b.min_decrement_ratio > 1.0);
  CHECK(b.support_preserved);
  CHECK(b.max_component_mass_error <= 1e-3);
}

TEST_CASE("truncation gap shrinks with h0") {
  auto f = fixtures::two_bump(Axis{-2.5, 2.5, 2001});
  double c0 = lipschitz_report(f).c0, tau = 0.5 * 0.05 / c0;
  double prev = std::numeric_limits<double>::infinity();
  for (double h0 : {0.2, 0.1, 0.05}) {
    double g = truncation_gap(f, 0.3, tau, h0);
    CHECK(g < prev);
    prev = g;
  }
}
