#include <catch_amalgamated.hpp>

#include <rearrange/fixtures.hpp>
#include <rearrange/symmetrize.hpp>

using namespace rearrange;
using Catch::Approx;

namespace {
double max_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.samples().size(); ++i) m = std::max(m, std::fabs(a.samples()[i] - b.samples()[i]));
  return m;
}
}  // namespace

TEST_CASE("shifted triangle moves rigidly toward the origin") {
  Axis ax{-2.0, 2.0, 801};
  auto f = fixtures::triangle(ax, 0.7);
  auto g = steiner_continuous(f, 0.3);
  CHECK(max_diff(g, fixtures::triangle(ax, 0.4)) <= 1e-12);
  auto h = steiner_continuous(f, 1.0);
  CHECK(max_diff(h, fixtures::triangle(ax, 0.0)) <= 1e-12);
  CHECK(max_diff(steiner_continuous(f, 0.0), f) == 0.0);
}

TEST_CASE("full symmetrization is the limit of the continuous one") {
  Axis ax{-2.0, 2.0, 801};
  auto f = fixtures::two_tent(ax);
  auto full = steiner_full(f);
  auto lim = steiner_continuous(f, tau_infinity(f));
  CHECK(max_diff(full, lim) <= 1e-9);
  for (std::size_t j = 0; j < ax.count; ++j) CHECK(full.at(j) == Approx(full.at(ax.count - 1 - j)).margin(1e-9));
  HeightGrid hg{64, f.sup_norm()};
  for (std::size_t k = 0; k < hg.count; ++k) {
    double h = hg.height(k);
    auto u = superlevel_section(f, 0, h), v = superlevel_section(full, 0, h);
    CHECK(v.size() <= 1);
    CHECK(v.measure() == Approx(u.measure()).margin(2.0 * ax.step()));
  }
}

TEST_CASE("symmetric decreasing input is a fixed point") {
  Axis ax{-2.0, 2.0, 401};
  auto f = GridFunction::sample1d(ax, [](double x) { return std::pow(std::max(0.0, 1.0 - x * x), 1.3); });
  CHECK(max_diff(steiner_continuous(f, 0.37), f) <= 1e-14);
  CHECK(max_diff(steiner_truncated(f, 0.05, 0.25).f, f) <= 1e-14);
}

TEST_CASE("L^p norms are preserved and the error shrinks under refinement") {
  for (double p : {1.0, 2.0, 5.0}) {
    double prev = -1.0;
    for (std::size_t n : {1025, 2049}) {
      auto f = fixtures::two_tent({-2.0, 2.0, n});
      double env = 0.0;
      for (double tau : {0.05, 0.23, 0.6}) {
        auto g = steiner_continuous(f, tau);
        env = std::max(env, std::fabs(g.lp_norm_p(p) - f.lp_norm_p(p)) / f.lp_norm_p(p));
      }
      CHECK(env <= 1e-3);
      if (prev >= 0.0) CHECK((env <= 0.5 * prev || env <= 1e-6));
      prev = env;
    }
  }
}

TEST_CASE("two-cone function: Lipschitz constant and truncated symmetrization") {
  auto f = fixtures::example_4_6_grid(61, 281);
  auto lip = lipschitz_report(f);
  CHECK(lip.c0 == Approx(2.0).epsilon(1e-9));
  double tau = 0.1, h0 = 0.25, dx = f.sym_axis().step();
  auto r = steiner_truncated(f, tau, h0);
  CHECK(r.clipped == 0);
  for (std::size_t i = 0; i < f.samples().size(); ++i) CHECK((f.samples()[i] > 0.0) == (r.f.samples()[i] > 0.0));
  CHECK(max_diff(r.f, f) <= tau * lip.c0 + 2.0 * lip.c0 * dx);
  double bound = lip.c0 * h0 / (h0 - lip.c0 * tau) + 2.0 * lip.c0 * dx / h0;
  CHECK(lipschitz_report(r.f).c0 <= bound);
  CHECK_THROWS_AS(steiner_truncated(f, 0.13, h0), Error);
}

TEST_CASE("continuous symmetrization in 2-D keeps per-slice measures") {
  auto f = fixtures::example_4_6_grid(41, 281);
  auto g = steiner_continuous(f, 0.5);
  for (std::size_t s = 0; s < f.slice_count(); s += 5) {
    for (double h : {0.2, 0.7, 1.3}) {
      double a = superlevel_section(f, s, h).measure(), b = superlevel_section(g, s, h).measure();
      CHECK(b == Approx(a).margin(2.0 * f.sym_axis().step()));
    }
  }
}
