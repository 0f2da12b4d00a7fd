#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <rearrange/energies.hpp>
#include <rearrange/fixtures.hpp>
#include <rearrange/symmetrize.hpp>

using namespace rearrange;
using Catch::Approx;

namespace {

double sinc4(double x) {
  double c = std::fabs(x) < 1e-8 ? 1.0 : std::sin(0.5 * x) / (0.5 * x);
  return c * c * c * c;
}

// [tent]^2_{H^s} from the Fourier side: (2 / C_{1,s}) int |xi|^{2s} |hat f|^2 dxi / (2 pi),
// hat f(xi) = sinc^2(xi / 2).
double tent_fourier_1d(double s) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  const int periods = 2000;
  double sum = 0.0;
  auto g = [s](double x) { return std::pow(x, 2.0 * s) * sinc4(x); };
  for (int k = 0; k < periods; ++k) sum += GL::integrate(g, k * M_PI, (k + 1) * M_PI);
  double L = periods * M_PI;
  sum += 6.0 * std::pow(L, 2.0 * s - 3.0) / (3.0 - 2.0 * s);  // mean of sin^4 is 3/8
  return 2.0 / (2.0 * c_ns(1, s)) * 2.0 * sum / (2.0 * M_PI);
}

// Same for tent(x) tent(y) in the plane, tensor Gauss rule on [0, 300 pi]^2.
double tent_fourier_2d(double s) {
  using GL = boost::math::quadrature::gauss<double, 10>;
  std::vector<double> x, w;
  for (int k = 0; k < 300; ++k) {
    double c = (k + 0.5) * M_PI, h = 0.5 * M_PI;
    for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
      double a = GL::abscissa()[i], wi = GL::weights()[i];
      x.push_back(c + a * h);
      w.push_back(wi * h);
      if (a != 0.0) {
        x.push_back(c - a * h);
        w.push_back(wi * h);
      }
    }
  }
  std::vector<double> sx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sx[i] = sinc4(x[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) sum += w[i] * w[j] * std::pow(x[i] * x[i] + x[j] * x[j], s) * sx[i] * sx[j];
  return 2.0 / (2.0 * c_ns(2, s)) * 4.0 * sum / (4.0 * M_PI * M_PI);
}

GridFunction tent2d(std::size_t n) {
  Axis ax{-1.5, 1.5, n};
  return GridFunction::sample({ax, ax}, [](double x, double y) { return fixtures::tent(x, 0, 1, 1) * fixtures::tent(y, 0, 1, 1); });
}

}  // namespace

TEST_CASE("indicator of (0,1): closed-form tail integral") {
  auto f = fixtures::indicator(Axis{-0.25, 1.25, 2049}, 0.0, 1.0);
  auto r = gagliardo(f, 0.25, 2.0);
  CHECK(std::fabs(r.value / 16.0 - 1.0) <= 0.02);
  // 4 / (sigma (1 - sigma)) with sigma = s p
  auto r3 = gagliardo(f, 0.1, 3.0);
  CHECK(std::fabs(r3.value / (4.0 / (0.3 * 0.7)) - 1.0) <= 0.02);
}

TEST_CASE("triangle Gagliardo energy against the Fourier side") {
  auto f = fixtures::triangle(Axis{-2.0, 2.0, 2049});
  for (auto [s, tol] : {std::pair{0.25, 1e-4}, std::pair{0.45, 1e-3}, std::pair{0.75, 1e-2}}) {
    CAPTURE(s);
    double oracle = tent_fourier_1d(s);
    auto r = gagliardo(f, s, 2.0);
    CHECK(std::fabs(r.value / oracle - 1.0) <= tol);
    CHECK(r.error_estimate <= 0.01 * r.value);
  }
}

TEST_CASE("2-D Gagliardo energy of a product of tents") {
  auto f = tent2d(129);
  for (double s : {0.25, 0.45}) {
    CAPTURE(s);
    double oracle = tent_fourier_2d(s);
    auto r = gagliardo(f, s, 2.0);
    CHECK(std::fabs(r.value / oracle - 1.0) <= 5e-3);
  }
}

TEST_CASE("refinement flags divergent energies") {
  auto f = fixtures::indicator(Axis{-0.25, 1.25, 513}, 0.0, 1.0);
  try {
    gagliardo(f, 0.75, 2.0);
    FAIL("expected DivergentQuadrature");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivergentQuadrature);
  }
}

TEST_CASE("C_eps matches the closed-form radial integral") {
  // int_0^inf r^(a-1) / (r^b + eps) dr = eps^(a/b - 1) (pi / b) / sin(pi a / b)
  auto closed = [](double a, double b, double eps) { return std::pow(eps, a / b - 1.0) * (M_PI / b) / std::sin(M_PI * a / b); };
  for (double eps : {1e-3, 1e-2, 0.3}) {
    for (double s : {0.25, 0.5, 0.75}) {
      CAPTURE(eps, s);
      CHECK(c_eps(1, s, 2.0, eps) == Approx(4.0 * closed(1.0, 1.0 + 2.0 * s, eps)).epsilon(1e-9));
      CHECK(c_eps(2, s, 2.0, eps) == Approx(4.0 * M_PI * closed(2.0, 2.0 + 2.0 * s, eps)).epsilon(1e-9));
    }
  }
}

TEST_CASE("kernel antiderivative against a fine trapezoid rule") {
  KernelSpec spec{1, 0.25, 2.0, 0.1, 0.0};
  const auto& t = kernel_table(spec);
  const std::size_t n = 1000000;
  double h = 1.0 / n, sum = 0.5 * (spec(0.0) + spec(1.0));
  for (std::size_t i = 1; i < n; ++i) sum += spec(h * i);
  CHECK(std::fabs(t.Kbar(1.0) - sum * h) <= 1e-8);
  CHECK(t.Kbar(-1.0) == -t.Kbar(1.0));
  CHECK(t.tail(1.0) == Approx(t.Kbar_inf() - t.Kbar(1.0)));
}

TEST_CASE("regularized energies increase to the Gagliardo energy") {
  auto f = fixtures::triangle(Axis{-2.0, 2.0, 2049});
  double g = gagliardo(f, 0.3, 2.0, false).value;
  double prev = 0.0;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    double F = regularized_energy(f, 0.3, 2.0, eps, false).F.value;
    CHECK(F > prev);
    CHECK(F < g);
    prev = F;
  }
  // the deficit is linear in eps for n = 1, p = 2
  double a = regularized_energy(f, 0.3, 2.0, 1e-3, false).F.value, b = regularized_energy(f, 0.3, 2.0, 2e-3, false).F.value;
  CHECK(std::fabs((2.0 * a - b) / g - 1.0) <= 0.02);
  auto r = regularized_energy(f, 0.3, 2.0, 1e-2);
  CHECK(r.I == Approx(r.F.value - r.c_eps * r.lp));
  CHECK(r.lp == Approx(2.0 / 3.0).epsilon(1e-12));

  auto f2 = tent2d(65);
  double g2 = gagliardo(f2, 0.3, 2.0, false).value, F2 = regularized_energy(f2, 0.3, 2.0, 1e-3, false).F.value;
  CHECK(F2 < g2);
  CHECK(F2 > regularized_energy(f2, 0.3, 2.0, 1e-2, false).F.value);
}

TEST_CASE("interaction, potential and local energies on closed forms") {
  auto chi = fixtures::indicator(Axis{-0.25, 1.25, 1537}, 0.0, 1.0);
  CHECK(std::fabs(interaction_energy(chi, [](double r) { return r * r; }).value - 1.0 / 6.0) <= 1e-3);
  auto chi2 = fixtures::indicator(Axis{-2.0, 2.0, 1025}, -1.0, 1.0);
  CHECK(std::fabs(potential_energy(chi2, [](double r) { return r * r; }).value - 2.0 / 3.0) <= 1e-3);
  auto tri = fixtures::triangle(Axis{-2.0, 2.0, 801});
  CHECK(local_seminorm(tri, 2.0).value == Approx(2.0).epsilon(1e-12));
  CHECK(local_seminorm(tri, 3.0).value == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fractional Laplacian of the stationary profile is quadratic") {
  for (int n : {1, 2}) {
    for (double s : {0.25, 0.5, 0.75}) {
      CAPTURE(n, s);
      double kappa = std::pow(4.0, s) * std::tgamma(s + 2.0) * std::tgamma(s + 0.5 * n) / std::tgamma(0.5 * n);
      auto v = RadialProfile::sample(n, 1.5, 4001, [s](double r) { return r < 1.0 ? std::pow(1.0 - r * r, 1.0 + s) : 0.0; });
      std::vector<double> radii = {0.0, 0.3, 0.5, 0.8};
      auto out = frac_laplacian_radial(v, s, radii);
      for (std::size_t i = 0; i < radii.size(); ++i) {
        double expect = kappa * (1.0 - (1.0 + 2.0 * s / n) * radii[i] * radii[i]);
        CHECK(std::fabs(out[i] - expect) <= 1e-3 * kappa);
      }
      try {
        frac_laplacian_radial(v, s, {0.999});
        FAIL("expected EvalTooCloseToBoundary");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EvalTooCloseToBoundary);
      }
    }
  }
}

TEST_CASE("energies are translation and reflection invariant") {
  Axis ax{-2.0, 2.0, 801};
  auto f = fixtures::two_tent(ax);
  // function and grid shifted together by 0.37, and the reflection
  auto g = GridFunction::sample1d(Axis{-1.63, 2.37, 801}, [](double x) { return fixtures::tent(x, -0.43, 0.7, 1) + fixtures::tent(x, 0.97, 0.7, 0.6); });
  auto r = GridFunction::sample1d(ax, [](double x) { return fixtures::tent(x, 0.8, 0.7, 1) + fixtures::tent(x, -0.6, 0.7, 0.6); });
  double a = gagliardo(f, 0.4, 2.0, false).value;
  CHECK(gagliardo(g, 0.4, 2.0, false).value == Approx(a).epsilon(1e-10));
  CHECK(gagliardo(r, 0.4, 2.0, false).value == Approx(a).epsilon(1e-10));
  double b = regularized_energy(f, 0.4, 2.0, 1e-2, false).F.value;
  CHECK(regularized_energy(g, 0.4, 2.0, 1e-2, false).F.value == Approx(b).epsilon(1e-10));
  CHECK(regularized_energy(r, 0.4, 2.0, 1e-2, false).F.value == Approx(b).epsilon(1e-10));
}

TEST_CASE("symmetrization lowers the energies") {
  SplitMix64 rng(11);
  Axis ax{-3.0, 3.0, 1201};
  for (int trial = 0; trial < 5; ++trial) {
    double c1 = rng.uniform(-1.5, -0.2), c2 = rng.uniform(0.2, 1.5), w1 = rng.uniform(0.3, 1.0), w2 = rng.uniform(0.3, 1.0);
    double h1 = rng.uniform(0.3, 1.0), h2 = rng.uniform(0.3, 1.0);
    auto f = GridFunction::sample1d(ax, [&](double x) { return fixtures::tent(x, c1, w1, h1) + fixtures::tent(x, c2, w2, h2); });
    auto sf = steiner_full(f);
    CHECK(gagliardo(sf, 0.3, 2.0, false).value <= gagliardo(f, 0.3, 2.0, false).value);
    CHECK(regularized_energy(sf, 0.3, 2.0, 1e-2, false).F.value <= regularized_energy(f, 0.3, 2.0, 1e-2, false).F.value);
    double prev_i = 1e300, prev_v = 1e300;
    for (double tau : {0.0, 0.1, 0.2, 0.4, 0.8}) {
      auto ft = steiner_continuous(f, tau);
      double I = interaction_energy(ft, [](double r) { return r * r; }).value;
      double V = potential_energy(ft, [](double r) { return r * r; }).value;
      CHECK(I <= prev_i + 1e-9);
      CHECK(V <= prev_v + 1e-9);
      prev_i = I;
      prev_v = V;
    }
  }
}

TEST_CASE("C_eps grows as eps decreases") {
  CHECK(c_eps(1, 0.3, 2.0, 0.01) > c_eps(1, 0.3, 2.0, 0.1));
  CHECK(c_eps(2, 0.3, 2.0, 0.01) > c_eps(2, 0.3, 2.0, 0.1));
}

TEST_CASE("thin-film energy combines the two parts") {
  Axis ax{-2.0, 2.0, 801};
  auto v = fixtures::triangle(ax);
  auto e = thin_film_energy(v, 0.4, 2.0);
  double expect = c_ns(1, 0.4) * gagliardo(v, 0.4, 2.0).value + potential_energy(v, [](double r) { return r * r; }).value;
  CHECK(e.value == Approx(expect).epsilon(1e-12));
  auto moved = fixtures::triangle(ax, 0.3);
  CHECK(thin_film_energy(moved, 0.4, 2.0).value > e.value);
  CHECK(thin_film_energy(GridFunction::sample1d(ax, [](double) { return 0.0; }), 0.4, 2.0, false).value == 0.0);
}

TEST_CASE("1-D Gagliardo quadrature converges at second order") {
  for (auto [s, p] : {std::pair{0.75, 3.0}, std::pair{0.75, 1.5}, std::pair{0.45, 2.0}}) {
    CAPTURE(s, p);
    std::vector<double> E;
    for (std::size_t n : {1001, 2001, 4001}) E.push_back(gagliardo(fixtures::two_bump(Axis{-2.5, 2.5, n}), s, p, false).value);
    double ratio = (E[1] - E[0]) / (E[2] - E[1]);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
  }
}
