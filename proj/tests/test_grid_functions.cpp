#include <catch_amalgamated.hpp>

#include <cstdio>

#include <rearrange/fixtures.hpp>
#include <rearrange/grid_function.hpp>

using namespace rearrange;
using Catch::Approx;

TEST_CASE("validation rejects negative samples and non-zero boundary") {
  CHECK_THROWS_AS(GridFunction({{0.0, 1.0, 3}}, {0.0, -1.0, 0.0}), Error);
  CHECK_THROWS_AS(GridFunction({{0.0, 1.0, 3}}, {1.0, 1.0, 0.0}), Error);
  CHECK_THROWS_AS(GridFunction({{0.0, 1.0, 3}}, {0.0, 1.0}), Error);
  CHECK_NOTHROW(GridFunction({{0.0, 1.0, 3}}, {0.0, 1.0, 0.0}));
}

TEST_CASE("gfn round trip") {
  auto f = fixtures::example_4_6_grid(9, 15);
  std::string path = "grid_roundtrip.gfn";
  write_gfn(f, path);
  auto g = read_gfn(path);
  CHECK(g.axes() == f.axes());
  CHECK(g.samples() == f.samples());
  std::remove(path.c_str());
  CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"dim":1,"axes":[{"min":0,"max":1,"count":3}],"samples":[0,-1,0]})")), Error);
  CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"dim":1})")), Error);
}

TEST_CASE("superlevel sections of the piecewise linear interpolant") {
  auto f = fixtures::triangle({-2.0, 2.0, 401}, 0.5);
  auto u = superlevel_section(f, 0, 0.5);
  REQUIRE(u.size() == 1);
  CHECK(u[0].a == Approx(0.0).margin(1e-12));
  CHECK(u[0].b == Approx(1.0).margin(1e-12));
  CHECK(superlevel_section(f, 0, 2.0).empty());
}

TEST_CASE("two-cone slice at x = 0") {
  // Exact sections: |y - 2| < 1 - h and |y + 2| < (2 - h) / 2; at h = 0.5 these
  // are (1.5, 2.5) and (-2.75, -1.25).
  auto f = fixtures::example_4_6_grid(31, 1401);
  auto u = superlevel_section(f, 15, 0.5);
  REQUIRE(u.size() == 2);
  CHECK(u[0].a == Approx(-2.75).margin(1e-9));
  CHECK(u[0].b == Approx(-1.25).margin(1e-9));
  CHECK(u[1].a == Approx(1.5).margin(1e-9));
  CHECK(u[1].b == Approx(2.5).margin(1e-9));
  CHECK(u.measure() == Approx(2.5));
}

TEST_CASE("layer cake reconstructs within one height step plus one cell") {
  auto f = fixtures::two_tent({-2.0, 2.0, 801});
  HeightGrid grid{256, f.sup_norm()};
  auto sec = extract_sections(f, grid);
  std::vector<double> w(grid.count, grid.weight());
  auto g = layer_cake(sec[0], w, f.sym_axis());
  double c0 = 1.0 / 0.7;
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::fabs(g[j] - f.at(j)));
  CHECK(err <= grid.weight() + c0 * f.sym_axis().step());
  std::vector<IntervalUnion> bad = {IntervalUnion({{0.0, 0.1}}), IntervalUnion({{0.5, 1.0}})};
  CHECK_THROWS_AS(layer_cake(bad, {1.0, 1.0}, f.sym_axis()), Error);
}
