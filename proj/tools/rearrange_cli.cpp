#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <rearrange/energies.hpp>
#include <rearrange/fixtures.hpp>
#include <rearrange/good_funcs.hpp>
#include <rearrange/height_interp.hpp>
#include <rearrange/symmetrize.hpp>
#include <rearrange/thinfilm.hpp>

#include "acceptance_suite.hpp"

using namespace rearrange;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0, exit_config = 2, exit_check = 3;

struct Flags {
  double s = 0.3, p = 2.0, eps = 1e-2, tau = 0.0, h0 = 0.0, beta = 1.0, lambda = 1.0;
  std::string axis = "last";
  std::size_t grid_n = 0, heights = 512, t_steps = 21;
  std::uint64_t seed = 7;
  int n = 1;
  std::string input, out, f0, f1, kind = "gagliardo", functional = "hs";
  bool full = false, local = false, asymmetry = false;
  std::vector<int> only;
};

void emit(const json& j, const std::string& path = "") {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream o(path);
  if (!o) throw Error(ErrorKind::Config, "cannot write " + path);
  o << j.dump(2) << "\n";
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream o(path);
  if (!o) throw Error(ErrorKind::Config, "cannot write " + path);
  o << text;
}

void need(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorKind::Config, std::string(flag) + " is required");
}

void check_axis(const GridFunction& f, const std::string& axis) {
  if (axis == "last" || axis == std::to_string(f.dim() - 1)) return;
  throw Error(ErrorKind::Config, "only the last axis can be symmetrized (got --axis " + axis + ")");
}

int cmd_symmetrize(const Flags& fl) {
  need(fl.input, "--input");
  need(fl.out, "--out");
  auto f = read_gfn(fl.input);
  check_axis(f, fl.axis);
  SymmetrizeOptions opt{fl.heights};
  json rep = {{"input", fl.input}, {"heights", fl.heights}};
  GridFunction g;
  if (fl.full) {
    g = steiner_full(f, opt);
    rep["mode"] = "full";
  } else if (fl.h0 > 0.0) {
    auto r = steiner_truncated(f, fl.tau, fl.h0, opt);
    g = r.f;
    rep["mode"] = "truncated";
    rep["h0"] = fl.h0;
    rep["c0"] = r.c0;
    rep["clipped"] = r.clipped;
  } else {
    g = steiner_continuous(f, fl.tau, opt);
    rep["mode"] = "continuous";
  }
  rep["tau"] = fl.tau;
  write_gfn(g, fl.out);
  double a = f.integral(), b = g.integral(), rel = a > 0.0 ? std::fabs(b - a) / a : std::fabs(b);
  rep["l1_in"] = a;
  rep["l1_out"] = b;
  rep["l1_relative_change"] = rel;
  rep["check"] = rel <= 1e-3 ? "PASS" : "FAIL";
  emit(rep);
  return rel <= 1e-3 ? exit_ok : exit_check;
}

int cmd_energy(const Flags& fl) {
  need(fl.input, "--input");
  auto f = read_gfn(fl.input);
  json rep;
  if (fl.kind == "gagliardo") {
    rep = to_json(gagliardo(f, fl.s, fl.p));
  } else if (fl.kind == "regularized") {
    auto r = regularized_energy(f, fl.s, fl.p, fl.eps);
    rep = to_json(r.F);
    rep["c_eps"] = r.c_eps;
    rep["lp"] = r.lp;
    rep["I"] = r.I;
  } else if (fl.kind == "thin-film") {
    rep = to_json(thin_film_energy(f, fl.s, fl.beta));
  } else if (fl.kind == "local") {
    rep = to_json(local_seminorm(f, fl.p));
  } else if (fl.kind == "potential") {
    rep = to_json(potential_energy(f, [](double r) { return r * r; }));
  } else {
    throw Error(ErrorKind::Config, "unknown --kind " + fl.kind);
  }
  rep["input"] = fl.input;
  emit(rep, fl.out);
  return exit_ok;
}

GoodProfile profile_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  if (j.contains("slices")) return profile_from_json(j);
  auto f = grid_from_json(j);
  const auto& ay = f.sym_axis();
  std::vector<double> y;
  for (std::size_t k = 0; k < ay.count; ++k) y.push_back(ay.coord(k));
  if (f.dim() == 1) return GoodProfile::line(y, f.samples());
  std::vector<ProfileSlice> sl;
  const auto& ax = f.axes()[0];
  for (std::size_t i = 0; i < ax.count; ++i) {
    std::vector<double> v(f.samples().begin() + static_cast<long>(i * ay.count), f.samples().begin() + static_cast<long>((i + 1) * ay.count));
    sl.push_back({ax.coord(i), y, v});
  }
  return GoodProfile(2, std::move(sl), ax.step());
}

int cmd_derivative(const Flags& fl) {
  need(fl.input, "--input");
  auto g = profile_from_file(fl.input);
  auto d = derivative_nonlocal(g, fl.s, fl.p, fl.eps, {fl.heights, true});
  json rep = {{"input", fl.input}, {"s", fl.s}, {"p", fl.p}, {"eps", fl.eps}, {"heights", fl.heights},
              {"nonlocal", {{"value", d.value}, {"error_estimate", d.error_estimate}}}};
  if (fl.eps == 0.0) {
    rep["nonlocal"]["eps_sequence"] = d.eps_sequence;
    rep["nonlocal"]["eps_values"] = d.eps_values;
    rep["nonlocal"]["monotone_in_eps"] = d.monotone_in_eps;
  }
  if (fl.local) {
    auto l = derivative_local(g, fl.p, fl.eps > 0.0 ? fl.eps : 1e-2);
    rep["local"] = {{"value", l.value}, {"factored", std::isnan(l.factored) ? json(nullptr) : json(l.factored)}};
  }
  if (fl.asymmetry) {
    auto a = asymmetry_decomposition(g, fl.s, fl.p, fl.eps);
    rep["asymmetry"] = {{"measure_plus", a.measure_plus}, {"measure_zero", a.measure_zero}, {"measure_minus", a.measure_minus},
                        {"I_pm", a.I_pm},          {"I_p0", a.I_p0},                 {"I_0m", a.I_0m},
                        {"derivative", a.derivative}};
  }
  // symmetrization never raises the energy
  bool ok = d.value <= 0.0;
  rep["check"] = ok ? "PASS" : "FAIL";
  emit(rep, fl.out);
  return ok ? exit_ok : exit_check;
}

int cmd_interpolate(const Flags& fl) {
  need(fl.f0, "--f0");
  need(fl.f1, "--f1");
  need(fl.out, "--out");
  if (fl.t_steps < 3) throw Error(ErrorKind::Config, "--t-steps must be >= 3");
  auto a = height_function(read_rad(fl.f0)), b = height_function(read_rad(fl.f1));
  if (a.n != b.n) throw Error(ErrorKind::Config, "profiles must share the dimension");
  FunctionalSpec spec;
  spec.s = fl.s;
  spec.p = fl.p;
  if (fl.grid_n > 0) spec.grid = fl.grid_n;
  if (fl.functional == "hs") {
    spec.kind = CurveFunctional::Hs;
  } else if (fl.functional == "lp") {
    spec.kind = CurveFunctional::Lp;
  } else if (fl.functional == "w1p") {
    spec.kind = CurveFunctional::W1p;
  } else if (fl.functional == "potential") {
    spec.kind = CurveFunctional::Potential;
    spec.V = [](double r) { return r * r; };
  } else {
    throw Error(ErrorKind::Config, "unknown --functional " + fl.functional);
  }
  auto c = convexity_curve(a, b, spec, uniform_t_grid(fl.t_steps));
  write_text(to_csv(c), fl.out);
  json rep = {{"functional", to_string(spec.kind)}, {"points", c.t.size()}, {"min_second_difference", c.min_second_difference},
              {"scale", c.scale}, {"out", fl.out}};
  bool ok = true;
  if (spec.kind == CurveFunctional::Hs) {
    ok = c.min_second_difference > 0.0;
    rep["check"] = "strict convexity";
  } else if (spec.kind == CurveFunctional::W1p && fl.p >= 2.0 * a.n / (a.n + 1.0)) {
    ok = c.min_second_difference >= -1e-8 * c.scale;
    rep["check"] = "convexity";
  }
  rep["status"] = ok ? "PASS" : "FAIL";
  emit(rep);
  return ok ? exit_ok : exit_check;
}

int cmd_verify_stationary(const Flags& fl) {
  RadialProfile v;
  double radius = 1.0 / std::sqrt(fl.lambda);
  if (!fl.input.empty()) {
    v = read_rad(fl.input);
    radius = v.support_radius();
  } else {
    v = explicit_solution(fl.lambda, fl.s, fl.n).v;
  }
  auto r = stationary_residual(v, fl.s, radius);
  auto rep = to_json(r);
  rep["s"] = fl.s;
  rep["n"] = v.dim();
  rep["support_radius"] = radius;
  rep["kappa"] = kappa(fl.s, v.dim());
  bool ok = r.residual <= 1e-2;
  rep["status"] = ok ? "PASS" : "FAIL";
  emit(rep, fl.out);
  return ok ? exit_ok : exit_check;
}

int cmd_make_fixture(const Flags& fl, const std::string& name) {
  need(fl.out, "--out");
  if (name == "example-4-6") {
    write_gfn(fixtures::example_4_6_grid(61, fl.grid_n ? fl.grid_n : 281), fl.out);
  } else if (name == "stationary") {
    write_rad(explicit_solution(fl.lambda, fl.s, fl.n, fl.grid_n ? fl.grid_n : 4001).v, fl.out);
  } else if (name == "triangle") {
    write_gfn(fixtures::triangle(Axis{-2.0, 2.0, fl.grid_n ? fl.grid_n : 801}), fl.out);
  } else if (name == "triangle-profile") {
    write_rad(fixtures::triangle_profile(fl.n), fl.out);
  } else if (name == "parabola-profile") {
    write_rad(fixtures::parabola_profile(fl.n), fl.out);
  } else if (name == "two-bump") {
    write_gfn(fixtures::two_bump(Axis{-2.5, 2.5, fl.grid_n ? fl.grid_n : 2001}), fl.out);
  } else {
    throw Error(ErrorKind::Config, "unknown fixture " + name);
  }
  emit({{"fixture", name}, {"out", fl.out}});
  return exit_ok;
}

int cmd_suite(const Flags& fl) {
  acceptance::SuiteOptions opt;
  opt.seed = fl.seed;
  opt.only.insert(fl.only.begin(), fl.only.end());
  auto rep = acceptance::run_acceptance(opt, [](const acceptance::CriterionResult& c) {
    std::fprintf(stderr, "%s  criterion %2d  %-45s %7.2f s  %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), c.seconds,
                 c.summary.c_str());
  });
  if (fl.out.empty())
    std::cout << rep.manifest_text();
  else
    write_text(rep.manifest_text(), fl.out);
  return rep.all_pass() ? exit_ok : exit_check;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rearrange: continuous Steiner symmetrization and nonlocal energies"};
  app.require_subcommand(1);
  Flags fl;
  auto common = [&](CLI::App* c) {
    c->add_option("--s", fl.s, "fractional order s in (0,1)");
    c->add_option("--p", fl.p, "integrability exponent");
    c->add_option("--eps", fl.eps, "kernel regularization");
    c->add_option("--out", fl.out, "output path");
  };

  auto* sym = app.add_subcommand("symmetrize", "continuous, truncated (--h0) or full Steiner symmetrization of a .gfn");
  sym->add_option("--input", fl.input)->required();
  sym->add_option("--tau", fl.tau);
  sym->add_option("--h0", fl.h0, "truncation height; enables the truncated flow");
  sym->add_option("--axis", fl.axis, "symmetrization axis (last)");
  sym->add_option("--heights", fl.heights);
  sym->add_flag("--full", fl.full);
  sym->add_option("--out", fl.out)->required();

  auto* en = app.add_subcommand("energy", "energy of a .gfn");
  common(en);
  en->add_option("--input", fl.input)->required();
  en->add_option("--kind", fl.kind, "gagliardo | regularized | thin-film | local | potential");
  en->add_option("--beta", fl.beta);

  auto* der = app.add_subcommand("derivative", "level-set derivative at tau = 0 of a .prof or .gfn");
  common(der);
  der->add_option("--input", fl.input)->required();
  der->add_option("--heights", fl.heights);
  der->add_flag("--local", fl.local);
  der->add_flag("--asymmetry", fl.asymmetry);

  auto* in = app.add_subcommand("interpolate", "functional along the height interpolation of two .rad profiles");
  common(in);
  in->add_option("--f0", fl.f0)->required();
  in->add_option("--f1", fl.f1)->required();
  in->add_option("--functional", fl.functional, "hs | lp | w1p | potential");
  in->add_option("--t-steps", fl.t_steps);
  in->add_option("--grid-n", fl.grid_n);

  auto* st = app.add_subcommand("verify-stationary", "quadratic fit of (-Delta)^s v for the explicit profile or a .rad");
  common(st);
  st->add_option("--input", fl.input);
  st->add_option("--lambda", fl.lambda);
  st->add_option("--n", fl.n);

  std::string fixture;
  auto* mk = app.add_subcommand("make-fixture", "example-4-6 | stationary | triangle | triangle-profile | parabola-profile | two-bump");
  mk->add_option("name", fixture)->required();
  mk->add_option("--s", fl.s);
  mk->add_option("--lambda", fl.lambda);
  mk->add_option("--n", fl.n);
  mk->add_option("--grid-n", fl.grid_n);
  mk->add_option("--out", fl.out)->required();

  auto* suite = app.add_subcommand("suite", "test suites");
  suite->require_subcommand(1);
  auto* acc = suite->add_subcommand("acceptance", "run the acceptance criteria and write the manifest");
  acc->add_option("--seed", fl.seed);
  acc->add_option("--only", fl.only)->delimiter(',');
  acc->add_option("--out", fl.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    if (*sym) return cmd_symmetrize(fl);
    if (*en) return cmd_energy(fl);
    if (*der) return cmd_derivative(fl);
    if (*in) return cmd_interpolate(fl);
    if (*st) return cmd_verify_stationary(fl);
    if (*mk) return cmd_make_fixture(fl, fixture);
    if (*acc) return cmd_suite(fl);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_config;
  }
  return exit_config;
}
