#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "acceptance_suite.hpp"

namespace acc = rearrange::acceptance;

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria, one PASS/FAIL line each"};
  std::uint64_t seed = 7;
  std::string manifest;
  std::vector<int> only;
  app.add_option("--seed", seed, "PRNG seed (splitmix64)");
  app.add_option("--manifest", manifest, "write the JSON manifest here");
  app.add_option("--only", only, "run only these criterion ids")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  acc::SuiteOptions opt;
  opt.seed = seed;
  opt.only.insert(only.begin(), only.end());
  auto report = acc::run_acceptance(opt, [](const acc::CriterionResult& c) {
    std::printf("%s  criterion %2d  %-45s %7.2f s  %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), c.seconds, c.summary.c_str());
    std::fflush(stdout);
  });
  if (!manifest.empty()) std::ofstream(manifest) << report.manifest_text();
  std::printf("%zu/%zu criteria passed (seed %llu)\n", report.passed(), report.criteria.size(), static_cast<unsigned long long>(seed));
  return report.all_pass() ? 0 : 1;
}
