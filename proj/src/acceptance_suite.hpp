#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace rearrange::acceptance {

inline constexpr const char* suite_version = "1.0.0";
inline constexpr int criterion_count = 12;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;
  nlohmann::json details;
  double seconds = 0.0;  // wall time, printed only; never part of the manifest
};

struct SuiteOptions {
  std::uint64_t seed = 7;
  std::set<int> only;                  // empty: every criterion
  unsigned second_run_threads = 2;     // REARRANGE_THREADS for the repeat run of criterion 12
};

struct SuiteReport {
  std::uint64_t seed = 7;
  std::vector<CriterionResult> criteria;
  bool all_pass() const;
  std::size_t passed() const;
  nlohmann::json manifest() const;
  std::string manifest_text() const;  // manifest().dump(2) plus a newline
};

using Progress = std::function<void(const CriterionResult&)>;

// One criterion by id (1..11); exceptions become a FAIL with the message.
CriterionResult run_criterion(int id, std::uint64_t seed);

// Criteria 1..11 (or the selected ones), then criterion 12: the same
// selection run a second time under a different thread count and compared
// byte for byte.
SuiteReport run_acceptance(const SuiteOptions& opt, const Progress& progress = {});

std::string criterion_name(int id);

}  // namespace rearrange::acceptance
