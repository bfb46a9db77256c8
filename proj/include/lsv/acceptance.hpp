#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace lsv::acceptance {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::vector<Check> checks;
  nlohmann::json data;
};

struct Options {
  unsigned threads = 1;
  std::uint64_t seed = 1;
  // Scratch space for the CLI determinism checks; a fresh temporary
  // directory when empty.
  std::filesystem::path scratch;
  std::ostream* progress = nullptr;
};

inline constexpr int kCriterionCount = 9;

// Results shared between criteria; filled on demand.
struct Context {
  Options options;
  std::optional<double> bounded_exponent;  // large-deviation exponent of the ramp observable
};

CriterionResult run_criterion(int id, Context& context);
std::vector<CriterionResult> run_all(const Options& options);

// "PASS  [3] title (1.2 s / budget 120 s)" followed by failing checks.
std::string summary_line(const CriterionResult& result);
nlohmann::json to_json(const CriterionResult& result);

}  // namespace lsv::acceptance
