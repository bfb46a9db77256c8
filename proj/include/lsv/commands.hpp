#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lsv/analysis.hpp"
#include "lsv/model.hpp"
#include "lsv/observables.hpp"

namespace lsv::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumeric = 2, kExitVerifyFail = 3 };

enum class OutputFormat { Csv, Json };

// Inclusive arithmetic range "a:b:step", or a single value "a".
struct NRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t step = 1;

  // Throws ConfigError on malformed text, step 0, or first > last.
  static NRange parse(std::string_view text);
  std::vector<std::size_t> values() const;
  std::string to_string() const;
};

inline const std::vector<std::string> kSubcommands = {"geometry",  "density", "tails",         "correlations",
                                                      "deviation", "mdp",     "concentration", "verify"};
inline const std::vector<std::string> kObservableNames = {"item-a", "log-power", "truncated-log-power", "identity"};

// Unset optionals take subcommand-dependent defaults in resolve().
struct CommandOptions {
  std::string subcommand;
  double gamma = 0.5;
  double delta = 1.0;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> trials;
  unsigned threads = 1;
  std::optional<NRange> n;
  std::filesystem::path out = "lsvlab-out";
  OutputFormat format = OutputFormat::Csv;
  std::optional<std::string> obs;
  std::optional<std::size_t> n_max;
  std::size_t cells = 4096;
  double epsilon = 1.0;   // slack in the lower-bound inclusion S_n(f) >= eps n
  double cutoff = 1e-3;   // truncation point of truncated-log-power
  double x = 1.0;         // moderate-deviation level
  std::optional<double> theta;  // a_n = n^{-theta}
};

// Fills every default and validates; throws ConfigError.
CommandOptions resolve(const CommandOptions& options);

// The resolved configuration that determines output content. Excludes the
// worker count and the output directory.
nlohmann::json canonical_config(const CommandOptions& resolved);

Observable make_observable(const std::string& name, const GeometrySequence& geometry, double delta, double cutoff);

// phi(x) / |log x|^beta over cells with midpoints in [lo, hi].
struct AsymptoteReport {
  double lo = 0.0;
  double hi = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double spread = 0.0;  // ratio_max / ratio_min
  double min_density_above = 0.0;  // on [min_density_from, 1]
  double min_density_from = 0.0;
};
AsymptoteReport asymptote_report(const Model& model, double lo = 1e-8, double hi = 1e-2,
                                 double min_density_from = 1e-3);

nlohmann::json to_json(const RateFit& fit);
nlohmann::json to_json(const OptAReport& report);
nlohmann::json to_json(const OptBReport& report);
nlohmann::json to_json(const MdpReport& report);
nlohmann::json to_json(const ConcentrationReport& report);
nlohmann::json to_json(const AsymptoteReport& report);

struct CommandResult {
  int exit_code = kExitOk;
  std::string config_hash;
  std::vector<std::filesystem::path> outputs;
};

// Runs one subcommand and writes its artifacts under options.out. Throws on
// configuration, numeric or I/O failure.
CommandResult execute(const CommandOptions& options, std::ostream& out);

// execute() with exceptions mapped to exit codes and reported on err.
int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err);

// Prints rows under a header with columns padded to a common width.
void print_aligned(std::ostream& out, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows);

}  // namespace lsv::cli
