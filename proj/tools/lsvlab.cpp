#include <iostream>
#include <regex>
#include <string>

#include <CLI11.hpp>

#include "lsv/commands.hpp"
#include "lsv/errors.hpp"

namespace {

// Numeric flags accept plain decimal notation only: no exponents, hex, inf or nan.
const CLI::Validator kDecimalReal(
    [](std::string& s) {
      static const std::regex re(R"(^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)$)");
      return std::regex_match(s, re) ? std::string() : "'" + s + "' is not a decimal number";
    },
    "DECIMAL");

const CLI::Validator kDecimalCount(
    [](std::string& s) {
      static const std::regex re(R"(^[0-9]+$)");
      return std::regex_match(s, re) ? std::string() : "'" + s + "' is not a non-negative decimal integer";
    },
    "INTEGER");

const char* kDescriptions[][2] = {
    {"geometry", "backward orbit y_n of 1/2, envelope constants and induced-map expansion"},
    {"density", "Ulam invariant density and its |log x|^beta asymptote"},
    {"tails", "exact and empirical return-time tails with a stretched-exponential fit"},
    {"correlations", "correlation series, V and sigma^2, and a decay fit"},
    {"deviation", "large-deviation probabilities of Birkhoff sums and the rate checks"},
    {"mdp", "moderate-deviation trend table"},
    {"concentration", "tail of K - E K for K = max_j |S_j| and the concentration checks"},
    {"verify", "run the full acceptance suite"},
};

}  // namespace

int main(int argc, char** argv) {
  lsv::cli::CommandOptions opts;
  std::string n_range, format = "csv", obs, out = opts.out.string();
  double theta = 0.0;
  std::uint64_t trials = 0;
  std::size_t n_max = 0;

  CLI::App app{"lsvlab: dynamics laboratory for an intermittent interval map with stretched-exponential returns"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  app.add_option("--gamma", opts.gamma, "tail exponent in (0, 1]; 1 is the doubling map")->check(kDecimalReal);
  app.add_option("--delta", opts.delta, "power of |log x| for the log-power observables")->check(kDecimalReal);
  app.add_option("--seed", opts.seed, "base RNG seed")->check(kDecimalCount);
  auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials")->check(kDecimalCount);
  app.add_option("--threads", opts.threads, "worker cap; outputs do not depend on it")->check(kDecimalCount);
  auto* n_opt = app.add_option("--n", n_range, "orbit lengths as a:b:step or a single value");
  app.add_option("--out", out, "output directory");
  app.add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
  auto* obs_opt = app.add_option("--obs", obs, "observable")->check(CLI::IsMember(lsv::cli::kObservableNames));
  auto* n_max_opt = app.add_option("--n-max", n_max, "largest index for geometry, tails, correlations")
                        ->check(kDecimalCount);
  app.add_option("--cells", opts.cells, "Ulam grid cells")->check(kDecimalCount);
  app.add_option("--epsilon", opts.epsilon, "slack eps in the lower-bound set inclusion")->check(kDecimalReal);
  app.add_option("--cutoff", opts.cutoff, "truncation point of truncated-log-power")->check(kDecimalReal);
  app.add_option("--x", opts.x, "moderate-deviation level")->check(kDecimalReal);
  auto* theta_opt = app.add_option("--theta", theta, "moderate-deviation speed a_n = n^-theta")->check(kDecimalReal);

  for (const auto& d : kDescriptions) app.add_subcommand(d[0], d[1]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? lsv::cli::kExitOk : lsv::cli::kExitUsage;
  }

  opts.subcommand = app.get_subcommands().front()->get_name();
  opts.out = out;
  opts.format = format == "json" ? lsv::cli::OutputFormat::Json : lsv::cli::OutputFormat::Csv;
  if (*trials_opt) opts.trials = trials;
  if (*obs_opt) opts.obs = obs;
  if (*n_max_opt) opts.n_max = n_max;
  if (*theta_opt) opts.theta = theta;
  if (*n_opt) {
    try {
      opts.n = lsv::cli::NRange::parse(n_range);
    } catch (const lsv::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return lsv::cli::kExitUsage;
    }
  }
  return lsv::cli::run_command(opts, std::cout, std::cerr);
}
