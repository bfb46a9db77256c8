#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "lsv/commands.hpp"
#include "lsv/errors.hpp"
#include "lsv/io.hpp"

using namespace lsv;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("lsvlab-test-" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) EXPECT_EQ(std::stod(io::format_double(v)), v);
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(Io, Fnv1aKnownValues) {
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(io::hex64(0xabcull), "0000000000000abc");
}

TEST(Io, CsvCarriesManifestAndUnits) {
  io::CsvTable t;
  t.header = {"n[iterations]", "p[probability]"};
  t.add_row({"1", "0.5"});
  const auto text = io::render_csv(t, "deadbeef");
  EXPECT_EQ(text, "# manifest deadbeef\nn[iterations],p[probability]\n1,0.5\n");
  EXPECT_EQ(io::csv_body(text), "n[iterations],p[probability]\n1,0.5\n");
  EXPECT_THROW(t.add_row({"1"}), std::logic_error);
}

TEST(Io, UnwritablePathIsAnIoError) {
  EXPECT_THROW(io::write_text("/proc/lsvlab/forbidden/x.csv", "x"), IoError);
}

TEST(NRange, Parses) {
  const auto r = cli::NRange::parse("10:60:5");
  EXPECT_EQ(r.values().size(), 11u);
  EXPECT_EQ(r.values().back(), 60u);
  EXPECT_EQ(cli::NRange::parse("7").values(), std::vector<std::size_t>{7});
  EXPECT_EQ(cli::NRange::parse("10:12:5").values(), std::vector<std::size_t>{10});
}

TEST(NRange, RejectsMalformed) {
  for (const char* bad : {"", "a:b:c", "10:5:1", "1:10:0", "1:10", "1e2", "-3", "1:2:3:4"}) {
    EXPECT_THROW(cli::NRange::parse(bad), ConfigError) << bad;
  }
}

TEST(Resolve, RejectsInvalidGamma) {
  cli::CommandOptions o;
  o.subcommand = "geometry";
  for (double g : {0.0, -1.0, 1.01, std::nan("")}) {
    o.gamma = g;
    EXPECT_THROW(cli::resolve(o), ConfigError) << g;
  }
}

TEST(Resolve, RejectsUnknownNames) {
  cli::CommandOptions o;
  o.subcommand = "run";
  EXPECT_THROW(cli::resolve(o), ConfigError);
  o.subcommand = "deviation";
  o.obs = "sine";
  EXPECT_THROW(cli::resolve(o), ConfigError);
}

TEST(Resolve, FillsDefaults) {
  cli::CommandOptions o;
  o.subcommand = "deviation";
  auto r = cli::resolve(o);
  EXPECT_EQ(*r.obs, "item-a");
  EXPECT_EQ(r.n->to_string(), "10:60:5");
  o.obs = "log-power";
  EXPECT_EQ(cli::resolve(o).n->to_string(), "10:120:10");
  o.subcommand = "mdp";
  o.gamma = 1.0;
  EXPECT_DOUBLE_EQ(*cli::resolve(o).theta, 0.5);
  o.theta = 1.0;
  EXPECT_THROW(cli::resolve(o), ConfigError);
}

TEST(Resolve, HashIgnoresThreadsAndOutput) {
  cli::CommandOptions a;
  a.subcommand = "tails";
  auto b = a;
  b.threads = 5;
  b.out = "/elsewhere";
  EXPECT_EQ(io::config_hash(cli::canonical_config(cli::resolve(a))),
            io::config_hash(cli::canonical_config(cli::resolve(b))));
  b.seed = 2;
  EXPECT_NE(io::config_hash(cli::canonical_config(cli::resolve(a))),
            io::config_hash(cli::canonical_config(cli::resolve(b))));
}

TEST(Commands, DoublingTailsHaveExactColumn) {
  cli::CommandOptions o;
  o.subcommand = "tails";
  o.gamma = 1.0;
  o.n_max = 20;
  o.trials = 100000;
  o.out = scratch("tails");
  std::ostringstream sink;
  const auto res = cli::execute(o, sink);
  EXPECT_EQ(res.exit_code, cli::kExitOk);
  std::istringstream csv(io::read_text(o.out / "tails.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "# manifest " + res.config_hash);
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("n[iterations],exact[probability]", 0), 0u);
  for (int n = 1; n <= 20; ++n) {
    ASSERT_TRUE(std::getline(csv, line));
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    EXPECT_EQ(std::stoi(line.substr(0, c1)), n);
    EXPECT_EQ(std::stod(line.substr(c1 + 1, c2 - c1 - 1)), std::ldexp(1.0, 1 - n));
  }
  EXPECT_TRUE(std::filesystem::exists(o.out / "tails_manifest.json"));
  std::filesystem::remove_all(o.out);
}

TEST(Commands, OutputIndependentOfThreads) {
  cli::CommandOptions o;
  o.subcommand = "deviation";
  o.trials = 150000;
  o.cells = 2048;
  o.n = cli::NRange{10, 30, 10};
  std::string bodies[2];
  for (int k = 0; k < 2; ++k) {
    o.threads = k == 0 ? 1 : 3;
    o.out = scratch("dev" + std::to_string(k));
    std::ostringstream sink;
    cli::execute(o, sink);
    bodies[k] = io::read_text(o.out / "deviation.csv");
    std::filesystem::remove_all(o.out);
  }
  EXPECT_EQ(bodies[0], bodies[1]);
}

TEST(Commands, ExitCodes) {
  std::ostringstream out, err;
  cli::CommandOptions o;
  o.subcommand = "geometry";
  o.gamma = 0.0;
  EXPECT_EQ(cli::run_command(o, out, err), cli::kExitUsage);
  o.gamma = 0.5;
  o.out = "/proc/lsvlab/forbidden";
  EXPECT_EQ(cli::run_command(o, out, err), cli::kExitUsage);
  o.subcommand = "concentration";
  o.obs = "log-power";
  o.out = scratch("conc");
  EXPECT_EQ(cli::run_command(o, out, err), cli::kExitUsage);
  std::filesystem::remove_all(o.out);
}
