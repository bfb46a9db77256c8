#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lsv/montecarlo.hpp"

namespace lsv::io {

// Round-trippable decimal rendering (%.17g).
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;  // each entry names its unit, e.g. "n[iterations]"
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

// "# manifest <hash>" line, header row, then one line per row.
std::string render_csv(const CsvTable& table, std::string_view manifest_hash);

// Body only: everything after the manifest comment line.
std::string csv_body(std::string_view rendered);

CsvTable records_table(std::span<const DeviationRecord> records);
nlohmann::json records_json(std::span<const DeviationRecord> records);

// Throws IoError if the file cannot be created or written.
void write_text(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Hash of the canonical (key-sorted, compact) JSON dump.
std::string config_hash(const nlohmann::json& resolved_config);

std::string utc_timestamp(std::chrono::system_clock::time_point t);

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  std::string started;
  std::string finished;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;
  nlohmann::json config;

  nlohmann::json to_json() const;
};

}  // namespace lsv::io
