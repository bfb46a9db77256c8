#include "lsv/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "lsv/errors.hpp"

namespace lsv::io {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("CsvTable: row width differs from header");
  rows.push_back(std::move(row));
}

namespace {

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
}

}  // namespace

std::string render_csv(const CsvTable& table, std::string_view manifest_hash) {
  std::string out = "# manifest ";
  out += manifest_hash;
  out += '\n';
  append_line(out, table.header);
  for (const auto& row : table.rows) append_line(out, row);
  return out;
}

std::string csv_body(std::string_view rendered) {
  std::string_view rest = rendered;
  while (!rest.empty() && rest.front() == '#') {
    const auto eol = rest.find('\n');
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
  }
  return std::string(rest);
}

CsvTable records_table(std::span<const DeviationRecord> records) {
  CsvTable t;
  t.header = {"n[iterations]", "threshold[observable]", "trials[count]", "hits[count]",
              "p_hat[probability]", "ci_low[probability]", "ci_high[probability]"};
  for (const auto& r : records) {
    t.add_row({std::to_string(r.n), format_double(r.threshold), std::to_string(r.trials), std::to_string(r.hits),
               format_double(r.p_hat), format_double(r.ci_low), format_double(r.ci_high)});
  }
  return t;
}

nlohmann::json records_json(std::span<const DeviationRecord> records) {
  auto arr = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back({{"n", r.n},
                   {"threshold", r.threshold},
                   {"trials", r.trials},
                   {"hits", r.hits},
                   {"p_hat", r.p_hat},
                   {"ci_low", r.ci_low},
                   {"ci_high", r.ci_high}});
  }
  return arr;
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string config_hash(const nlohmann::json& resolved_config) { return hex64(fnv1a64(resolved_config.dump())); }

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  return {{"subcommand", subcommand}, {"config_hash", config_hash}, {"seed", seed},
          {"gamma", gamma},           {"started", started},         {"finished", finished},
          {"wall_seconds", wall_seconds}, {"outputs", outputs},     {"config", config}};
}

}  // namespace lsv::io
