#pragma once

// CSV files and run manifests.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmcalc/revision_log.hpp"
#include "swarmcalc/urn.hpp"

namespace swarmcalc {

/// Comma-separated table with a header row. Cells are kept as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row
  std::string source;

  std::optional<std::size_t> find(const std::string& name) const;
  /// Throws std::invalid_argument when the column is missing.
  std::size_t column(const std::string& name) const;
  /// Parses a column as numbers; errors name the 1-based file line.
  std::vector<double> numbers(const std::string& name) const;
};

/// %.9g, the precision used for every float written to disk.
std::string format_number(double v);

/// Throws std::invalid_argument naming the line for ragged rows, and for an
/// empty input or a header without data rows.
CsvTable parse_csv(const std::string& text, const std::string& source = "<input>");
CsvTable read_csv(const std::filesystem::path& path);
std::string to_csv(const CsvTable& table);
/// Throws IoError when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Curve file x,y[,yerr] sorted by x.
CsvTable curve_table(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& yerr = {});
/// Histogram file phi,B,frequency sorted by phi then B.
CsvTable histogram_table(const Histogram& hist);
/// Log file s,r_b,r_r,visits with every state; the window column is added
/// when more than one log is given.
CsvTable log_table(const std::vector<RevisionLog>& logs);

/// Revision logs from a log file, one per window value. Without `n` the
/// state count is the smallest N >= 2 for which every s is a multiple of 1/N.
std::vector<RevisionLog> logs_from_table(const CsvTable& table, std::optional<int> n = std::nullopt);

/// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string file_sha256(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;  // replayable arguments with the effective seed
  std::map<std::string, std::string> options;
  std::optional<std::uint64_t> seed;
  std::string version;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  std::string started_utc;
  double elapsed_seconds = 0.0;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

const char* toolkit_version();

}  // namespace swarmcalc
