#include "swarmcalc/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "swarmcalc/errors.hpp"

#ifndef SWARMCALC_VERSION
#define SWARMCALC_VERSION "0.0.0"
#endif

namespace swarmcalc {

const char* toolkit_version() { return SWARMCALC_VERSION; }

namespace {

std::string trim(std::string_view v) {
  const auto first = v.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = v.find_last_not_of(" \t\r");
  return std::string(v.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// s is stored with 9 significant digits.
double multiple_tolerance(int n) { return std::max(1e-6, 2e-9 * n); }

std::optional<double> to_number(const std::string& cell) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    // from_chars rejects a leading '+', which other tools emit.
    if (!cell.empty() && cell[0] == '+') return to_number(cell.substr(1));
    return std::nullopt;
  }
  return v;
}

}  // namespace

std::optional<std::size_t> CsvTable::find(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

std::size_t CsvTable::column(const std::string& name) const {
  if (auto c = find(name)) return *c;
  throw std::invalid_argument(source + ": missing column '" + name + "'");
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto v = to_number(rows[i][c]);
    if (!v) {
      std::ostringstream msg;
      msg << source << ":" << (i < lines.size() ? lines[i] : i + 2) << ": column '" << name << "' value '"
          << rows[i][c] << "' is not a number";
      throw std::invalid_argument(msg.str());
    }
    out.push_back(*v);
  }
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  t.source = source;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    auto cells = split(content);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": expected " << t.header.size() << " fields, found " << cells.size();
      throw std::invalid_argument(msg.str());
    }
    t.rows.push_back(std::move(cells));
    t.lines.push_back(line_no);
  }
  if (t.header.empty()) throw std::invalid_argument(source + ": empty CSV");
  if (t.rows.empty()) throw std::invalid_argument(source + ": header but no data rows");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path.string());
  return parse_csv(text, path.string());
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) { write_text(path, to_csv(table)); }

CsvTable curve_table(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& yerr) {
  if (x.size() != y.size() || (!yerr.empty() && yerr.size() != x.size())) {
    throw std::invalid_argument("curve: column lengths differ");
  }
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  CsvTable t;
  t.header = yerr.empty() ? std::vector<std::string>{"x", "y"} : std::vector<std::string>{"x", "y", "yerr"};
  for (std::size_t i : order) {
    std::vector<std::string> row{format_number(x[i]), format_number(y[i])};
    if (!yerr.empty()) row.push_back(format_number(yerr[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable histogram_table(const Histogram& hist) {
  std::vector<std::size_t> order(hist.phis.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return hist.phis[i] < hist.phis[j]; });
  CsvTable t;
  t.header = {"phi", "B", "frequency"};
  for (std::size_t j : order) {
    for (int b = 0; b <= hist.n; ++b) {
      t.rows.push_back({format_number(hist.phis[j]), std::to_string(b), format_number(hist.columns[j][b])});
    }
  }
  return t;
}

CsvTable log_table(const std::vector<RevisionLog>& logs) {
  CsvTable t;
  const bool windowed = logs.size() > 1;
  t.header = {"s", "r_b", "r_r", "visits"};
  if (windowed) t.header.push_back("window");
  // Rows sorted by s, then by window.
  const std::size_t states = logs.empty() ? 0 : logs.front().states();
  for (std::size_t k = 0; k < states; ++k) {
    for (std::size_t w = 0; w < logs.size(); ++w) {
      const auto& log = logs[w];
      std::vector<std::string> row{format_number(static_cast<double>(k) / log.n), std::to_string(log.r_b[k]),
                                   std::to_string(log.r_r[k]), std::to_string(log.visits[k])};
      if (windowed) row.push_back(std::to_string(w));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

std::vector<RevisionLog> logs_from_table(const CsvTable& table, std::optional<int> n) {
  const auto s = table.numbers("s");
  const auto rb = table.numbers("r_b");
  const auto rr = table.numbers("r_r");
  const auto visits = table.numbers("visits");
  std::vector<double> window(s.size(), 0.0);
  if (table.find("window")) window = table.numbers("window");

  auto row_error = [&](std::size_t i, const std::string& what) {
    std::ostringstream msg;
    msg << table.source << ":" << table.lines[i] << ": " << what;
    return std::invalid_argument(msg.str());
  };
  auto count = [&](double v, std::size_t i) {
    if (!(v >= 0.0) || v != std::floor(v)) throw row_error(i, "counts must be nonnegative integers");
    return static_cast<std::uint64_t>(v);
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] >= 0.0 && s[i] <= 1.0)) throw row_error(i, "s outside [0, 1]");
    if (!(window[i] >= 0.0) || window[i] != std::floor(window[i])) throw row_error(i, "window must be a nonnegative integer");
  }

  int states = 0;
  if (n) {
    states = *n;
  } else {
    for (int cand = 2; cand <= 1'000'000 && states == 0; ++cand) {
      const bool fits = std::all_of(s.begin(), s.end(), [&](double v) {
        return std::abs(v * cand - std::round(v * cand)) < multiple_tolerance(cand);
      });
      if (fits) states = cand;
    }
    if (states == 0) throw std::invalid_argument(table.source + ": cannot infer the state count from s");
  }
  if (states < 2) throw std::invalid_argument(table.source + ": state count must be at least 2");

  const auto windows = static_cast<std::size_t>(*std::max_element(window.begin(), window.end())) + 1;
  std::vector<RevisionLog> logs(windows, RevisionLog(states));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double k_real = s[i] * states;
    const auto k = static_cast<std::size_t>(std::lround(k_real));
    if (std::abs(k_real - static_cast<double>(k)) > multiple_tolerance(states)) throw row_error(i, "s is not a multiple of 1/N");
    auto& log = logs[static_cast<std::size_t>(window[i])];
    log.r_b[k] += count(rb[i], i);
    log.r_r[k] += count(rr[i], i);
    log.visits[k] += count(visits[i], i);
  }
  for (const auto& log : logs) log.validate();
  return logs;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256 unavailable");
  }
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char pair[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(pair, sizeof pair, "%02x", digest[i]);
    hex += pair;
  }
  return hex;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["argv"] = argv;
  j["options"] = options;
  j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
  j["version"] = version;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["started_utc"] = started_utc;
  j["elapsed_seconds"] = elapsed_seconds;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    if (j.contains("options")) m.options = j.at("options").get<std::map<std::string, std::string>>();
    if (j.contains("seed") && !j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.value("version", "");
    if (j.contains("inputs")) m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    if (j.contains("outputs")) m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.started_utc = j.value("started_utc", "");
    m.elapsed_seconds = j.value("elapsed_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  return m;
}

}  // namespace swarmcalc
