#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swarmcalc/fit.hpp"
#include "swarmcalc/io.hpp"
#include "swarmcalc/model.hpp"

namespace swarmcalc::cli {

/// Collects what a command read and wrote, then writes the manifest.
class Recorder {
 public:
  Recorder(std::vector<std::string> argv, std::string command, CLI::App* app);

  /// SWARMCALC_SEED when set, else the flag value. The effective value is
  /// written into the replayable argv.
  std::uint64_t seed(std::uint64_t flag_value);
  void input(const std::filesystem::path& path);
  void output(const std::filesystem::path& path);
  /// Writes the manifest to `path` unless it is empty.
  void finish(const std::filesystem::path& path);

 private:
  std::vector<std::string> argv_;
  std::string command_;
  CLI::App* app_;
  std::optional<std::uint64_t> seed_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  std::chrono::system_clock::time_point start_;
  std::chrono::steady_clock::time_point tick_;
};

/// Urn profile flags shared by simulate, analyze and estimate.
struct ProfileFlags {
  std::string profile = "sine";
  double phi = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::string payoff = "1";

  void add(CLI::App* app);
  FeedbackProfile feedback(Recorder* rec = nullptr) const;
  PayoffProfile payoff_profile() const;
};

FeedbackFamily parse_family(const std::string& name);

/// "lo:hi" pair.
std::pair<double, double> parse_range(const std::string& text);
/// "a,b,c" or "lo:hi:step".
std::vector<double> parse_grid(const std::string& text);
/// name=value pairs.
std::map<std::string, double> parse_assignments(const std::vector<std::string>& items);

void print_curve(const CsvTable& table);

struct Context {
  std::vector<std::string> argv;  // arguments after the program name
};

void add_simulate(CLI::App& app, Context& ctx);
void add_analyze(CLI::App& app, Context& ctx);
void add_fit(CLI::App& app, Context& ctx);
void add_estimate(CLI::App& app, Context& ctx);
void add_scenario(CLI::App& app, Context& ctx);
void add_replay(CLI::App& app, Context& ctx);

/// Parses and runs one command line; returns the process exit code.
int run(const std::vector<std::string>& args);

}  // namespace swarmcalc::cli
