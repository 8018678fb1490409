#include <cstdlib>
#include <ctime>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "swarmcalc/errors.hpp"

namespace swarmcalc::cli {

Recorder::Recorder(std::vector<std::string> argv, std::string command, CLI::App* app)
    : argv_(std::move(argv)),
      command_(std::move(command)),
      app_(app),
      start_(std::chrono::system_clock::now()),
      tick_(std::chrono::steady_clock::now()) {}

std::uint64_t Recorder::seed(std::uint64_t flag_value) {
  std::uint64_t seed = flag_value;
  if (const char* env = std::getenv("SWARMCALC_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("SWARMCALC_SEED is not an unsigned integer: ") + env);
    }
  }
  seed_ = seed;
  bool replaced = false;
  for (std::size_t i = 0; i < argv_.size(); ++i) {
    if (argv_[i] == "--seed" && i + 1 < argv_.size()) {
      argv_[i + 1] = std::to_string(seed);
      replaced = true;
    } else if (argv_[i].rfind("--seed=", 0) == 0) {
      argv_[i] = "--seed=" + std::to_string(seed);
      replaced = true;
    }
  }
  if (!replaced) {
    argv_.push_back("--seed");
    argv_.push_back(std::to_string(seed));
  }
  return seed;
}

void Recorder::input(const std::filesystem::path& path) { inputs_.push_back(path); }
void Recorder::output(const std::filesystem::path& path) { outputs_.push_back(path); }

void Recorder::finish(const std::filesystem::path& path) {
  if (path.empty()) return;
  RunManifest m;
  m.command = command_;
  m.argv = argv_;
  m.seed = seed_;
  m.version = toolkit_version();
  std::istringstream config(app_->config_to_str(true, false));
  std::string line;
  while (std::getline(config, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.empty() || line[0] == '#' || line[0] == '[') continue;
    m.options[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const auto& p : inputs_) m.inputs[p.string()] = file_sha256(p);
  for (const auto& p : outputs_) m.outputs[p.string()] = file_sha256(p);
  const std::time_t t = std::chrono::system_clock::to_time_t(start_);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  m.started_utc = stamp;
  m.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick_).count();
  write_text(path, m.to_json());
}

void ProfileFlags::add(CLI::App* app) {
  app->add_option("--profile", profile, "sine, quad, rational, or a CSV table with columns s,P")
      ->capture_default_str();
  app->add_option("--phi", phi, "feedback intensity of the sine and quadratic profiles")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--c1", c1, "rational profile amplitude")->capture_default_str();
  app->add_option("--c2", c2, "rational profile slope")->capture_default_str();
  app->add_option("--payoff", payoff, "constant C, constant:C or sine:C1,C2")->capture_default_str();
}

FeedbackProfile ProfileFlags::feedback(Recorder* rec) const {
  if (profile == "sine") return FeedbackProfile::sine(phi);
  if (profile == "quad" || profile == "quadratic") return FeedbackProfile::quadratic(phi);
  if (profile == "rational") return FeedbackProfile::rational(c1, c2);
  const CsvTable table = read_csv(profile);
  if (rec != nullptr) rec->input(profile);
  const auto s = table.numbers(table.find("s") ? "s" : "x");
  const auto p = table.numbers(table.find("P") ? "P" : (table.find("p") ? "p" : "y"));
  return FeedbackProfile::tabulated(s, p);
}

PayoffProfile ProfileFlags::payoff_profile() const {
  auto number = [&](const std::string& text) {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("--payoff: cannot parse '" + payoff + "'");
  };
  if (payoff.rfind("sine:", 0) == 0) {
    const auto rest = payoff.substr(5);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("--payoff sine:C1,C2 needs two values");
    return PayoffProfile::sine(number(rest.substr(0, comma)), number(rest.substr(comma + 1)));
  }
  if (payoff.rfind("constant:", 0) == 0) return PayoffProfile::constant(number(payoff.substr(9)));
  return PayoffProfile::constant(number(payoff));
}

FeedbackFamily parse_family(const std::string& name) {
  if (name == "sine") return FeedbackFamily::sine;
  if (name == "quad" || name == "quadratic") return FeedbackFamily::quadratic;
  if (name == "rational") return FeedbackFamily::rational;
  throw std::invalid_argument("unknown profile family '" + name + "'");
}

namespace {

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(what + ": cannot parse '" + text + "' as a number");
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::pair<double, double> parse_range(const std::string& text) {
  const auto parts = split_on(text, ':');
  if (parts.size() != 2) throw std::invalid_argument("range '" + text + "' must look like lo:hi");
  return {to_double(parts[0], "range"), to_double(parts[1], "range")};
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split_on(text, ':');
    if (parts.size() != 3) throw std::invalid_argument("grid '" + text + "' must look like lo:hi:step");
    const double lo = to_double(parts[0], "grid");
    const double hi = to_double(parts[1], "grid");
    const double step = to_double(parts[2], "grid");
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("grid '" + text + "' is empty");
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  for (const auto& item : split_on(text, ',')) out.push_back(to_double(item, "list"));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::map<std::string, double> parse_assignments(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected name=value, got '" + item + "'");
    out[item.substr(0, eq)] = to_double(item.substr(eq + 1), item.substr(0, eq));
  }
  return out;
}

void print_curve(const CsvTable& table) { std::cout << to_csv(table); }

int run(const std::vector<std::string>& args) {
  CLI::App app{"Urn-model and swarm-performance toolkit", "swarmcalc"};
  app.set_version_flag("--version", toolkit_version());
  app.require_subcommand(1);
  Context ctx{args};
  add_simulate(app, ctx);
  add_analyze(app, ctx);
  add_fit(app, ctx);
  add_estimate(app, ctx);
  add_scenario(app, ctx);
  add_replay(app, ctx);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace swarmcalc::cli
