#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "swarmcalc/io.hpp"

using namespace swarmcalc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "swarmcalc_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("version and usage errors") {
  CHECK(call({"--version"}).code == 0);
  CHECK(call({}).code == 2);
  CHECK(call({"no-such-command"}).code == 2);
  CHECK(call({"simulate", "--n", "1"}).code == 2);
  CHECK(call({"simulate", "--payoff", "sine:1"}).code == 2);
}

TEST_CASE("simulate writes reproducible outputs and a manifest") {
  ::unsetenv("SWARMCALC_SEED");
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  const std::vector<std::string> base{"simulate", "--n", "16", "--steps", "300", "--replicates", "10", "--phi", "0.75",
                                      "--seed", "5"};
  auto args_a = base;
  args_a.insert(args_a.end(), {"--out", a.string()});
  auto args_b = base;
  args_b.insert(args_b.end(), {"--out", b.string()});
  REQUIRE(call(args_a).code == 0);
  REQUIRE(call(args_b).code == 0);
  for (const char* f : {"trajectory.csv", "histogram.csv", "log.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(file_sha256(a / f) == file_sha256(b / f));
  }
  const auto m = RunManifest::from_json(slurp(a / "manifest.json"));
  CHECK(m.command == "simulate");
  CHECK(m.seed == 5u);
  CHECK(m.outputs.size() == 3);
  CHECK(m.version == toolkit_version());

  // Replay reproduces the digests.
  CHECK(call({"replay", (a / "manifest.json").string()}).code == 0);
  // Replay regenerates the outputs, so a damaged file is restored.
  write_text(a / "log.csv", "s,r_b,r_r,visits\n0,0,0,0\n");
  CHECK(call({"replay", (a / "manifest.json").string()}).code == 0);
  CHECK(file_sha256(a / "log.csv") == file_sha256(b / "log.csv"));

  // The seed environment variable wins and is recorded.
  const fs::path c = scratch("sim_c");
  ::setenv("SWARMCALC_SEED", "7", 1);
  auto args_c = base;
  args_c.insert(args_c.end(), {"--out", c.string()});
  REQUIRE(call(args_c).code == 0);
  ::unsetenv("SWARMCALC_SEED");
  const auto mc = RunManifest::from_json(slurp(c / "manifest.json"));
  CHECK(mc.seed == 7u);
  CHECK(file_sha256(c / "trajectory.csv") != file_sha256(b / "trajectory.csv"));
  CHECK(call({"replay", (c / "manifest.json").string()}).code == 0);
}

TEST_CASE("replay detects changed outputs") {
  ::unsetenv("SWARMCALC_SEED");
  const fs::path d = scratch("replay");
  REQUIRE(call({"simulate", "--n", "8", "--steps", "50", "--replicates", "2", "--out", d.string()}).code == 0);
  auto m = RunManifest::from_json(slurp(d / "manifest.json"));
  m.outputs.begin()->second = std::string(64, '0');
  write_text(d / "manifest.json", m.to_json());
  CHECK(call({"replay", (d / "manifest.json").string()}).code == 4);
  CHECK(call({"replay", (d / "missing.json").string()}).code == 3);
}

TEST_CASE("analyze prints exact curves") {
  const auto ss = call({"analyze", "steady-state", "--phi", "0", "--n", "4"});
  REQUIRE(ss.code == 0);
  const auto t = parse_csv(ss.out);
  const auto y = t.numbers("y");
  const std::vector<double> binom{1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
  REQUIRE(y.size() == 5);
  for (int k = 0; k < 5; ++k) CHECK(std::abs(y[k] - binom[k]) < 1e-9);

  const auto mf = call({"analyze", "mfpt", "--n", "2", "--target", "2", "--phi", "0"});
  REQUIRE(mf.code == 0);
  CHECK(parse_csv(mf.out).numbers("y")[0] == doctest::Approx(4.0));

  const auto sp = call({"analyze", "splitting", "--n", "16", "--phi", "0.1", "--method", "exact", "--a", "2", "--b", "14"});
  REQUIRE(sp.code == 0);
  const auto s = parse_csv(sp.out).numbers("y");
  CHECK(s.front() == 0.0);
  CHECK(s.back() == 1.0);

  CHECK(call({"analyze", "mfpt", "--n", "4", "--target", "9"}).code == 2);
}

TEST_CASE("fit reads data files") {
  const fs::path d = scratch("fit");
  std::ostringstream csv;
  csv << "x,y\n";
  for (int n = 1; n <= 55; ++n) csv << n << "," << 0.00248537 * std::pow(n, 1.23745) * std::exp(-0.199589 * n) << "\n";
  write_text(d / "t1.csv", csv.str());
  const auto r = call({"fit", "performance", "--data", (d / "t1.csv").string(), "--out", (d / "curve.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("degrees of freedom            : 52") != std::string::npos);
  CHECK(r.out.find("A               = 0.00248537") != std::string::npos);
  CHECK(fs::exists(d / "curve.csv"));
  CHECK(call({"fit", "performance", "--data", (d / "none.csv").string()}).code == 3);
  CHECK(call({"fit", "performance", "--data", (d / "t1.csv").string(), "--fix", "zz=1"}).code == 2);
}

TEST_CASE("estimate exit codes") {
  const fs::path d = scratch("estimate");
  CHECK(call({"estimate", "--log", (d / "missing.csv").string()}).code == 3);
  // Only the pole is observed: nothing to fit.
  write_text(d / "pole.csv", "s,r_b,r_r,visits\n0.5,10,10,20\n");
  CHECK(call({"estimate", "--log", (d / "pole.csv").string(), "--n", "8", "--out", d.string()}).code == 4);
  write_text(d / "ragged.csv", "s,r_b,r_r,visits\n0.5,10,10\n");
  const auto r = call({"estimate", "--log", (d / "ragged.csv").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find(":2") != std::string::npos);
}

TEST_CASE("scenario with no recognition") {
  ::unsetenv("SWARMCALC_SEED");
  const fs::path d = scratch("scenario");
  const auto r = call({"scenario-dc", "--agents", "20", "--steps", "2000", "--recognition", "0", "--windows", "500",
                       "--out-dir", d.string()});
  REQUIRE(r.code == 0);
  const auto logs = logs_from_table(read_csv(d / "logs.csv"));
  CHECK(logs.size() == 4);
  for (const auto& log : logs) CHECK(log.total_revisions() == 0);
  const auto phi = read_csv(d / "phi.csv");
  for (const auto& row : phi.rows) CHECK(row[phi.column("status")] == "skipped");
  CHECK(call({"replay", (d / "manifest.json").string()}).code == 0);
}
