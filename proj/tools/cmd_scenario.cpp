#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>

#include "cli.hpp"
#include "swarmcalc/density.hpp"
#include "swarmcalc/errors.hpp"

namespace swarmcalc::cli {

namespace {

struct ScenarioFlags {
  int agents = 100;
  long long steps = 10000;
  std::uint64_t seed = 1;
  double recognition = 0.8;
  std::string windows = "1000";
  std::string mixing = "well-mixed";
  int width = 64;
  int height = 64;
  double radius = 12.0;
  std::string failure = "drop";
  std::string placement = "uniform";
  double initial_red = 0.5;
  std::size_t runs = 1;
  std::string s0_range;
  long long stride = 1;
  std::uint64_t min_revisions = 5;
  std::string out_dir = "scenario-out";
};

void scenario(const ScenarioFlags& f, Recorder& rec) {
  ScenarioConfig c;
  c.agents = f.agents;
  c.steps = f.steps;
  c.seed = rec.seed(f.seed);
  c.recognition_rate = f.recognition;
  c.mixing = f.mixing == "grid" ? Mixing::grid : Mixing::well_mixed;
  c.grid = {f.width, f.height, f.radius};
  c.failure = f.failure == "misread" ? RecognitionFailure::misread : RecognitionFailure::drop;
  c.placement = f.placement == "segregated" ? Placement::segregated : Placement::uniform;
  c.initial_red = f.initial_red;
  if (f.windows.find(',') != std::string::npos) {
    for (double e : parse_grid(f.windows)) c.window_edges.push_back(static_cast<long long>(e));
  } else {
    c.window_length = static_cast<long long>(parse_grid(f.windows).front());
  }
  c.validate();
  double lo = f.initial_red;
  double hi = f.initial_red;
  if (!f.s0_range.empty()) std::tie(lo, hi) = parse_range(f.s0_range);
  if (f.runs < 1) throw std::invalid_argument("--runs must be at least 1");
  if (f.stride < 1) throw std::invalid_argument("--stride must be at least 1");

  const std::filesystem::path dir = f.out_dir;
  std::filesystem::create_directories(dir);

  const ScenarioConfig first = f.runs == 1 && f.s0_range.empty() ? c : ensemble_member(c, 0, lo, hi);
  const DcRun run0 = dc_run(first);
  std::vector<double> t;
  std::vector<double> s;
  for (std::size_t i = 0; i < run0.red.size(); i += static_cast<std::size_t>(f.stride)) {
    t.push_back(static_cast<double>(i));
    s.push_back(static_cast<double>(run0.red[i]) / c.agents);
  }
  write_csv(dir / "trajectory.csv", curve_table(t, s));
  rec.output(dir / "trajectory.csv");

  DcEnsemble ens{run0.edges, run0.logs};
  if (f.runs > 1 || !f.s0_range.empty()) ens = dc_ensemble(c, f.runs, lo, hi);
  write_csv(dir / "logs.csv", log_table(ens.logs));
  rec.output(dir / "logs.csv");

  const auto series = feedback_timeseries(dc_drift_windows(ens.edges, ens.logs, f.min_revisions));
  CsvTable phi;
  phi.header = {"t", "phi", "phi_err", "c2", "c2_err", "rms", "dof", "status"};
  for (const auto& pt : series.points) {
    phi.rows.push_back({format_number(pt.t), format_number(pt.phi), format_number(pt.phi_std_error),
                        format_number(pt.c2), format_number(pt.c2_std_error), format_number(pt.rms),
                        std::to_string(pt.dof), pt.ok ? (pt.phi_at_bound ? "at-bound" : "ok") : "skipped"});
  }
  write_csv(dir / "phi.csv", phi);
  rec.output(dir / "phi.csv");

  const Dataset growth = series.growth_dataset();
  if (growth.weighted_rows() >= 3) {
    try {
      std::cout << format_fit_table(fit_feedback_growth(growth));
    } catch (const std::exception& e) {
      std::cerr << "feedback-growth fit failed: " << e.what() << "\n";
    }
  } else {
    std::cerr << "too few weighted windows for the feedback-growth fit\n";
  }
  rec.finish(dir / "manifest.json");
}

struct ReplayFlags {
  std::string manifest;
};

void replay(const ReplayFlags& f) {
  std::ifstream in(f.manifest);
  if (!in) throw IoError("cannot open " + f.manifest);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const RunManifest m = RunManifest::from_json(text);
  ::unsetenv("SWARMCALC_SEED");
  const int code = run(m.argv);
  if (code == 2) throw std::invalid_argument("replayed command rejected its arguments");
  if (code == 3) throw IoError("replayed command failed on I/O");
  if (code != 0) throw NumericalError("replayed command failed");
  std::size_t mismatches = 0;
  for (const auto& [path, digest] : m.outputs) {
    const std::string now = file_sha256(path);
    if (now != digest) {
      ++mismatches;
      std::cerr << "differs: " << path << "\n";
    }
  }
  if (mismatches > 0) throw NumericalError(std::to_string(mismatches) + " output file(s) differ from the manifest");
  std::cout << "replay reproduced " << m.outputs.size() << " output file(s)\n";
}

}  // namespace

void add_scenario(CLI::App& app, Context& ctx) {
  auto flags = std::make_shared<ScenarioFlags>();
  auto* sub = app.add_subcommand("scenario-dc", "Density-classification agents with windowed revision logs");
  sub->add_option("--agents", flags->agents, "agents")->check(CLI::Range(2, 1'000'000))->capture_default_str();
  sub->add_option("--steps", flags->steps, "encounters")->check(CLI::NonNegativeNumber)->capture_default_str();
  sub->add_option("--seed", flags->seed, "base seed (SWARMCALC_SEED overrides)")->capture_default_str();
  sub->add_option("--recognition", flags->recognition, "recognition rate")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--windows", flags->windows, "window length, or edges 0,e1,...,steps")->capture_default_str();
  sub->add_option("--mixing", flags->mixing, "well-mixed or grid")
      ->check(CLI::IsMember({"well-mixed", "grid"}))
      ->capture_default_str();
  sub->add_option("--width", flags->width, "grid width")->capture_default_str();
  sub->add_option("--height", flags->height, "grid height")->capture_default_str();
  sub->add_option("--radius", flags->radius, "vision radius on the grid")->capture_default_str();
  sub->add_option("--failure", flags->failure, "drop or misread")->check(CLI::IsMember({"drop", "misread"}))->capture_default_str();
  sub->add_option("--placement", flags->placement, "uniform or segregated")
      ->check(CLI::IsMember({"uniform", "segregated"}))
      ->capture_default_str();
  sub->add_option("--initial-red", flags->initial_red, "initial red fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--runs", flags->runs, "independent runs pooled into the logs")->capture_default_str();
  sub->add_option("--s0-range", flags->s0_range, "lo:hi, initial red fraction drawn per run");
  sub->add_option("--stride", flags->stride, "trajectory sampling stride")->capture_default_str();
  sub->add_option("--min-revisions", flags->min_revisions, "revisions needed for a state to enter the drift fit")
      ->capture_default_str();
  sub->add_option("--out-dir", flags->out_dir, "output directory")->capture_default_str();
  sub->callback([flags, sub, &ctx] {
    Recorder rec(ctx.argv, "scenario-dc", sub);
    scenario(*flags, rec);
  });
}

void add_replay(CLI::App& app, Context&) {
  auto flags = std::make_shared<ReplayFlags>();
  auto* sub = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  sub->add_option("manifest", flags->manifest, "manifest.json")->required();
  sub->callback([flags] { replay(*flags); });
}

}  // namespace swarmcalc::cli
