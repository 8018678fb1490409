#include <iostream>
#include <memory>

#include "cli.hpp"
#include "swarmcalc/urn.hpp"

namespace swarmcalc::cli {

namespace {

struct SimulateFlags {
  ProfileFlags profile;
  int n = 64;
  long long steps = 2000;
  std::uint64_t seed = 1;
  std::size_t replicates = 10000;
  std::string init = "center";
  std::string phis;
  std::uint64_t samples = 0;
  std::string out = "simulate-out";
};

void simulate(const SimulateFlags& f, Recorder& rec) {
  const std::uint64_t seed = rec.seed(f.seed);
  const FeedbackProfile feedback = f.profile.feedback(&rec);
  SimConfig config{DriftSpec(feedback, f.profile.payoff_profile(), f.n), f.steps, seed, InitialCount::center(),
                   f.replicates};
  if (f.init != "center") {
    try {
      config.init = InitialCount::at(std::stoi(f.init));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("--init must be an integer or 'center'");
    }
  }
  config.validate();

  const std::filesystem::path dir = f.out;
  std::filesystem::create_directories(dir);

  const auto traj = run_trajectory(config, 0);
  std::vector<double> t(traj.size());
  std::vector<double> b(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    t[i] = static_cast<double>(i);
    b[i] = traj[i];
  }
  write_csv(dir / "trajectory.csv", curve_table(t, b));
  rec.output(dir / "trajectory.csv");

  std::vector<double> phis = f.phis.empty() ? std::vector<double>{} : parse_grid(f.phis);
  Histogram hist;
  if (phis.empty()) {
    // Histogram of the profile as given, labelled with --phi.
    const auto finals = final_states(config);
    hist.phis = {f.profile.phi};
    hist.n = f.n;
    std::vector<double> col(static_cast<std::size_t>(f.n) + 1, 0.0);
    for (int v : finals) col[v] += 1.0 / static_cast<double>(finals.size());
    hist.columns.push_back(col);
  } else {
    hist = ensemble_histogram(feedback.family(), phis, config);
  }
  write_csv(dir / "histogram.csv", histogram_table(hist));
  rec.output(dir / "histogram.csv");

  write_csv(dir / "log.csv", log_table({record_revisions(config)}));
  rec.output(dir / "log.csv");

  if (f.samples > 0) {
    const auto drift_rows = measure_drift(config, f.samples);
    std::vector<double> s;
    std::vector<double> mean;
    std::vector<double> se;
    for (const auto& d : drift_rows) {
      s.push_back(d.s);
      mean.push_back(d.mean);
      se.push_back(d.std_error);
    }
    write_csv(dir / "drift.csv", curve_table(s, mean, se));
    rec.output(dir / "drift.csv");
  }
  rec.finish(dir / "manifest.json");
  std::cout << "wrote " << dir.string() << "\n";
}

}  // namespace

void add_simulate(CLI::App& app, Context& ctx) {
  auto flags = std::make_shared<SimulateFlags>();
  auto* sub = app.add_subcommand("simulate", "Urn trajectories, final-state histograms and revision logs");
  flags->profile.add(sub);
  sub->add_option("--n", flags->n, "marbles")->check(CLI::Range(2, 1'000'000))->capture_default_str();
  sub->add_option("--steps", flags->steps, "rounds per replicate")->check(CLI::NonNegativeNumber)->capture_default_str();
  sub->add_option("--seed", flags->seed, "base seed (SWARMCALC_SEED overrides)")->capture_default_str();
  sub->add_option("--replicates", flags->replicates, "independent replicates")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--init", flags->init, "initial blue count, or 'center' for N/2 and N/2+1")->capture_default_str();
  sub->add_option("--phis", flags->phis, "intensity grid for the histogram scan, lo:hi:step or a,b,c");
  sub->add_option("--samples-per-state", flags->samples, "also measure single-round drift with this many samples");
  sub->add_option("--out", flags->out, "output directory")->capture_default_str();
  sub->callback([flags, sub, &ctx] {
    Recorder rec(ctx.argv, "simulate", sub);
    simulate(*flags, rec);
  });
}

}  // namespace swarmcalc::cli
