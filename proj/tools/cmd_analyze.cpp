#include <cmath>
#include <iostream>
#include <memory>

#include "cli.hpp"
#include "swarmcalc/markov.hpp"

namespace swarmcalc::cli {

namespace {

struct AnalyzeFlags {
  ProfileFlags profile;
  int n = 64;
  int a = -1;
  int b = -1;
  int target = -1;
  int from = -1;
  std::string method = "diffusion";
  std::string n_range = "10:30";
  std::string out;
};

void emit(const CsvTable& table, const std::string& out, Recorder& rec) {
  if (out.empty()) {
    print_curve(table);
    return;
  }
  write_csv(out, table);
  rec.output(out);
  rec.finish(out + ".manifest.json");
}

std::vector<double> states(std::size_t count) {
  std::vector<double> x(count);
  for (std::size_t k = 0; k < count; ++k) x[k] = static_cast<double>(k);
  return x;
}

DriftSpec spec_of(const AnalyzeFlags& f, Recorder& rec, int n) {
  return DriftSpec(f.profile.feedback(&rec), f.profile.payoff_profile(), n);
}

void steady(const AnalyzeFlags& f, Recorder& rec) {
  const auto pi = steady_state(build_transition(spec_of(f, rec, f.n)));
  emit(curve_table(states(pi.size()), pi), f.out, rec);
}

void splitting(const AnalyzeFlags& f, Recorder& rec) {
  const auto t = build_transition(spec_of(f, rec, f.n));
  const auto pi = steady_state(t);
  int a = f.a;
  int b = f.b;
  if (a < 0 || b < 0) {
    auto peaks = distribution_peaks(pi);
    if (peaks.size() < 2) throw std::invalid_argument("splitting: steady state has one peak; give --a and --b");
    a = std::min(peaks[0], peaks[1]);
    b = std::max(peaks[0], peaks[1]);
  }
  const auto diffusion = splitting_probability(pi, a, b);
  const auto exact = splitting_exact(t, a, b);
  double gap = 0.0;
  for (std::size_t i = 0; i < diffusion.sigma.size(); ++i) gap = std::max(gap, std::abs(diffusion.sigma[i] - exact.sigma[i]));
  std::cerr << "a=" << a << " b=" << b << " sup|diffusion-exact|=" << format_number(gap) << "\n";
  const auto& curve = f.method == "exact" ? exact : diffusion;
  std::vector<double> x;
  for (int k = a; k <= b; ++k) x.push_back(k);
  emit(curve_table(x, curve.sigma), f.out, rec);
}

void passage(const AnalyzeFlags& f, Recorder& rec) {
  if (f.target < 0 || f.target > f.n) throw std::invalid_argument("mfpt: --target must lie in [0, N]");
  const auto t = mfpt(build_transition(spec_of(f, rec, f.n)), f.target);
  if (f.from >= 0) {
    if (f.from > f.n) throw std::invalid_argument("mfpt: --from must lie in [0, N]");
    std::cerr << "t(" << f.from << ")=" << format_number(t[f.from]) << "\n";
  }
  emit(curve_table(states(t.size()), t), f.out, rec);
}

void switch_times(const AnalyzeFlags& f, Recorder& rec) {
  const auto [lo, hi] = parse_range(f.n_range);
  std::vector<double> ns;
  std::vector<double> taus;
  for (int n = static_cast<int>(lo); n <= static_cast<int>(hi); ++n) {
    const DriftSpec spec = spec_of(f, rec, n);
    const auto roots = drift_roots(spec);
    if (roots.size() < 3) throw std::invalid_argument("switch-times: profile has no pair of stable states");
    ns.push_back(n);
    taus.push_back(switching_time(spec, roots.front(), roots.back()));
  }
  emit(curve_table(ns, taus), f.out, rec);
}

}  // namespace

void add_analyze(CLI::App& app, Context& ctx) {
  auto* analyze = app.add_subcommand("analyze", "Exact Markov-chain analysis of the urn");
  analyze->require_subcommand(1);

  auto add = [&](const std::string& name, const std::string& help, auto body, auto extra) {
    auto flags = std::make_shared<AnalyzeFlags>();
    auto* sub = analyze->add_subcommand(name, help);
    flags->profile.add(sub);
    sub->add_option("--n", flags->n, "marbles")->check(CLI::Range(2, 1'000'000))->capture_default_str();
    sub->add_option("--out", flags->out, "output curve file (stdout when omitted)");
    extra(sub, *flags);
    sub->callback([flags, sub, name, body, &ctx] {
      Recorder rec(ctx.argv, "analyze " + name, sub);
      body(*flags, rec);
    });
  };

  add("steady-state", "stationary distribution pi(B)", steady, [](CLI::App*, AnalyzeFlags&) {});
  add("splitting", "probability of reaching b before a", splitting, [](CLI::App* sub, AnalyzeFlags& f) {
    sub->add_option("--a", f.a, "lower state (default: lower steady-state peak)");
    sub->add_option("--b", f.b, "upper state (default: upper steady-state peak)");
    sub->add_option("--method", f.method, "diffusion (from the steady state) or exact")
        ->check(CLI::IsMember({"diffusion", "exact"}))
        ->capture_default_str();
  });
  add("mfpt", "mean first passage times to a target state", passage, [](CLI::App* sub, AnalyzeFlags& f) {
    sub->add_option("--target", f.target, "target state")->required();
    sub->add_option("--from", f.from, "also report the time from this state");
  });
  add("switch-times", "passage time between the outer drift roots over a range of N", switch_times,
      [](CLI::App* sub, AnalyzeFlags& f) {
        sub->add_option("--n-range", f.n_range, "lo:hi")->capture_default_str();
      });
}

}  // namespace swarmcalc::cli
