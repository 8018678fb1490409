#include <cmath>
#include <iostream>
#include <memory>

#include "cli.hpp"
#include "swarmcalc/estimation.hpp"

namespace swarmcalc::cli {

namespace {

struct EstimateFlags {
  std::string log;
  int n = 0;
  int window = -1;
  std::string family = "sine";
  bool predict = false;
  std::string payoff = "1";
  double pole_mask = -1.0;
  std::uint64_t min_revisions = 1;
  std::string out = "estimate-out";
};

void estimate(const EstimateFlags& f, Recorder& rec) {
  const CsvTable table = read_csv(f.log);
  rec.input(f.log);
  const auto logs = logs_from_table(table, f.n > 0 ? std::optional<int>(f.n) : std::nullopt);
  RevisionLog log(logs.front().n);
  if (f.window >= 0) {
    if (static_cast<std::size_t>(f.window) >= logs.size()) throw std::invalid_argument("--window beyond the log's windows");
    log = logs[static_cast<std::size_t>(f.window)];
  } else {
    for (const auto& l : logs) log += l;
  }

  const FeedbackEstimate est = estimate_feedback(log, {f.pole_mask, f.min_revisions});
  const std::filesystem::path dir = f.out;
  std::filesystem::create_directories(dir);

  CsvTable out;
  out.header = {"x", "y", "yerr", "marker"};
  for (const auto& pt : est.points) {
    const double lever = std::abs(2.0 * pt.s - 1.0);
    const bool defined = pt.marker == EstimateMarker::defined;
    const double err = defined ? std::sqrt(pt.ratio * (1.0 - pt.ratio) / static_cast<double>(pt.revisions)) / lever
                               : std::nan("");
    std::string marker = to_string(pt.marker);
    if (defined && pt.high_variance) marker = "high-variance";
    out.rows.push_back({format_number(pt.s), format_number(pt.p), format_number(err), marker});
  }
  write_csv(dir / "feedback.csv", out);
  rec.output(dir / "feedback.csv");

  const auto [profile, fit] = fit_feedback_profile(est, parse_family(f.family));
  require_converged(fit);
  const std::string table_text = format_fit_table(fit);
  std::cout << table_text;
  write_text(dir / "fit.txt", table_text);
  rec.output(dir / "fit.txt");

  if (f.predict) {
    ProfileFlags pf;
    pf.payoff = f.payoff;
    const auto pi = predict_steady_state(profile, pf.payoff_profile(), log.n);
    std::vector<double> x(pi.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = static_cast<double>(k);
    write_csv(dir / "steady_state.csv", curve_table(x, pi));
    rec.output(dir / "steady_state.csv");
  }
  rec.finish(dir / "manifest.json");
}

}  // namespace

void add_estimate(CLI::App& app, Context& ctx) {
  auto flags = std::make_shared<EstimateFlags>();
  auto* sub = app.add_subcommand("estimate", "Feedback probability from revision logs");
  sub->add_option("--log", flags->log, "log file s,r_b,r_r,visits[,window]")->required();
  sub->add_option("--n", flags->n, "state count (inferred from s when omitted)");
  sub->add_option("--window", flags->window, "use one window instead of pooling all");
  sub->add_option("--family", flags->family, "sine, quadratic or rational")
      ->check(CLI::IsMember({"sine", "quad", "quadratic", "rational"}))
      ->capture_default_str();
  sub->add_flag("--predict-steady-state", flags->predict, "write the steady state of the fitted profile");
  sub->add_option("--payoff", flags->payoff, "payoff used for the prediction")->capture_default_str();
  sub->add_option("--pole-mask", flags->pole_mask, "half width around s=0.5 excluded from the fit (default 1.5/N)");
  sub->add_option("--min-revisions", flags->min_revisions, "fewer revisions mark a state insufficient")
      ->capture_default_str();
  sub->add_option("--out", flags->out, "output directory")->capture_default_str();
  sub->callback([flags, sub, &ctx] {
    Recorder rec(ctx.argv, "estimate", sub);
    estimate(*flags, rec);
  });
}

}  // namespace swarmcalc::cli
