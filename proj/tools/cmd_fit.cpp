#include <iostream>
#include <memory>

#include "cli.hpp"

namespace swarmcalc::cli {

namespace {

struct FitFlags {
  std::string data;
  std::string random_data;
  std::string weights;
  std::vector<std::string> fix;
  std::vector<std::string> init;
  std::string range;
  std::string out;
};

Dataset load(const std::string& path, const std::string& weights, bool growth, Recorder& rec) {
  const CsvTable table = read_csv(path);
  rec.input(path);
  Dataset d = Dataset::from(table.numbers("x"), table.numbers("y"));
  d.name = path;
  if (!weights.empty()) {
    std::vector<double> w;
    if (table.find(weights)) {
      w = table.numbers(weights);
    } else {
      const CsvTable wt = read_csv(weights);
      rec.input(weights);
      w = wt.numbers(wt.find("w") ? "w" : wt.header.front());
      if (w.size() != d.size()) throw std::invalid_argument(weights + ": weight count differs from data rows");
    }
    for (std::size_t i = 0; i < w.size(); ++i) d.rows[i].w = w[i];
  } else if (table.find("w")) {
    const auto w = table.numbers("w");
    for (std::size_t i = 0; i < w.size(); ++i) d.rows[i].w = w[i];
  } else if (growth) {
    for (auto& r : d.rows) r.w = growth_weight(r.x);
  }
  d.validate();
  return d;
}

FitResult run_model(ModelSpec model, const Dataset& data, const FitFlags& f) {
  apply_overrides(model, parse_assignments(f.init), parse_assignments(f.fix));
  FitResult r = levenberg_marquardt(model, data);
  require_converged(r);
  std::cout << format_fit_table(r);
  return r;
}

void write_fitted(const ModelSpec& model, const FitResult& r, const Dataset& data, const FitFlags& f, Recorder& rec) {
  if (f.out.empty()) return;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& row : data.rows) {
    x.push_back(row.x);
    y.push_back(evaluate(model, r, row.x));
  }
  write_csv(f.out, curve_table(x, y));
  rec.output(f.out);
  rec.finish(f.out + ".manifest.json");
}

}  // namespace

void add_fit(CLI::App& app, Context& ctx) {
  auto* fit = app.add_subcommand("fit", "Weighted Levenberg-Marquardt fits of the model curves");
  fit->require_subcommand(1);

  auto add = [&](const std::string& name, const std::string& help, auto body) {
    auto flags = std::make_shared<FitFlags>();
    auto* sub = fit->add_subcommand(name, help);
    sub->add_option("--data", flags->data, "CSV with columns x,y[,w]")->required();
    sub->add_option("--weights", flags->weights, "weight column name, or a CSV file with a w column");
    sub->add_option("--fix", flags->fix, "name=value, held fixed");
    sub->add_option("--init", flags->init, "name=value, initial guess");
    sub->add_option("--out", flags->out, "fitted curve file");
    sub->add_flag("--gnuplot-table", "print the fit table (always on)");
    if (name == "staged") {
      sub->add_option("--random-data", flags->random_data, "interference data for the first stage")->required();
    }
    if (name == "narrow") sub->add_option("--range", flags->range, "lo:hi interval of the fit")->required();
    sub->callback([flags, sub, name, body, &ctx] {
      Recorder rec(ctx.argv, "fit " + name, sub);
      body(*flags, rec);
    });
  };

  add("performance", "P(x) = A x^b exp(c x)", [](const FitFlags& f, Recorder& rec) {
    const Dataset d = load(f.data, f.weights, false, rec);
    if (d.size() < 4) throw std::invalid_argument("performance fit needs at least 4 rows");
    const ModelSpec model = performance_model(d);
    write_fitted(model, run_model(model, d, f), d, f, rec);
  });
  add("staged", "interference first, then cooperation with a2 and c fixed", [](const FitFlags& f, Recorder& rec) {
    const Dataset random = load(f.random_data, "", false, rec);
    const Dataset full = load(f.data, f.weights, false, rec);
    std::cout << "stage 1\n";
    FitFlags first;
    const FitResult i = run_model(interference_model(random), random, first);
    std::cout << "\nstage 2\n";
    const ModelSpec model = cooperation_model(full, i.value("a2"), i.value("c"));
    write_fitted(model, run_model(model, full, f), full, f, rec);
  });
  add("narrow", "cooperation fit restricted to an interval", [](const FitFlags& f, Recorder& rec) {
    const auto [lo, hi] = parse_range(f.range);
    const auto fixed = parse_assignments(f.fix);
    if (!fixed.count("a2") || !fixed.count("c")) throw std::invalid_argument("narrow fit needs --fix a2=... c=...");
    const Dataset all = load(f.data, f.weights, false, rec);
    const Dataset d = all.restricted(lo, hi);
    if (d.weighted_rows() < 3) throw std::invalid_argument("narrow fit needs at least 3 weighted rows in the range");
    const ModelSpec model = cooperation_model(d, fixed.at("a2"), fixed.at("c"));
    write_fitted(model, run_model(model, d, f), all, f, rec);
  });
  add("switch-times", "tau(N) = A N^b exp(c N)", [](const FitFlags& f, Recorder& rec) {
    const Dataset d = load(f.data, f.weights, false, rec);
    if (d.size() < 4) throw std::invalid_argument("switching-time fit needs at least 4 rows");
    const ModelSpec model = switch_time_model(d);
    write_fitted(model, run_model(model, d, f), d, f, rec);
  });
  add("feedback-growth", "phi(t) = a - exp(b t); default weights 0 before t=700, 2 from t=3000",
      [](const FitFlags& f, Recorder& rec) {
        const Dataset d = load(f.data, f.weights, true, rec);
        if (d.weighted_rows() < 3) throw std::invalid_argument("feedback-growth fit needs at least 3 weighted rows");
        const ModelSpec model = growth_model(d);
        write_fitted(model, run_model(model, d, f), d, f, rec);
      });
}

}  // namespace swarmcalc::cli
