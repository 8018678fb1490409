#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>

#include "modes.hpp"
#include "oracles.hpp"
#include "swarmcalc/parallel.hpp"
#include "swarmcalc/urn.hpp"

using namespace swarmcalc;
using doctest::Approx;

namespace {

DriftSpec sine(double phi, int n = 64) { return DriftSpec(FeedbackProfile::sine(phi), PayoffProfile::constant(), n); }

SimConfig config(DriftSpec spec, long long steps, std::uint64_t seed, InitialCount init, std::size_t replicates) {
  return SimConfig{std::move(spec), steps, seed, init, replicates};
}

}  // namespace

TEST_CASE("steps at the boundaries") {
  Rng rng(1);
  for (double phi : {0.0, 0.5, 1.0}) {
    const DriftSpec spec = sine(phi, 10);
    for (int i = 0; i < 1000; ++i) {
      auto [lo, ev_lo] = step({0, 10}, spec, rng);
      CHECK(ev_lo.drawn == Color::red);
      CHECK(ev_lo.feedback == FeedbackSign::negative);
      CHECK(ev_lo.delta_b == 1);
      CHECK(lo.b == 1);
      auto [hi, ev_hi] = step({10, 10}, spec, rng);
      CHECK(ev_hi.drawn == Color::blue);
      CHECK(ev_hi.delta_b == -1);
      CHECK(hi.b == 9);
    }
  }
}

TEST_CASE("clamped replacement is a no-op") {
  // Full positive feedback: drawing red at B = 0 would remove a missing blue marble.
  const std::vector<double> s{0.0, 1.0};
  const std::vector<double> ones{1.0, 1.0};
  const DriftSpec eigen(FeedbackProfile::tabulated(s, ones), PayoffProfile::constant(), 8);
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    CHECK(step({0, 8}, eigen, rng).second.delta_b == 0);
    CHECK(step({8, 8}, eigen, rng).second.delta_b == 0);
  }
}

TEST_CASE("property: events follow the four-case table") {
  Rng rng(3);
  const DriftSpec spec(FeedbackProfile::sine(0.7), PayoffProfile::constant(0.6), 20);
  const UrnKernel kernel(spec);
  for (int i = 0; i < 20000; ++i) {
    const int b = static_cast<int>(rng.below(21));
    const StepEvent ev = kernel.step(b, rng);
    const int sign = (ev.drawn == Color::blue) == (ev.feedback == FeedbackSign::positive) ? 1 : -1;
    int expected = sign * ev.payoff_magnitude;
    if (b + expected < 0 || b + expected > 20) expected = 0;
    CHECK(ev.delta_b == expected);
  }
}

TEST_CASE("payoff magnitude is a probability") {
  const DriftSpec spec(FeedbackProfile::sine(0.3), PayoffProfile::constant(0.4), 64);
  const UrnKernel kernel(spec);
  Rng rng(4);
  const int samples = 100000;
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) sum += std::abs(kernel.step(32, rng).delta_b);
  const double mean = sum / samples;
  const double se = std::sqrt(0.4 * 0.6 / samples);
  CHECK(std::abs(mean - 0.4) < 3 * se);

  CHECK_THROWS_AS(UrnKernel(DriftSpec(FeedbackProfile::sine(0.3), PayoffProfile::constant(1.5), 10)),
                  std::invalid_argument);
}

TEST_CASE("trajectories") {
  auto c = config(sine(0.5, 16), 0, 9, InitialCount::at(5), 1);
  CHECK(run_trajectory(c) == std::vector<int>{5});

  c.steps = 5000;
  const auto traj = run_trajectory(c);
  REQUIRE(traj.size() == 5001);
  CHECK(traj.front() == 5);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    CHECK(std::abs(traj[i] - traj[i - 1]) <= 1);
    CHECK(traj[i] >= 0);
    CHECK(traj[i] <= 16);
  }
  CHECK(run_trajectory(c) == traj);
  c.seed = 10;
  CHECK(run_trajectory(c) != traj);

  c.init = InitialCount::at(17);
  CHECK_THROWS_AS(run_trajectory(c), std::invalid_argument);
}

TEST_CASE("center initialization alternates N/2 and N/2 + 1") {
  const auto c = config(sine(0.2, 64), 0, 1, InitialCount::center(), 4);
  CHECK(final_states(c) == std::vector<int>{32, 33, 32, 33});
}

TEST_CASE("Ehrenfest ensemble mean follows the closed form") {
  const auto c = config(sine(0.0), 50, 5, InitialCount::at(0), 10000);
  const auto finals = final_states(c);
  double mean = 0.0;
  for (int b : finals) mean += b;
  mean /= finals.size();
  double var = 0.0;
  for (int b : finals) var += (b - mean) * (b - mean);
  var /= finals.size() - 1;
  const double se = std::sqrt(var / finals.size());
  CHECK(std::abs(mean - ehrenfest_closed_form(50, 64, 0.0)) < 3 * se);
}

TEST_CASE("measured drift matches the formula") {
  const auto spec = sine(0.75);
  const auto c = config(spec, 0, 6, InitialCount::at(0), 1);
  const auto rows = measure_drift(c, 100000);
  REQUIRE(rows.size() == 65);
  for (int b : {10, 16, 32, 50}) {
    CHECK(std::abs(rows[b].mean - drift(spec, b / 64.0)) < 3 * rows[b].std_error);
  }
  CHECK(std::abs(rows[32].mean) < 3 * rows[32].std_error);

  // Zero crossings by linear interpolation, compared with the analytic roots.
  std::vector<double> crossings;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double y0 = rows[k].mean;
    const double y1 = rows[k + 1].mean;
    if (y0 > 0 && y1 <= 0) crossings.push_back(rows[k].s + (rows[k + 1].s - rows[k].s) * y0 / (y0 - y1));
    if (y0 < 0 && y1 >= 0) crossings.push_back(rows[k].s + (rows[k + 1].s - rows[k].s) * y0 / (y0 - y1));
  }
  const auto roots = drift_roots(spec);
  REQUIRE(crossings.size() == roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) CHECK(std::abs(crossings[i] - roots[i]) <= 1.0 / 64);
}

TEST_CASE("revision logs") {
  const auto c = config(sine(0.6, 32), 3000, 7, InitialCount::at(16), 20);
  const RevisionLog log = record_revisions(c);
  CHECK_NOTHROW(log.validate());
  std::uint64_t visits = 0;
  for (std::size_t k = 0; k < log.states(); ++k) {
    CHECK(log.r_b[k] + log.r_r[k] <= log.visits[k]);
    visits += log.visits[k];
  }
  CHECK(visits == 3000u * 20u);
  CHECK(record_revisions(c).r_b == log.r_b);

  // Ratio of upward moves at B = 16 of 64 without feedback: (drift + 1) / 2 = 0.75.
  const RevisionLog sampled = sample_revisions(sine(0.0), 200000, 8);
  const double n = static_cast<double>(sampled.r_b[16] + sampled.r_r[16]);
  const double ratio = sampled.r_b[16] / n;
  CHECK(std::abs(ratio - 0.75) < 3 * std::sqrt(0.75 * 0.25 / n));

  RevisionLog bad(4);
  bad.r_b[1] = 2;
  bad.visits[1] = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  RevisionLog other(5);
  CHECK_THROWS_AS(bad += other, std::invalid_argument);
}

TEST_CASE("property: revision ratio identity at every interior state") {
  const auto spec = sine(0.75, 32);
  const RevisionLog log = sample_revisions(spec, 40000, 12);
  for (int b = 1; b < 32; ++b) {
    const double n = static_cast<double>(log.r_b[b] + log.r_r[b]);
    const double expected = 0.5 * (drift(spec, b / 32.0) + 1.0);
    const double se = std::sqrt(expected * (1 - expected) / n);
    CHECK(std::abs(log.r_b[b] / n - expected) < 3 * se);
  }
}

TEST_CASE("property: fuzzed steps never leave [0, N]") {
  Rng rng(13);
  const std::vector<double> s{0.0, 0.2, 0.5};
  std::vector<DriftSpec> specs;
  for (int i = 0; i < 10; ++i) {
    const int n = 2 + static_cast<int>(rng.below(100));
    const std::vector<double> p{rng.uniform(), rng.uniform(), rng.uniform()};
    specs.emplace_back(i % 2 ? FeedbackProfile::tabulated(s, p) : FeedbackProfile::sine(rng.uniform()),
                       PayoffProfile::sine(0.5 * rng.uniform(), 0.5 * rng.uniform()), n);
  }
  bool ok = true;
  for (const auto& spec : specs) {
    const UrnKernel kernel(spec);
    int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.n) + 1));
    for (int t = 0; t < 1'000'000; ++t) {
      b += kernel.step(b, rng).delta_b;
      ok = ok && b >= 0 && b <= spec.n;
    }
  }
  CHECK(ok);
}

TEST_CASE("bifurcation histogram") {
  const auto c = config(sine(0.0), 2000, 21, InitialCount::center(), 10000);
  const Histogram h = ensemble_histogram(FeedbackFamily::sine, {0.25, 0.75}, c);
  REQUIRE(h.columns.size() == 2);
  for (const auto& col : h.columns) {
    double sum = 0.0;
    for (double v : col) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == Approx(1.0).epsilon(1e-12));
  }
  const auto low = support::modes(h.columns[0]);
  REQUIRE(low.size() == 1);
  CHECK(std::abs(low[0] - 32) <= 2);

  const auto high = support::modes(h.columns[1]);
  REQUIRE(high.size() == 2);
  const auto roots = drift_roots(sine(0.75));
  CHECK(std::abs(high[0] - 64 * roots.front()) <= 3);
  CHECK(std::abs(high[1] - 64 * roots.back()) <= 3);
}

TEST_CASE("switching times") {
  const auto c = config(sine(0.0, 2), 0, 14, InitialCount::at(0), 1);
  const auto same = estimate_switching_time(c, 0.5, 0.5, 100, 10);
  REQUIRE(same.mean.has_value());
  CHECK(*same.mean == 0.0);

  const auto ehrenfest = estimate_switching_time(c, 0.0, 1.0, 100000, 40000);
  REQUIRE(ehrenfest.mean.has_value());
  CHECK(ehrenfest.censored == 0);
  CHECK(std::abs(*ehrenfest.mean - 4.0) < 3 * ehrenfest.std_error());

  const auto c64 = config(sine(0.75, 64), 0, 15, InitialCount::at(0), 1);
  const auto censored = estimate_switching_time(c64, 0.2, 0.8, 10, 50);
  CHECK_FALSE(censored.mean.has_value());
  CHECK(censored.censored == 50);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }, 3),
                  std::runtime_error);
}

TEST_CASE("derived seeds are distinct") {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 10000; ++i) seeds.push_back(derive_seed(42, i));
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}
