#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "swarmcalc/errors.hpp"
#include "swarmcalc/estimation.hpp"
#include "swarmcalc/markov.hpp"
#include "swarmcalc/rng.hpp"
#include "swarmcalc/urn.hpp"

using namespace swarmcalc;
using doctest::Approx;

namespace {

DriftSpec sine_spec(double phi, int n = 64) { return DriftSpec(FeedbackProfile::sine(phi), PayoffProfile::constant(), n); }

// Revision counts whose ratio equals ratio_from_feedback(P(s), s) to about 1e-15.
RevisionLog exact_log(const FeedbackProfile& p, int n) {
  constexpr std::uint64_t total = 1ULL << 50;
  RevisionLog log(n);
  for (int k = 0; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    const double ratio = (4.0 * (p(s) - 0.5) * (s - 0.5) + 1.0) / 2.0;
    log.r_b[k] = static_cast<std::uint64_t>(std::llround(ratio * static_cast<double>(total)));
    log.r_r[k] = total - log.r_b[k];
    log.visits[k] = total;
  }
  return log;
}

// Lower drift root of 4 c2 (phi sin(pi s) - 1/2)(s - 1/2); 0 without one.
double lower_root(double phi) { return phi > 0.5 ? std::asin(0.5 / phi) / std::numbers::pi : 0.0; }

}  // namespace

TEST_CASE("revision ratio to drift") {
  RevisionLog log(4);
  log.r_b = {0, 3, 2, 0, 0};
  log.r_r = {0, 1, 2, 0, 0};
  log.visits = {0, 4, 4, 0, 0};
  const auto d = revision_ratio_to_drift(log);
  REQUIRE(d.size() == 2);
  CHECK(d[0].s == 0.25);
  CHECK(d[0].drift == 0.5);
  CHECK(d[0].revisions == 4);
  CHECK(d[0].std_error == Approx(2 * std::sqrt(0.75 * 0.25 / 4)));
  CHECK(d[1].drift == 0.0);
  // Matches the zero-feedback drift at s = 1/4.
  CHECK(drift(sine_spec(0.0, 4), 0.25) == Approx(0.5));
  CHECK(revision_ratio_to_drift(RevisionLog(8)).empty());

  // s = 1/2 never enters the dataset.
  const Dataset ds = drift_dataset(log, 1, 0.0);
  REQUIRE(ds.size() == 1);
  CHECK(ds.rows[0].x == 0.25);
  CHECK(ds.rows[0].y == 0.5);
  CHECK(drift_dataset(log, 5, 0.0).size() == 0);
  CHECK(drift_dataset(log, 1, 0.3).size() == 0);

  RevisionLog bad(2);
  bad.r_b = {0, 5, 0};
  bad.visits = {0, 1, 0};
  CHECK_THROWS_AS(revision_ratio_to_drift(bad), std::invalid_argument);
}

TEST_CASE("simulated revisions reproduce the drift") {
  const DriftSpec spec = sine_spec(0.75);
  const auto pts = revision_ratio_to_drift(sample_revisions(spec, 20000, 4));
  REQUIRE(pts.size() == 65);
  int outside = 0;
  for (const auto& p : pts) {
    const double expected = drift(spec, p.s);
    if (std::abs(p.drift - expected) > std::max(3 * p.std_error, 1e-12)) ++outside;
  }
  // 3 sigma leaves room for about 0.3% of states.
  CHECK(outside <= 1);
}

TEST_CASE("property: revision drift converges with more samples") {
  const DriftSpec spec = sine_spec(0.5, 32);
  double previous = 1e9;
  for (std::uint64_t samples : {100ULL, 3000ULL, 100000ULL}) {
    double sq = 0;
    const auto pts = revision_ratio_to_drift(sample_revisions(spec, samples, 9));
    for (const auto& p : pts) sq += std::pow(p.drift - drift(spec, p.s), 2);
    const double rmse = std::sqrt(sq / pts.size());
    CHECK(rmse < previous);
    previous = rmse;
  }
  CHECK(previous < 6e-3);
}

TEST_CASE("ratio and feedback inversion") {
  const double p = 0.5 * std::sin(std::numbers::pi * 0.25);
  CHECK(p == Approx(0.35355).epsilon(1e-4));
  CHECK(ratio_from_feedback(p, 0.25) == Approx(0.57322).epsilon(1e-4));
  const auto est = estimate_feedback(exact_log(FeedbackProfile::sine(0.5), 4));
  CHECK(est.points[1].p == Approx(p).epsilon(1e-10));
}

TEST_CASE("property: estimate_feedback inverts exact ratios") {
  Rng rng(31);
  const std::vector<double> s{0.0, 0.2, 0.4, 0.5};
  for (int i = 0; i < 40; ++i) {
    std::vector<FeedbackProfile> profiles{FeedbackProfile::sine(rng.uniform()), FeedbackProfile::quadratic(rng.uniform()),
                                          FeedbackProfile::rational(rng.uniform(), 30 * rng.uniform())};
    const std::vector<double> p{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    profiles.push_back(FeedbackProfile::tabulated(s, p));
    const int n = 2 + static_cast<int>(rng.below(100));
    for (const auto& prof : profiles) {
      const auto est = estimate_feedback(exact_log(prof, n));
      for (const auto& pt : est.points) {
        if (pt.marker == EstimateMarker::undefined_at_pole) {
          CHECK(2 * pt.s == Approx(1.0));
          continue;
        }
        REQUIRE(pt.marker == EstimateMarker::defined);
        CHECK(std::abs(pt.p - prof(pt.s)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("estimate markers") {
  RevisionLog log(8);
  // k = 1 (s = 1/8): ratio 1/8 = min gives P = 1, ratio 7/8 = max gives P = 0.
  log.r_b[1] = 1;
  log.r_r[1] = 7;
  log.r_b[7] = 1;
  log.r_r[7] = 7;
  // k = 2: ratio 0.9 is beyond max(s, 1 - s).
  log.r_b[2] = 9;
  log.r_r[2] = 1;
  // k = 4 is the pole; k = 3 has few samples; k = 5 sits inside the mask.
  log.r_b[4] = 5;
  log.r_r[4] = 5;
  log.r_b[3] = 1;
  log.r_b[5] = 3;
  log.r_r[5] = 3;
  for (int k = 0; k <= 8; ++k) log.visits[k] = 10;

  const auto est = estimate_feedback(log, {.pole_mask = 0.15, .min_revisions = 2});
  CHECK(est.pole_mask == 0.15);
  CHECK(est.points[0].marker == EstimateMarker::insufficient_samples);
  CHECK(std::isnan(est.points[0].ratio));
  CHECK(est.points[1].marker == EstimateMarker::defined);
  CHECK(est.points[1].p == Approx(1.0));
  CHECK(est.points[7].marker == EstimateMarker::defined);
  CHECK(est.points[7].p == Approx(0.0).epsilon(1e-12));
  CHECK(est.points[2].marker == EstimateMarker::out_of_domain);
  CHECK(std::isnan(est.points[2].p));
  CHECK(est.points[3].marker == EstimateMarker::insufficient_samples);
  CHECK(est.points[4].marker == EstimateMarker::undefined_at_pole);
  CHECK_FALSE(est.points[4].high_variance);
  CHECK(est.points[5].marker == EstimateMarker::defined);
  CHECK(est.points[5].high_variance);
  CHECK(est.points[5].p == Approx(0.5));
  CHECK(est.defined_count() == 3);
  // The masked point is left out of the fit data.
  CHECK(est.fit_dataset().size() == 2);
  CHECK(to_string(EstimateMarker::out_of_domain) == "out-of-domain");

  CHECK(estimate_feedback(RevisionLog(64)).pole_mask == Approx(1.5 / 64));
}

TEST_CASE("feedback profile fits on exact estimates") {
  const auto est = estimate_feedback(exact_log(FeedbackProfile::sine(0.6), 64));
  const auto [prof, r] = fit_feedback_profile(est, FeedbackFamily::sine);
  CHECK(std::abs(r.value("phi") - 0.6) <= 1e-6);
  CHECK(prof(0.5) == Approx(0.6).epsilon(1e-6));

  const auto q = fit_feedback_profile(estimate_feedback(exact_log(FeedbackProfile::quadratic(0.3), 50)),
                                      FeedbackFamily::quadratic);
  CHECK(std::abs(q.second.value("phi") - 0.3) <= 1e-6);

  const auto rat = fit_feedback_profile(estimate_feedback(exact_log(FeedbackProfile::rational(0.679526, 11.9802), 100)),
                                        FeedbackFamily::rational);
  CHECK(rat.second.value("c1") == Approx(0.679526).epsilon(1e-5));
  CHECK(rat.second.value("c2") == Approx(11.9802).epsilon(1e-5));

  // Negative feedback everywhere pins phi at zero.
  const auto zero = fit_feedback_profile(estimate_feedback(exact_log(FeedbackProfile::sine(0.0), 64)), FeedbackFamily::sine);
  CHECK(zero.second.value("phi") == 0.0);
}

TEST_CASE("feedback profile fit needs three points") {
  RevisionLog log(4);
  log.r_b = {1, 1, 1, 1, 1};
  log.r_r = {1, 2, 1, 2, 1};
  log.visits = {2, 3, 2, 3, 2};
  CHECK_THROWS_AS(fit_feedback_profile(estimate_feedback(log), FeedbackFamily::sine), NumericalError);
  CHECK_THROWS_AS(fit_feedback_profile(estimate_feedback(exact_log(FeedbackProfile::sine(0.5), 16)),
                                       FeedbackFamily::tabulated),
                  std::invalid_argument);
}

TEST_CASE("predicted steady states") {
  for (int n : {2, 4, 16, 64}) {
    const auto pi = predict_steady_state(FeedbackProfile::sine(0.0), PayoffProfile::constant(), n);
    CHECK(oracle::total_variation(pi, oracle::binomial_half(n)) < 1e-8);
  }
  const auto pi = predict_steady_state(FeedbackProfile::rational(0.679526, 11.9802), PayoffProfile::constant(), 64);
  const auto peaks = distribution_peaks(pi);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0] / 64.0 > 0.1);
  CHECK(peaks[0] / 64.0 < 0.35);
  CHECK(peaks[1] / 64.0 > 0.65);
  CHECK(peaks[1] / 64.0 < 0.9);
}

TEST_CASE("fitting P beats fitting the drift directly") {
  const DriftSpec spec = sine_spec(0.75);
  const double truth = lower_root(0.75);
  for (std::uint64_t samples : {1000ULL, 10000ULL}) {
    double err_p = 0, err_d = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      const RevisionLog log = sample_revisions(spec, samples, 100 * samples + seed);
      const auto [prof, rp] = fit_feedback_profile(estimate_feedback(log), FeedbackFamily::sine);
      const Dataset dd = drift_dataset(log);
      const FitResult rd = levenberg_marquardt(drift_model(dd), dd);
      err_p += std::abs(lower_root(rp.value("phi")) - truth);
      err_d += std::abs(lower_root(rd.value("phi")) - truth);
    }
    INFO("samples " << samples << " P error " << err_p / 200 << " drift error " << err_d / 200);
    CHECK(err_p <= err_d);
  }
}

TEST_CASE("100 samples per state place the crossings within 0.02") {
  const double truth = lower_root(0.75);
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto [prof, r] = fit_feedback_profile(estimate_feedback(sample_revisions(sine_spec(0.75), 100, seed)),
                                                FeedbackFamily::sine);
    const auto roots = drift_roots(DriftSpec(prof, PayoffProfile::constant(), 64));
    if (roots.size() == 3 && std::abs(roots[0] - truth) <= 0.02 && std::abs(roots[2] - (1 - truth)) <= 0.02) ++good;
  }
  CHECK(good >= 19);
}

TEST_CASE("feedback time series") {
  // Exact drift with negative feedback only: phi clamps to zero.
  std::vector<DriftWindow> windows;
  for (int w = 0; w < 4; ++w) {
    std::vector<double> s, d;
    for (int k = 0; k <= 32; ++k) {
      s.push_back(k / 32.0);
      d.push_back(4 * 0.8 * (-0.2 * std::sin(std::numbers::pi * k / 32.0) - 0.5) * (k / 32.0 - 0.5));
    }
    windows.push_back({100.0 * (w + 1), Dataset::from(s, d)});
  }
  const auto flat = feedback_timeseries(windows);
  CHECK(flat.window_length == 100.0);
  for (const auto& p : flat.points) {
    REQUIRE(p.ok);
    CHECK(p.phi == 0.0);
    CHECK(p.phi_at_bound);
    CHECK(p.c2 == Approx(0.8 * 1.1).epsilon(0.1));
  }

  std::swap(windows[0], windows[1]);
  CHECK_THROWS_AS(feedback_timeseries(windows), std::invalid_argument);
  CHECK_THROWS_AS(feedback_timeseries({}), std::invalid_argument);

  // A window too small to fit is kept and marked.
  std::vector<double> s1{0.25}, d1{0.5};
  const auto skipped = feedback_timeseries({{1.0, Dataset::from(s1, d1)}});
  CHECK_FALSE(skipped.points[0].ok);
  CHECK_FALSE(skipped.points[0].error.empty());
  CHECK(skipped.growth_dataset().size() == 0);
}

TEST_CASE("feedback time series follows a synthetic growth curve") {
  std::vector<DriftWindow> windows;
  std::vector<double> truth;
  for (int w = 1; w <= 16; ++w) {
    const double t = 500.0 * w;
    const double phi = 0.786 - std::exp(-5e-4 * t);
    truth.push_back(std::max(phi, 0.0));
    const RevisionLog log = sample_revisions(sine_spec(std::max(phi, 0.0)), 2000, 77 + w);
    windows.push_back({t, drift_dataset(log)});
  }
  const auto series = feedback_timeseries(windows);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    REQUIRE(series.points[i].ok);
    CHECK(std::abs(series.points[i].phi - truth[i]) <= 0.05);
  }
  const auto g = fit_feedback_growth(series.growth_dataset());
  CHECK(g.value("a") == Approx(0.786).epsilon(0.05));
  CHECK(g.value("b") < 0.0);
}
