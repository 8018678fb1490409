#include "swarmcalc/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "swarmcalc/errors.hpp"
#include "swarmcalc/markov.hpp"

namespace swarmcalc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double state_s(const RevisionLog& log, std::size_t k) { return static_cast<double>(k) / log.n; }

}  // namespace

std::vector<DriftPoint> revision_ratio_to_drift(const RevisionLog& log) {
  log.validate();
  std::vector<DriftPoint> out;
  for (std::size_t k = 0; k < log.states(); ++k) {
    const std::uint64_t total = log.r_b[k] + log.r_r[k];
    if (total == 0) continue;
    const double ratio = static_cast<double>(log.r_b[k]) / static_cast<double>(total);
    out.push_back({state_s(log, k), 2.0 * ratio - 1.0, 2.0 * std::sqrt(ratio * (1.0 - ratio) / total), total});
  }
  return out;
}

Dataset drift_dataset(const RevisionLog& log, std::uint64_t min_revisions, double pole_mask) {
  Dataset d;
  d.name = "drift";
  for (const auto& pt : revision_ratio_to_drift(log)) {
    if (pt.revisions < min_revisions || std::abs(pt.s - 0.5) <= pole_mask) continue;
    d.rows.push_back({pt.s, pt.drift, 1.0});
  }
  return d;
}

std::string to_string(EstimateMarker m) {
  switch (m) {
    case EstimateMarker::defined:
      return "defined";
    case EstimateMarker::undefined_at_pole:
      return "pole";
    case EstimateMarker::out_of_domain:
      return "out-of-domain";
    case EstimateMarker::insufficient_samples:
      return "insufficient";
  }
  return "unknown";
}

std::size_t FeedbackEstimate::defined_count() const {
  return static_cast<std::size_t>(std::count_if(points.begin(), points.end(),
                                                [](const FeedbackPoint& p) { return p.marker == EstimateMarker::defined; }));
}

Dataset FeedbackEstimate::fit_dataset() const {
  Dataset d;
  d.name = "feedback estimate";
  for (const auto& pt : points) {
    if (pt.marker != EstimateMarker::defined || pt.high_variance) continue;
    const double lever = 2.0 * pt.s - 1.0;
    d.rows.push_back({pt.s, pt.p, static_cast<double>(pt.revisions) * lever * lever});
  }
  return d;
}

double ratio_from_feedback(double p, double s) { return 0.5 * (4.0 * (p - 0.5) * (s - 0.5) + 1.0); }

FeedbackEstimate estimate_feedback(const RevisionLog& log, const EstimateOptions& options) {
  log.validate();
  FeedbackEstimate est;
  est.n = log.n;
  est.pole_mask = options.pole_mask < 0.0 ? 1.5 / log.n : options.pole_mask;
  for (std::size_t k = 0; k < log.states(); ++k) {
    FeedbackPoint pt{};
    pt.s = state_s(log, k);
    pt.revisions = log.r_b[k] + log.r_r[k];
    pt.ratio = pt.revisions > 0 ? static_cast<double>(log.r_b[k]) / static_cast<double>(pt.revisions) : kNaN;
    pt.p = kNaN;
    // 2k == n tests s == 1/2 exactly.
    pt.high_variance = 2 * static_cast<long long>(k) != log.n && std::abs(pt.s - 0.5) <= est.pole_mask;
    if (2 * static_cast<long long>(k) == log.n) {
      pt.marker = EstimateMarker::undefined_at_pole;
    } else if (pt.revisions == 0 || pt.revisions < options.min_revisions) {
      pt.marker = EstimateMarker::insufficient_samples;
    } else {
      const double lo = std::min(pt.s, 1.0 - pt.s);
      const double hi = std::max(pt.s, 1.0 - pt.s);
      if (pt.ratio < lo - 1e-12 || pt.ratio > hi + 1e-12) {
        pt.marker = EstimateMarker::out_of_domain;
      } else {
        pt.marker = EstimateMarker::defined;
        pt.p = std::clamp((pt.ratio - 1.0 + pt.s) / (2.0 * pt.s - 1.0), 0.0, 1.0);
      }
    }
    est.points.push_back(pt);
  }
  return est;
}

std::pair<FeedbackProfile, FitResult> fit_feedback_profile(const FeedbackEstimate& estimate, FeedbackFamily family,
                                                           const LmOptions& options) {
  const Dataset data = estimate.fit_dataset();
  if (data.weighted_rows() < 3) {
    std::ostringstream msg;
    msg << "feedback fit: " << data.weighted_rows() << " usable estimate points, need at least 3";
    throw NumericalError(msg.str());
  }
  switch (family) {
    case FeedbackFamily::sine: {
      FitResult r = levenberg_marquardt(sine_feedback_model(data), data, options);
      return {FeedbackProfile::sine(r.value("phi")), r};
    }
    case FeedbackFamily::quadratic: {
      FitResult r = levenberg_marquardt(quadratic_feedback_model(data), data, options);
      return {FeedbackProfile::quadratic(r.value("phi")), r};
    }
    case FeedbackFamily::rational: {
      FitResult r = levenberg_marquardt(rational_feedback_model(data), data, options);
      return {FeedbackProfile::rational(r.value("c1"), r.value("c2")), r};
    }
    case FeedbackFamily::tabulated:
      break;
  }
  throw std::invalid_argument("feedback fit: family must be sine, quadratic or rational");
}

std::vector<double> predict_steady_state(const FeedbackProfile& profile, const PayoffProfile& payoff, int n) {
  return steady_state(build_transition(DriftSpec(profile, payoff, n)));
}

Dataset FeedbackTimeSeries::growth_dataset() const {
  Dataset d;
  d.name = "feedback intensity";
  for (const auto& pt : points) {
    if (pt.ok) d.rows.push_back({pt.t, pt.phi, growth_weight(pt.t)});
  }
  return d;
}

FeedbackTimeSeries feedback_timeseries(const std::vector<DriftWindow>& windows, const LmOptions& options) {
  if (windows.empty()) throw std::invalid_argument("feedback time series: no windows");
  for (std::size_t i = 1; i < windows.size(); ++i) {
    if (!(windows[i].t > windows[i - 1].t)) throw std::invalid_argument("feedback time series: times must increase");
  }
  FeedbackTimeSeries series;
  if (windows.size() > 1) series.window_length = windows[1].t - windows[0].t;
  for (const auto& win : windows) {
    FeedbackTimePoint pt;
    pt.t = win.t;
    try {
      const FitResult r = levenberg_marquardt(drift_model(win.drift), win.drift, options);
      require_converged(r);
      pt.ok = true;
      pt.c2 = r.value("c2");
      pt.c2_std_error = r.std_error("c2");
      pt.phi = r.value("phi");
      pt.phi_std_error = r.std_error("phi");
      pt.phi_at_bound = r.at_bound[r.index("phi")];
      pt.rms = r.rms;
      pt.dof = r.dof;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    series.points.push_back(pt);
  }
  return series;
}

}  // namespace swarmcalc
