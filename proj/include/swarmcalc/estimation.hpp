#pragma once

// From observed decision revisions to drift, feedback probability, fitted
// profiles and predicted steady states.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "swarmcalc/fit.hpp"
#include "swarmcalc/model.hpp"
#include "swarmcalc/revision_log.hpp"

namespace swarmcalc {

struct DriftPoint {
  double s;
  double drift;      // 2 r_b / (r_b + r_r) - 1
  double std_error;  // binomial error of the ratio, doubled
  std::uint64_t revisions;
};

/// States without revisions are omitted.
std::vector<DriftPoint> revision_ratio_to_drift(const RevisionLog& log);

/// Drift points as a fit dataset (x = s, y = drift), keeping states with at
/// least `min_revisions` revisions and |s - 1/2| > pole_mask. Unit weights.
Dataset drift_dataset(const RevisionLog& log, std::uint64_t min_revisions = 1, double pole_mask = 0.0);

enum class EstimateMarker { defined, undefined_at_pole, out_of_domain, insufficient_samples };

std::string to_string(EstimateMarker m);

struct FeedbackPoint {
  double s;
  double p;      // NaN unless marker is defined
  double ratio;  // r_b / (r_b + r_r), NaN without revisions
  std::uint64_t revisions;
  EstimateMarker marker;
  bool high_variance;  // |s - 1/2| <= pole_mask
};

struct FeedbackEstimate {
  int n = 0;
  double pole_mask = 0.0;
  std::vector<FeedbackPoint> points;  // one per state 0..n

  std::size_t defined_count() const;
  /// Defined points outside the pole mask, weighted by revisions (2s - 1)^2,
  /// the inverse variance of the estimate up to the binomial factor.
  Dataset fit_dataset() const;
};

struct EstimateOptions {
  double pole_mask = -1.0;  // negative: 1.5 / N
  std::uint64_t min_revisions = 1;
};

/// Revision ratio expected from a feedback probability p at s (unit payoff
/// cancels in the ratio): (4 (p - 1/2)(s - 1/2) + 1) / 2.
double ratio_from_feedback(double p, double s);

/// p = (ratio - 1 + s) / (2 s - 1). Ratios outside [min(s, 1-s), max(s, 1-s)]
/// would give p outside [0, 1] and are marked out of domain.
FeedbackEstimate estimate_feedback(const RevisionLog& log, const EstimateOptions& options = {});

/// Least-squares fit of a sine, quadratic or rational profile to the defined,
/// unmasked points. Throws NumericalError with fewer than 3 such points.
std::pair<FeedbackProfile, FitResult> fit_feedback_profile(const FeedbackEstimate& estimate, FeedbackFamily family,
                                                           const LmOptions& options = {});

/// Steady state of the chain built from the profile and payoff.
std::vector<double> predict_steady_state(const FeedbackProfile& profile, const PayoffProfile& payoff, int n);

/// Measured drift of one time window: x = s, y = drift, w = weight.
struct DriftWindow {
  double t;
  Dataset drift;
};

struct FeedbackTimePoint {
  double t;
  bool ok = false;
  double phi = 0.0;
  double phi_std_error = 0.0;
  double c2 = 0.0;
  double c2_std_error = 0.0;
  double rms = 0.0;
  int dof = 0;
  bool phi_at_bound = false;
  std::string error;  // why the window was skipped
};

struct FeedbackTimeSeries {
  double window_length = 0.0;
  std::vector<FeedbackTimePoint> points;

  /// (t, phi) of the fitted windows with weights growth_weight(t).
  Dataset growth_dataset() const;
};

/// Fits 4 c2 (phi sin(pi s) - 1/2)(s - 1/2) to every window. phi is kept in
/// [0, 1]; an optimum beyond either bound is pinned there and c2 refitted.
/// Windows whose fit fails are kept with ok = false and the reason.
FeedbackTimeSeries feedback_timeseries(const std::vector<DriftWindow>& windows, const LmOptions& options = {});

}  // namespace swarmcalc
