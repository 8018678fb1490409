#pragma once

// Stochastic simulation of the generalized urn model.

#include <cstdint>
#include <optional>
#include <vector>

#include "swarmcalc/model.hpp"
#include "swarmcalc/revision_log.hpp"
#include "swarmcalc/rng.hpp"

namespace swarmcalc {

struct UrnState {
  int b;  // blue marbles
  int n;  // total marbles
};

enum class Color { blue, red };
enum class FeedbackSign { positive, negative };

struct StepEvent {
  Color drawn;
  FeedbackSign feedback;
  int payoff_magnitude;  // 0 or 1
  int delta_b;           // -1, 0 or +1 after boundary clamping
};

/// Per-state draw probabilities of a DriftSpec, precomputed for stepping.
/// Payoff values are read as the probability of a magnitude-one change, so
/// construction rejects payoffs exceeding one.
class UrnKernel {
 public:
  explicit UrnKernel(const DriftSpec& spec);

  int n() const { return n_; }

  /// One round from state b: draw a marble with replacement, then replace a
  /// second marble according to the feedback sign. A replacement that would
  /// remove a color absent from the urn leaves the state unchanged.
  StepEvent step(int b, Rng& rng) const;

 private:
  int n_;
  std::vector<double> blue_;
  std::vector<double> positive_;
  std::vector<double> payoff_;
};

std::pair<UrnState, StepEvent> step(const UrnState& state, const DriftSpec& spec, Rng& rng);

/// Initial blue count. `center_pair` alternates N/2 and N/2 + 1 over
/// replicates (even replicates start at N/2).
struct InitialCount {
  int b = 0;
  bool center_pair = false;

  static InitialCount at(int b) { return {b, false}; }
  static InitialCount center() { return {0, true}; }

  int for_replicate(std::size_t replicate, int n) const {
    return center_pair ? n / 2 + static_cast<int>(replicate % 2) : b;
  }
};

/// Replicate i draws from Rng(derive_seed(seed, i)).
struct SimConfig {
  DriftSpec spec;
  long long steps = 0;
  std::uint64_t seed = 0;
  InitialCount init{};
  std::size_t replicates = 1;

  void validate() const;
};

/// B(0..steps) of one replicate.
std::vector<int> run_trajectory(const SimConfig& config, std::size_t replicate = 0);

/// B(steps) for every replicate, ordered by replicate index.
std::vector<int> final_states(const SimConfig& config);

struct DriftSample {
  double s;
  double mean;
  double std_error;
};

/// Averages delta_B over independent single rounds taken from each state.
/// State k uses Rng(derive_seed(seed, k)).
std::vector<DriftSample> measure_drift(const SimConfig& config, std::uint64_t samples_per_state);

/// Revision counts along the trajectories of all replicates. A +1 step counts
/// as r_b and a -1 step as r_r at the pre-step state; every step counts a visit.
RevisionLog record_revisions(const SimConfig& config);

/// Revision counts from `samples_per_state` independent rounds in every
/// state (the single-step protocol of measure_drift).
RevisionLog sample_revisions(const DriftSpec& spec, std::uint64_t samples_per_state, std::uint64_t seed);

/// Fraction of time steps spent in each state, pooled over replicates.
std::vector<double> occupancy(const SimConfig& config);

struct Histogram {
  std::vector<double> phis;
  int n = 0;
  std::vector<std::vector<double>> columns;  // columns[j][b], each sums to 1
};

/// Final-state histogram for each intensity. Column j uses the config with
/// the feedback replaced by family(phi_j) and base seed derive_seed(seed, j).
Histogram ensemble_histogram(FeedbackFamily family, const std::vector<double>& phis, const SimConfig& config);

struct SwitchingEstimate {
  std::optional<double> mean;  // empty when every run was censored
  double stddev = 0.0;
  std::size_t completed = 0;
  std::size_t censored = 0;

  double std_error() const;
};

/// First hitting time of round(s_to N) from round(s_from N), averaged over
/// uncensored runs. Runs still short of the target after max_steps are
/// censored, so the mean is biased low.
SwitchingEstimate estimate_switching_time(const SimConfig& config, double s_from, double s_to,
                                          long long max_steps, std::size_t replicates);

}  // namespace swarmcalc
