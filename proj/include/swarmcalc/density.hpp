#pragma once

// Density-classification agents: each agent remembers the colors of the
// agents it meets and, after five observations, switches to the majority.
// The fraction s of red agents plays the role of the blue-marble fraction of
// the urn, so r_b in the revision logs counts green -> red switches.

#include <array>
#include <cstdint>
#include <vector>

#include "swarmcalc/estimation.hpp"
#include "swarmcalc/revision_log.hpp"
#include "swarmcalc/rng.hpp"

namespace swarmcalc {

enum class Mixing { well_mixed, grid };

/// What an agent stores when it fails to recognize its partner: nothing, or
/// the opposite of the partner's color.
enum class RecognitionFailure { drop, misread };

/// Initial positions on the grid: uniform, or reds packed into the left
/// s0 fraction of the arena and greens into the rest.
enum class Placement { uniform, segregated };

struct GridGeometry {
  int width = 64;
  int height = 64;
  double radius = 12.0;
};

struct ScenarioConfig {
  int agents = 100;
  double recognition_rate = 0.8;
  long long steps = 0;
  std::uint64_t seed = 0;
  Mixing mixing = Mixing::well_mixed;
  GridGeometry grid{};
  double initial_red = 0.5;
  RecognitionFailure failure = RecognitionFailure::drop;
  Placement placement = Placement::uniform;
  long long window_length = 0;         // 0: one window over the whole run
  std::vector<long long> window_edges;  // overrides window_length when set

  void validate() const;
  /// Window boundaries 0 = e0 < e1 < ... < ek = steps.
  std::vector<long long> windows() const;
};

struct Agent {
  bool red = false;
  int seen = 0;      // observations stored, at most 5
  int seen_red = 0;  // red among them
};

struct DcState {
  std::vector<Agent> agents;
  std::vector<int> x;  // grid positions, empty when well mixed
  std::vector<int> y;
  int red = 0;

  int n() const { return static_cast<int>(agents.size()); }
};

/// Colors and positions at t = 0 for the config's seed stream.
DcState dc_init(const ScenarioConfig& config, Rng& rng);

/// One encounter. Returns +1 or -1 when the observer switched color, else 0.
int dc_step(DcState& state, const ScenarioConfig& config, Rng& rng);

struct DcRun {
  std::vector<int> red;            // red count after each step, red[0] initial
  std::vector<long long> edges;    // window boundaries
  std::vector<RevisionLog> logs;   // one per window, indexed by red count
};

DcRun dc_run(const ScenarioConfig& config);

/// Revision logs pooled over `runs` independent runs. Run i draws its initial
/// red fraction uniformly from [s0_lo, s0_hi] and its seed from
/// Rng(derive_seed(seed, i)).
struct DcEnsemble {
  std::vector<long long> edges;
  std::vector<RevisionLog> logs;
};

/// Config of ensemble member i.
ScenarioConfig ensemble_member(const ScenarioConfig& config, std::size_t i, double s0_lo, double s0_hi);

DcEnsemble dc_ensemble(const ScenarioConfig& config, std::size_t runs, double s0_lo, double s0_hi);

/// One drift window per log, at the window midpoint, from states with at
/// least `min_revisions` revisions and |s - 1/2| > pole_mask (negative: 1.5/N).
std::vector<DriftWindow> dc_drift_windows(const std::vector<long long>& edges, const std::vector<RevisionLog>& logs,
                                          std::uint64_t min_revisions = 5, double pole_mask = -1.0);

}  // namespace swarmcalc
