#include "swarmcalc/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "swarmcalc/parallel.hpp"

namespace swarmcalc {

void ScenarioConfig::validate() const {
  if (agents < 2) throw std::invalid_argument("scenario: need at least 2 agents");
  if (!(recognition_rate >= 0.0 && recognition_rate <= 1.0)) {
    throw std::invalid_argument("scenario: recognition rate outside [0, 1]");
  }
  if (steps < 0) throw std::invalid_argument("scenario: steps must be nonnegative");
  if (!(initial_red >= 0.0 && initial_red <= 1.0)) throw std::invalid_argument("scenario: initial red fraction outside [0, 1]");
  if (window_length < 0) throw std::invalid_argument("scenario: window length must be nonnegative");
  if (mixing == Mixing::grid && (grid.width < 1 || grid.height < 1 || !(grid.radius >= 0.0))) {
    throw std::invalid_argument("scenario: invalid grid geometry");
  }
  windows();
}

std::vector<long long> ScenarioConfig::windows() const {
  if (!window_edges.empty()) {
    if (window_edges.front() != 0 || window_edges.back() != steps || window_edges.size() < 2) {
      throw std::invalid_argument("scenario: window edges must run from 0 to steps");
    }
    for (std::size_t i = 1; i < window_edges.size(); ++i) {
      if (window_edges[i] <= window_edges[i - 1]) throw std::invalid_argument("scenario: window edges must increase");
    }
    return window_edges;
  }
  std::vector<long long> edges{0};
  if (window_length == 0 || steps == 0) {
    edges.push_back(steps);
    return edges;
  }
  for (long long e = window_length; e < steps; e += window_length) edges.push_back(e);
  edges.push_back(steps);
  return edges;
}

DcState dc_init(const ScenarioConfig& config, Rng& rng) {
  const int n = config.agents;
  DcState st;
  st.agents.resize(n);
  st.red = static_cast<int>(std::lround(config.initial_red * n));
  for (int a = 0; a < st.red; ++a) st.agents[a].red = true;
  if (config.mixing == Mixing::grid) {
    const int w = config.grid.width;
    const int h = config.grid.height;
    st.x.resize(n);
    st.y.resize(n);
    const int split = static_cast<int>(static_cast<double>(st.red) / n * w);
    for (int a = 0; a < n; ++a) {
      if (config.placement == Placement::segregated) {
        if (st.agents[a].red) {
          st.x[a] = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, split))));
        } else {
          st.x[a] = std::min(w - 1, split) + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, w - split))));
        }
      } else {
        st.x[a] = static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
      }
      st.y[a] = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
    }
  }
  return st;
}

namespace {

// Partner index, or -1 when the observer sees nobody.
int pick_partner(DcState& st, const ScenarioConfig& config, int i, Rng& rng) {
  const int n = st.n();
  if (config.mixing == Mixing::well_mixed) {
    int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    return j >= i ? j + 1 : j;
  }
  const int w = config.grid.width;
  const int h = config.grid.height;
  switch (rng.below(4)) {
    case 0:
      st.x[i] = (st.x[i] + 1) % w;
      break;
    case 1:
      st.x[i] = (st.x[i] + w - 1) % w;
      break;
    case 2:
      st.y[i] = (st.y[i] + 1) % h;
      break;
    default:
      st.y[i] = (st.y[i] + h - 1) % h;
      break;
  }
  const double r2 = config.grid.radius * config.grid.radius;
  thread_local std::vector<int> candidates;
  candidates.clear();
  for (int a = 0; a < n; ++a) {
    if (a == i) continue;
    int dx = std::abs(st.x[a] - st.x[i]);
    int dy = std::abs(st.y[a] - st.y[i]);
    dx = std::min(dx, w - dx);
    dy = std::min(dy, h - dy);
    if (dx * dx + dy * dy <= r2) candidates.push_back(a);
  }
  if (candidates.empty()) return -1;
  return candidates[rng.below(candidates.size())];
}

}  // namespace

int dc_step(DcState& st, const ScenarioConfig& config, Rng& rng) {
  const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(st.n())));
  const int j = pick_partner(st, config, i, rng);
  if (j < 0) return 0;
  bool seen_red = st.agents[j].red;
  if (!(rng.uniform() < config.recognition_rate)) {
    if (config.failure == RecognitionFailure::drop) return 0;
    seen_red = !seen_red;
  }
  Agent& obs = st.agents[i];
  ++obs.seen;
  if (seen_red) ++obs.seen_red;
  if (obs.seen < 5) return 0;

  const bool majority_red = obs.seen_red >= 3;
  obs.seen = 0;
  obs.seen_red = 0;
  if (majority_red == obs.red) return 0;
  obs.red = majority_red;
  const int delta = majority_red ? 1 : -1;
  st.red += delta;
  return delta;
}

DcRun dc_run(const ScenarioConfig& config) {
  config.validate();
  Rng rng(config.seed);
  DcState st = dc_init(config, rng);
  DcRun run;
  run.edges = config.windows();
  run.logs.assign(run.edges.size() - 1, RevisionLog(config.agents));
  run.red.reserve(static_cast<std::size_t>(config.steps) + 1);
  run.red.push_back(st.red);

  // Without misreads a consensus can never be left; the rest of the run is
  // filled in without stepping.
  const bool absorbing = config.failure == RecognitionFailure::drop;
  std::size_t w = 0;
  for (long long t = 0; t < config.steps; ++t) {
    while (t >= run.edges[w + 1]) ++w;
    RevisionLog& log = run.logs[w];
    const int before = st.red;
    if (absorbing && (before == 0 || before == config.agents)) {
      for (std::size_t v = w; v + 1 < run.edges.size(); ++v) {
        const long long lo = std::max(t, run.edges[v]);
        run.logs[v].visits[before] += static_cast<std::uint64_t>(run.edges[v + 1] - lo);
      }
      run.red.resize(static_cast<std::size_t>(config.steps) + 1, before);
      break;
    }
    const int delta = dc_step(st, config, rng);
    ++log.visits[before];
    if (delta > 0) ++log.r_b[before];
    if (delta < 0) ++log.r_r[before];
    run.red.push_back(st.red);
  }
  return run;
}

ScenarioConfig ensemble_member(const ScenarioConfig& config, std::size_t i, double s0_lo, double s0_hi) {
  Rng draw(derive_seed(config.seed, i));
  ScenarioConfig c = config;
  c.initial_red = s0_lo + (s0_hi - s0_lo) * draw.uniform();
  c.seed = draw.next();
  return c;
}

DcEnsemble dc_ensemble(const ScenarioConfig& config, std::size_t runs, double s0_lo, double s0_hi) {
  config.validate();
  if (!(0.0 <= s0_lo && s0_lo <= s0_hi && s0_hi <= 1.0)) {
    throw std::invalid_argument("scenario ensemble: need 0 <= s0_lo <= s0_hi <= 1");
  }
  DcEnsemble out;
  out.edges = config.windows();
  std::vector<std::vector<RevisionLog>> per_run(runs);
  parallel_for(runs, [&](std::size_t i) {
    per_run[i] = dc_run(ensemble_member(config, i, s0_lo, s0_hi)).logs;
  });
  out.logs.assign(out.edges.size() - 1, RevisionLog(config.agents));
  for (const auto& logs : per_run) {
    for (std::size_t w = 0; w < logs.size(); ++w) out.logs[w] += logs[w];
  }
  return out;
}

std::vector<DriftWindow> dc_drift_windows(const std::vector<long long>& edges, const std::vector<RevisionLog>& logs,
                                          std::uint64_t min_revisions, double pole_mask) {
  if (edges.size() != logs.size() + 1) throw std::invalid_argument("drift windows: edges and logs disagree");
  std::vector<DriftWindow> out;
  for (std::size_t w = 0; w < logs.size(); ++w) {
    const double mask = pole_mask < 0.0 ? 1.5 / logs[w].n : pole_mask;
    out.push_back({0.5 * static_cast<double>(edges[w] + edges[w + 1]), drift_dataset(logs[w], min_revisions, mask)});
  }
  return out;
}

}  // namespace swarmcalc
