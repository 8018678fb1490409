#include "swarmcalc/urn.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "swarmcalc/parallel.hpp"

namespace swarmcalc {

RevisionLog& RevisionLog::operator+=(const RevisionLog& other) {
  if (other.n != n || other.states() != states()) {
    throw std::invalid_argument("revision logs over different state spaces");
  }
  for (std::size_t k = 0; k < states(); ++k) {
    r_b[k] += other.r_b[k];
    r_r[k] += other.r_r[k];
    visits[k] += other.visits[k];
  }
  return *this;
}

void RevisionLog::validate() const {
  const auto size = static_cast<std::size_t>(n) + 1;
  if (n < 1 || r_b.size() != size || r_r.size() != size || visits.size() != size) {
    throw std::invalid_argument("revision log: inconsistent state count");
  }
  for (std::size_t k = 0; k < size; ++k) {
    if (r_b[k] + r_r[k] > visits[k]) {
      std::ostringstream msg;
      msg << "revision log: state " << k << " has more revisions than visits";
      throw std::invalid_argument(msg.str());
    }
  }
}

UrnKernel::UrnKernel(const DriftSpec& spec) : n_(spec.n) {
  if (spec.payoff.max_value() > 1.0) {
    throw std::invalid_argument("urn simulation: payoff values above 1 cannot be read as probabilities");
  }
  const auto size = static_cast<std::size_t>(n_) + 1;
  blue_.resize(size);
  positive_.resize(size);
  payoff_.resize(size);
  for (int b = 0; b <= n_; ++b) {
    const double s = static_cast<double>(b) / n_;
    blue_[b] = s;
    positive_[b] = spec.feedback(s);
    payoff_[b] = spec.payoff(s);
  }
}

StepEvent UrnKernel::step(int b, Rng& rng) const {
  StepEvent ev{};
  ev.drawn = rng.uniform() < blue_[b] ? Color::blue : Color::red;
  ev.feedback = rng.uniform() < positive_[b] ? FeedbackSign::positive : FeedbackSign::negative;
  const double m = payoff_[b];
  ev.payoff_magnitude = (m >= 1.0 || rng.uniform() < m) ? 1 : 0;

  // Blue with positive feedback or red with negative feedback adds a blue marble.
  const bool adds_blue = (ev.drawn == Color::blue) == (ev.feedback == FeedbackSign::positive);
  int delta = adds_blue ? ev.payoff_magnitude : -ev.payoff_magnitude;
  if ((delta > 0 && b == n_) || (delta < 0 && b == 0)) delta = 0;
  ev.delta_b = delta;
  return ev;
}

std::pair<UrnState, StepEvent> step(const UrnState& state, const DriftSpec& spec, Rng& rng) {
  if (state.n != spec.n || state.b < 0 || state.b > state.n) {
    throw std::invalid_argument("urn state inconsistent with spec");
  }
  const UrnKernel kernel(spec);
  const StepEvent ev = kernel.step(state.b, rng);
  return {UrnState{state.b + ev.delta_b, state.n}, ev};
}

void SimConfig::validate() const {
  if (steps < 0) throw std::invalid_argument("simulation: steps must be nonnegative");
  if (replicates < 1) throw std::invalid_argument("simulation: need at least one replicate");
  const int n = spec.n;
  const int hi = init.center_pair ? n / 2 + 1 : init.b;
  const int lo = init.center_pair ? n / 2 : init.b;
  if (lo < 0 || hi > n) throw std::invalid_argument("simulation: initial blue count outside [0, N]");
}

namespace {

template <class Visit>
int walk(const UrnKernel& kernel, int b, long long steps, Rng& rng, Visit&& visit) {
  for (long long t = 0; t < steps; ++t) {
    const int delta = kernel.step(b, rng).delta_b;
    visit(b, delta);
    b += delta;
  }
  return b;
}

}  // namespace

std::vector<int> run_trajectory(const SimConfig& config, std::size_t replicate) {
  config.validate();
  const UrnKernel kernel(config.spec);
  Rng rng(derive_seed(config.seed, replicate));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(config.steps) + 1);
  int b = config.init.for_replicate(replicate, config.spec.n);
  out.push_back(b);
  for (long long t = 0; t < config.steps; ++t) {
    b += kernel.step(b, rng).delta_b;
    out.push_back(b);
  }
  return out;
}

std::vector<int> final_states(const SimConfig& config) {
  config.validate();
  const UrnKernel kernel(config.spec);
  std::vector<int> out(config.replicates);
  parallel_for(config.replicates, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, i));
    out[i] = walk(kernel, config.init.for_replicate(i, config.spec.n), config.steps, rng, [](int, int) {});
  });
  return out;
}

std::vector<DriftSample> measure_drift(const SimConfig& config, std::uint64_t samples_per_state) {
  if (samples_per_state < 1) throw std::invalid_argument("measure_drift: need at least one sample per state");
  const UrnKernel kernel(config.spec);
  const int n = config.spec.n;
  std::vector<DriftSample> out(static_cast<std::size_t>(n) + 1);
  parallel_for(out.size(), [&](std::size_t k) {
    Rng rng(derive_seed(config.seed, k));
    const int b = static_cast<int>(k);
    long long sum = 0;
    long long sum_sq = 0;
    for (std::uint64_t i = 0; i < samples_per_state; ++i) {
      const int d = kernel.step(b, rng).delta_b;
      sum += d;
      sum_sq += d * d;
    }
    const auto count = static_cast<double>(samples_per_state);
    const double mean = sum / count;
    const double var = samples_per_state > 1 ? (sum_sq - count * mean * mean) / (count - 1.0) : 0.0;
    out[k] = {static_cast<double>(b) / n, mean, std::sqrt(std::max(var, 0.0) / count)};
  });
  return out;
}

RevisionLog record_revisions(const SimConfig& config) {
  config.validate();
  const UrnKernel kernel(config.spec);
  std::vector<RevisionLog> logs(config.replicates, RevisionLog(config.spec.n));
  parallel_for(config.replicates, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, i));
    RevisionLog& log = logs[i];
    walk(kernel, config.init.for_replicate(i, config.spec.n), config.steps, rng, [&](int b, int delta) {
      ++log.visits[b];
      if (delta > 0) ++log.r_b[b];
      if (delta < 0) ++log.r_r[b];
    });
  });
  RevisionLog total(config.spec.n);
  for (const auto& log : logs) total += log;
  return total;
}

RevisionLog sample_revisions(const DriftSpec& spec, std::uint64_t samples_per_state, std::uint64_t seed) {
  if (samples_per_state < 1) throw std::invalid_argument("sample_revisions: need at least one sample per state");
  const UrnKernel kernel(spec);
  RevisionLog log(spec.n);
  parallel_for(log.states(), [&](std::size_t k) {
    Rng rng(derive_seed(seed, k));
    const int b = static_cast<int>(k);
    for (std::uint64_t i = 0; i < samples_per_state; ++i) {
      const int d = kernel.step(b, rng).delta_b;
      if (d > 0) ++log.r_b[k];
      if (d < 0) ++log.r_r[k];
    }
    log.visits[k] = samples_per_state;
  });
  return log;
}

std::vector<double> occupancy(const SimConfig& config) {
  const RevisionLog log = record_revisions(config);
  std::vector<double> out(log.states());
  double total = 0.0;
  for (auto v : log.visits) total += static_cast<double>(v);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = total > 0.0 ? log.visits[k] / total : 0.0;
  return out;
}

Histogram ensemble_histogram(FeedbackFamily family, const std::vector<double>& phis, const SimConfig& config) {
  Histogram hist;
  hist.phis = phis;
  hist.n = config.spec.n;
  for (std::size_t j = 0; j < phis.size(); ++j) {
    SimConfig column = config;
    column.spec.feedback = FeedbackProfile::with_intensity(family, phis[j]);
    column.seed = derive_seed(config.seed, j);
    const auto finals = final_states(column);
    std::vector<double> counts(static_cast<std::size_t>(hist.n) + 1, 0.0);
    for (int b : finals) counts[b] += 1.0;
    const double total = static_cast<double>(finals.size());
    for (double& c : counts) c /= total;
    hist.columns.push_back(std::move(counts));
  }
  return hist;
}

double SwitchingEstimate::std_error() const {
  return completed > 0 ? stddev / std::sqrt(static_cast<double>(completed)) : 0.0;
}

SwitchingEstimate estimate_switching_time(const SimConfig& config, double s_from, double s_to,
                                          long long max_steps, std::size_t replicates) {
  check_consensus(s_from);
  check_consensus(s_to);
  if (max_steps < 0) throw std::invalid_argument("switching time: max_steps must be nonnegative");
  const UrnKernel kernel(config.spec);
  const int n = config.spec.n;
  const int from = static_cast<int>(std::lround(s_from * n));
  const int to = static_cast<int>(std::lround(s_to * n));

  // -1 marks a censored run.
  std::vector<long long> times(replicates, -1);
  parallel_for(replicates, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, i));
    int b = from;
    long long t = 0;
    while (b != to && t < max_steps) {
      b += kernel.step(b, rng).delta_b;
      ++t;
    }
    if (b == to) times[i] = t;
  });

  SwitchingEstimate est;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long long t : times) {
    if (t < 0) {
      ++est.censored;
      continue;
    }
    ++est.completed;
    sum += static_cast<double>(t);
    sum_sq += static_cast<double>(t) * static_cast<double>(t);
  }
  if (est.completed > 0) {
    const double count = static_cast<double>(est.completed);
    const double mean = sum / count;
    est.mean = mean;
    est.stddev = est.completed > 1 ? std::sqrt(std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0))) : 0.0;
  }
  return est;
}

}  // namespace swarmcalc
