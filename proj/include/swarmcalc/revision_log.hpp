#pragma once

#include <cstdint>
#include <vector>

namespace swarmcalc {

/// Per-state counts of observed decision revisions. Index k is the state
/// with k committed agents (blue marbles) out of n, i.e. s = k / n.
/// r_b counts revisions towards option A (red -> blue), r_r the reverse,
/// and visits the number of observed events in that state.
struct RevisionLog {
  int n = 0;
  std::vector<std::uint64_t> r_b;
  std::vector<std::uint64_t> r_r;
  std::vector<std::uint64_t> visits;

  RevisionLog() = default;
  explicit RevisionLog(int n_states_minus_one)
      : n(n_states_minus_one),
        r_b(static_cast<std::size_t>(n_states_minus_one) + 1, 0),
        r_r(static_cast<std::size_t>(n_states_minus_one) + 1, 0),
        visits(static_cast<std::size_t>(n_states_minus_one) + 1, 0) {}

  std::size_t states() const { return r_b.size(); }

  std::uint64_t total_revisions() const {
    std::uint64_t sum = 0;
    for (std::size_t k = 0; k < states(); ++k) sum += r_b[k] + r_r[k];
    return sum;
  }

  RevisionLog& operator+=(const RevisionLog& other);

  /// Throws std::invalid_argument if the vectors disagree in size or any
  /// state has more revisions than visits.
  void validate() const;
};

}  // namespace swarmcalc
