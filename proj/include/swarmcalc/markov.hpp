#pragma once

// Birth-death chain of the urn: transition matrix, steady state, splitting
// probabilities and mean first passage times.

#include <Eigen/Dense>
#include <vector>

#include "swarmcalc/model.hpp"

namespace swarmcalc {

/// Tridiagonal column-stochastic matrix over states 0..n. Column j holds the
/// outgoing probabilities of state j: up[j] to j+1, down[j] to j-1, stay[j]
/// back to j.
struct TransitionMatrix {
  int n = 0;
  std::vector<double> up;
  std::vector<double> down;
  std::vector<double> stay;

  /// Chain with the given up-probabilities, down = 1 - up in the interior and
  /// self-loops completing the two boundary columns.
  static TransitionMatrix birth_death(std::vector<double> up_prob);

  std::size_t states() const { return up.size(); }
  /// T(i, j): probability of moving from state j to state i.
  double operator()(int i, int j) const;
  Eigen::MatrixXd dense() const;
  /// y = T x.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// Throws std::invalid_argument unless entries lie in [0, 1] and every
  /// column sums to 1 within 1e-12.
  void validate() const;
};

/// Up-probability 0.5 (drift(B/N) + 1) from every state. Throws
/// std::invalid_argument naming the first state where |drift| > 1.
TransitionMatrix build_transition(const DriftSpec& spec);

struct PowerIterationOptions {
  double tolerance = 1e-12;  // sup norm of successive iterates
  long long max_iterations = 1'000'000;
};

/// Stationary distribution by power iteration on the lazy chain (I + T) / 2,
/// which has the same fixed point as T but no periodicity. Starts from the
/// uniform vector. Throws NumericalError with the iteration count when the
/// tolerance is not reached.
std::vector<double> steady_state(const TransitionMatrix& t, const PowerIterationOptions& options = {});

/// pi(B) proportional to prod_{k=1..B} up(k-1) / down(k). Throws
/// NumericalError when an interior down-probability vanishes.
std::vector<double> steady_state_detailed_balance(const TransitionMatrix& t);

/// Local maxima of pi, highest first.
std::vector<int> distribution_peaks(const std::vector<double>& pi);

struct SplittingCurve {
  int a = 0;
  int b = 0;
  std::vector<double> sigma;  // sigma[x - a] for x = a..b

  double at(int x) const { return sigma.at(static_cast<std::size_t>(x - a)); }
};

/// Probability of reaching b before a from the steady state alone: the
/// cumulative integral of 1/pi between a and x, normalized over [a, b],
/// evaluated with the trapezoid rule so that a symmetric pi gives exactly 1/2
/// at the midpoint.
SplittingCurve splitting_probability(const std::vector<double>& pi, int a, int b);

/// Exact hitting probability of b before a, from the first-step equations
/// sigma(x) = up sigma(x+1) + down sigma(x-1) + stay sigma(x).
SplittingCurve splitting_exact(const TransitionMatrix& t, int a, int b);

/// Expected steps from every state to `target` (0 at the target), from the
/// sparse solve (I - Q) t = 1 over the transient states. Throws
/// NumericalError when the target is unreachable from some state.
std::vector<double> mfpt(const TransitionMatrix& t, int target);

/// Expected steps from round(N s_from) to round(N s_to).
double switching_time(const DriftSpec& spec, double s_from, double s_to);

/// Binomial(n, 1/2) probabilities; the stationary law of the Ehrenfest chain.
std::vector<double> binomial_half(int n);

/// Half the L1 distance between two distributions of equal length.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace swarmcalc
