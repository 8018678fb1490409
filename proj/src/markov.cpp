#include "swarmcalc/markov.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "swarmcalc/errors.hpp"

namespace swarmcalc {

TransitionMatrix TransitionMatrix::birth_death(std::vector<double> up_prob) {
  if (up_prob.size() < 2) throw std::invalid_argument("birth-death chain needs at least two states");
  TransitionMatrix t;
  t.n = static_cast<int>(up_prob.size()) - 1;
  const auto size = up_prob.size();
  t.up.assign(size, 0.0);
  t.down.assign(size, 0.0);
  t.stay.assign(size, 0.0);
  for (std::size_t k = 0; k < size; ++k) {
    const double p = up_prob[k];
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "birth-death chain: up-probability " << p << " at state " << k << " outside [0, 1]";
      throw std::invalid_argument(msg.str());
    }
    if (k == 0) {
      t.up[k] = p;
      t.stay[k] = 1.0 - p;
    } else if (k + 1 == size) {
      t.down[k] = 1.0 - p;
      t.stay[k] = p;
    } else {
      t.up[k] = p;
      t.down[k] = 1.0 - p;
    }
  }
  return t;
}

double TransitionMatrix::operator()(int i, int j) const {
  if (i == j + 1) return up.at(j);
  if (i == j - 1) return down.at(j);
  if (i == j) return stay.at(j);
  return 0.0;
}

Eigen::MatrixXd TransitionMatrix::dense() const {
  const auto size = static_cast<Eigen::Index>(states());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index j = 0; j < size; ++j) {
    m(j, j) = stay[j];
    if (j + 1 < size) m(j + 1, j) = up[j];
    if (j > 0) m(j - 1, j) = down[j];
  }
  return m;
}

Eigen::VectorXd TransitionMatrix::apply(const Eigen::VectorXd& x) const {
  const auto size = static_cast<Eigen::Index>(states());
  Eigen::VectorXd y(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    double v = stay[i] * x[i];
    if (i > 0) v += up[i - 1] * x[i - 1];
    if (i + 1 < size) v += down[i + 1] * x[i + 1];
    y[i] = v;
  }
  return y;
}

void TransitionMatrix::validate() const {
  const auto size = static_cast<std::size_t>(n) + 1;
  if (n < 1 || up.size() != size || down.size() != size || stay.size() != size) {
    throw std::invalid_argument("transition matrix: inconsistent state count");
  }
  if (up[n] != 0.0 || down[0] != 0.0) {
    throw std::invalid_argument("transition matrix: boundary column leaves the state space");
  }
  for (std::size_t j = 0; j < size; ++j) {
    for (double v : {up[j], down[j], stay[j]}) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("transition matrix: entry outside [0, 1]");
    }
    if (std::abs(up[j] + down[j] + stay[j] - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "transition matrix: column " << j << " does not sum to 1";
      throw std::invalid_argument(msg.str());
    }
  }
}

TransitionMatrix build_transition(const DriftSpec& spec) {
  std::vector<double> p(static_cast<std::size_t>(spec.n) + 1);
  for (int b = 0; b <= spec.n; ++b) {
    const double d = drift(spec, static_cast<double>(b) / spec.n);
    if (std::abs(d) > 1.0 + 1e-12) {
      std::ostringstream msg;
      msg << "transition matrix: |drift| = " << std::abs(d) << " > 1 at state B=" << b;
      throw std::invalid_argument(msg.str());
    }
    p[b] = std::clamp(0.5 * (d + 1.0), 0.0, 1.0);
  }
  return TransitionMatrix::birth_death(std::move(p));
}

std::vector<double> steady_state(const TransitionMatrix& t, const PowerIterationOptions& options) {
  t.validate();
  const auto size = static_cast<Eigen::Index>(t.states());
  Eigen::VectorXd x = Eigen::VectorXd::Constant(size, 1.0 / static_cast<double>(size));
  for (long long it = 1; it <= options.max_iterations; ++it) {
    Eigen::VectorXd next = 0.5 * (x + t.apply(x));
    next /= next.sum();
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    if (change < options.tolerance) {
      std::vector<double> pi(x.data(), x.data() + size);
      for (double& v : pi) v = std::max(v, 0.0);
      const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
      for (double& v : pi) v /= total;
      return pi;
    }
  }
  std::ostringstream msg;
  msg << "steady state: power iteration did not converge after " << options.max_iterations << " iterations";
  throw NumericalError(msg.str());
}

std::vector<double> steady_state_detailed_balance(const TransitionMatrix& t) {
  t.validate();
  const std::size_t size = t.states();
  std::vector<double> log_pi(size, 0.0);
  for (std::size_t k = 1; k < size; ++k) {
    if (t.down[k] <= 0.0) {
      std::ostringstream msg;
      msg << "detailed balance: down-probability vanishes at state " << k;
      throw NumericalError(msg.str());
    }
    log_pi[k] = log_pi[k - 1] + std::log(t.up[k - 1]) - std::log(t.down[k]);
  }
  const double peak = *std::max_element(log_pi.begin(), log_pi.end());
  std::vector<double> pi(size);
  for (std::size_t k = 0; k < size; ++k) pi[k] = std::exp(log_pi[k] - peak);
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= total;
  return pi;
}

std::vector<int> distribution_peaks(const std::vector<double>& pi) {
  std::vector<int> peaks;
  const int size = static_cast<int>(pi.size());
  for (int k = 0; k < size; ++k) {
    const bool left = k == 0 || pi[k] > pi[k - 1];
    const bool right = k + 1 == size || pi[k] >= pi[k + 1];
    if (left && right) peaks.push_back(k);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](int i, int j) { return pi[i] > pi[j]; });
  return peaks;
}

namespace {

void check_interval(int a, int b, std::size_t states) {
  if (a < 0 || b >= static_cast<int>(states) || a >= b) {
    throw std::invalid_argument("splitting: need 0 <= a < b <= N");
  }
}

}  // namespace

SplittingCurve splitting_probability(const std::vector<double>& pi, int a, int b) {
  check_interval(a, b, pi.size());
  for (int x = a; x <= b; ++x) {
    if (!(pi[x] > 0.0)) {
      std::ostringstream msg;
      msg << "splitting: steady state vanishes at state " << x;
      throw NumericalError(msg.str());
    }
  }
  SplittingCurve curve{a, b, std::vector<double>(static_cast<std::size_t>(b - a) + 1, 0.0)};
  for (int x = a + 1; x <= b; ++x) {
    curve.sigma[x - a] = curve.sigma[x - a - 1] + 0.5 * (1.0 / pi[x - 1] + 1.0 / pi[x]);
  }
  const double total = curve.sigma.back();
  for (double& v : curve.sigma) v /= total;
  curve.sigma.back() = 1.0;
  return curve;
}

SplittingCurve splitting_exact(const TransitionMatrix& t, int a, int b) {
  t.validate();
  check_interval(a, b, t.states());
  SplittingCurve curve{a, b, std::vector<double>(static_cast<std::size_t>(b - a) + 1, 0.0)};
  curve.sigma.back() = 1.0;
  const int inner = b - a - 1;
  if (inner == 0) return curve;

  // Unknowns sigma(a+1..b-1).
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(inner);
  for (int r = 0; r < inner; ++r) {
    const int x = a + 1 + r;
    entries.emplace_back(r, r, 1.0 - t.stay[x]);
    if (r > 0) entries.emplace_back(r, r - 1, -t.down[x]);
    if (r + 1 < inner) {
      entries.emplace_back(r, r + 1, -t.up[x]);
    } else {
      rhs[r] = t.up[x];
    }
  }
  Eigen::SparseMatrix<double> m(inner, inner);
  m.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw NumericalError("splitting: first-step system is singular");
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) throw NumericalError("splitting: solve failed");
  for (int r = 0; r < inner; ++r) curve.sigma[r + 1] = std::clamp(sol[r], 0.0, 1.0);
  return curve;
}

std::vector<double> mfpt(const TransitionMatrix& t, int target) {
  t.validate();
  const int size = static_cast<int>(t.states());
  if (target < 0 || target >= size) throw std::invalid_argument("mfpt: target state outside [0, N]");

  // Full-size system with the target row pinned to t(target) = 0.
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(size);
  for (int x = 0; x < size; ++x) {
    if (x == target) {
      entries.emplace_back(x, x, 1.0);
      rhs[x] = 0.0;
      continue;
    }
    entries.emplace_back(x, x, 1.0 - t.stay[x]);
    if (x + 1 < size && t.up[x] != 0.0) entries.emplace_back(x, x + 1, -t.up[x]);
    if (x > 0 && t.down[x] != 0.0) entries.emplace_back(x, x - 1, -t.down[x]);
  }
  Eigen::SparseMatrix<double> m(size, size);
  m.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("mfpt: (I - Q) is singular, target unreachable from some state");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) throw NumericalError("mfpt: solve failed");
  std::vector<double> out(sol.data(), sol.data() + size);
  for (int x = 0; x < size; ++x) {
    if (x != target && !(out[x] > 0.0)) throw NumericalError("mfpt: target unreachable from some state");
  }
  out[target] = 0.0;
  return out;
}

double switching_time(const DriftSpec& spec, double s_from, double s_to) {
  check_consensus(s_from);
  check_consensus(s_to);
  const auto from = static_cast<std::size_t>(std::lround(s_from * spec.n));
  const int to = static_cast<int>(std::lround(s_to * spec.n));
  return mfpt(build_transition(spec), to)[from];
}

std::vector<double> binomial_half(int n) {
  if (n < 0) throw std::invalid_argument("binomial: negative n");
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    out[k] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  return out;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total variation: length mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) sum += std::abs(p[k] - q[k]);
  return 0.5 * sum;
}

}  // namespace swarmcalc
