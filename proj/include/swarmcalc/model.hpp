#pragma once

// Closed-form pieces of the swarm models: feedback and payoff profiles, the
// urn drift, the cooperation/interference performance curve, and the
// Ehrenfest mean trajectory.

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace swarmcalc {

/// Throws std::invalid_argument unless 0 <= s <= 1. Returns s.
double check_consensus(double s);

enum class FeedbackFamily { sine, quadratic, rational, tabulated };

struct SineFeedback {
  double phi;
};

struct QuadraticFeedback {
  double phi;
};

/// P(s) = c1 (1 - 1/(1 + c2 min(s, 1-s))).
struct RationalFeedback {
  double c1;
  double c2;
};

/// Piecewise-linear profile stored on the half axis [0, 0.5]; values for
/// s > 0.5 are read at 1 - s.
struct TabulatedFeedback {
  std::vector<double> knots;
  std::vector<double> values;
};

/// Probability P(s) that a drawn decision is reinforced (positive feedback).
/// Every variant is symmetric, P(s) = P(1 - s), and bounded in [0, 1].
class FeedbackProfile {
 public:
  using Variant = std::variant<SineFeedback, QuadraticFeedback, RationalFeedback, TabulatedFeedback>;

  static FeedbackProfile sine(double phi);
  static FeedbackProfile quadratic(double phi);
  static FeedbackProfile rational(double c1, double c2);
  /// Linear interpolation through (s, p) pairs, constant beyond the end
  /// points. The table is symmetrized by averaging P(s) and P(1 - s).
  static FeedbackProfile tabulated(std::span<const double> s, std::span<const double> p);
  /// Sine or quadratic profile with intensity phi.
  static FeedbackProfile with_intensity(FeedbackFamily family, double phi);

  double operator()(double s) const;

  FeedbackFamily family() const;
  const Variant& variant() const { return v_; }
  std::string describe() const;

 private:
  explicit FeedbackProfile(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct ConstantPayoff {
  double c;
};

/// M(s) = c1 sin(pi s) + c2.
struct SinePayoff {
  double c1;
  double c2;
};

/// Expected magnitude of the per-round change, M(s) >= 0 and M(s) = M(1 - s).
class PayoffProfile {
 public:
  using Variant = std::variant<ConstantPayoff, SinePayoff>;

  static PayoffProfile constant(double c = 1.0);
  static PayoffProfile sine(double c1, double c2);

  double operator()(double s) const;
  /// Largest value of M over [0, 1].
  double max_value() const;

  const Variant& variant() const { return v_; }
  std::string describe() const;

 private:
  explicit PayoffProfile(Variant v) : v_(v) {}
  Variant v_;
};

/// Feedback profile, payoff and marble count for one urn.
struct DriftSpec {
  FeedbackProfile feedback;
  PayoffProfile payoff;
  int n;

  DriftSpec(FeedbackProfile feedback, PayoffProfile payoff, int n);
};

double feedback_prob(const FeedbackProfile& profile, double s);
double payoff(const PayoffProfile& profile, double s);

/// Expected change of the blue-marble count per round,
/// 4 M(s) (P(s) - 1/2) (s - 1/2).
double drift(const DriftSpec& spec, double s);

/// Sorted consensus values where the drift vanishes. Always contains 0.5.
/// Sine and quadratic profiles use closed forms; other profiles are scanned
/// on 10 N grid cells and refined by bisection to 1e-10.
std::vector<double> drift_roots(const DriftSpec& spec);

// Swarm performance model. x is the swarm size or density axis.
struct PerformanceParams {
  double a1;  // cooperation amplitude
  double a2;  // interference amplitude
  double b;   // cooperation exponent
  double c;   // interference rate
  double d;   // interference offset

  /// Throws std::invalid_argument unless a1, a2, b > 0, c < 0 and d >= 0.
  void validate() const;
};

/// C(x) = a1 x^b.
double cooperation(const PerformanceParams& p, double x);
/// I(x) = a2 exp(c x) + d.
double interference(const PerformanceParams& p, double x);
/// Pi(x) = C(x) (I(x) - d) = a1 a2 x^b exp(c x).
double performance(const PerformanceParams& p, double x);

/// Mean blue count of the Ehrenfest urn after t rounds,
/// N/2 + (B0 - N/2) (1 - 2/N)^t.
double ehrenfest_closed_form(long long t, int n, double b0);

}  // namespace swarmcalc
