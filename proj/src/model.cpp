#include "swarmcalc/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace swarmcalc {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Distance to the nearer boundary; symmetric profiles are evaluated here.
double half(double s) { return std::min(s, 1.0 - s); }

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto hi = static_cast<std::size_t>(it - xs.begin());
  const auto lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

}  // namespace

double check_consensus(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    std::ostringstream msg;
    msg << "consensus value " << s << " outside [0, 1]";
    throw std::invalid_argument(msg.str());
  }
  return s;
}

FeedbackProfile FeedbackProfile::sine(double phi) {
  require(phi >= 0.0 && phi <= 1.0, "sine feedback: phi must lie in [0, 1]");
  return FeedbackProfile(SineFeedback{phi});
}

FeedbackProfile FeedbackProfile::quadratic(double phi) {
  require(phi >= 0.0 && phi <= 1.0, "quadratic feedback: phi must lie in [0, 1]");
  return FeedbackProfile(QuadraticFeedback{phi});
}

FeedbackProfile FeedbackProfile::rational(double c1, double c2) {
  // c1 <= 1 keeps P below one since the bracket is < 1 for finite c2.
  require(c1 >= 0.0 && c1 <= 1.0, "rational feedback: c1 must lie in [0, 1]");
  require(c2 >= 0.0 && std::isfinite(c2), "rational feedback: c2 must be nonnegative");
  return FeedbackProfile(RationalFeedback{c1, c2});
}

FeedbackProfile FeedbackProfile::tabulated(std::span<const double> s, std::span<const double> p) {
  require(s.size() == p.size(), "tabulated feedback: s and P differ in length");
  require(!s.empty(), "tabulated feedback: empty table");
  for (std::size_t i = 0; i < s.size(); ++i) {
    require(s[i] >= 0.0 && s[i] <= 1.0, "tabulated feedback: s outside [0, 1]");
    require(p[i] >= 0.0 && p[i] <= 1.0, "tabulated feedback: P outside [0, 1]");
    if (i > 0) require(s[i] > s[i - 1], "tabulated feedback: s must be strictly increasing");
  }
  std::vector<double> xs(s.begin(), s.end());
  std::vector<double> ys(p.begin(), p.end());

  // Kinks of P(s) and of P(1 - s), folded onto [0, 0.5].
  std::vector<double> knots{0.0, 0.5};
  for (double x : xs) knots.push_back(half(x));
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              knots.end());

  std::vector<double> values;
  values.reserve(knots.size());
  for (double u : knots) {
    values.push_back(0.5 * (interpolate(xs, ys, u) + interpolate(xs, ys, 1.0 - u)));
  }
  return FeedbackProfile(TabulatedFeedback{std::move(knots), std::move(values)});
}

FeedbackProfile FeedbackProfile::with_intensity(FeedbackFamily family, double phi) {
  switch (family) {
    case FeedbackFamily::sine:
      return sine(phi);
    case FeedbackFamily::quadratic:
      return quadratic(phi);
    default:
      throw std::invalid_argument("only sine and quadratic profiles have an intensity parameter");
  }
}

double FeedbackProfile::operator()(double s) const {
  const double u = half(s);
  return std::visit(
      overloaded{
          [u](const SineFeedback& f) { return f.phi * std::sin(kPi * u); },
          [u](const QuadraticFeedback& f) {
            const double x = u - 0.5;
            return f.phi * (1.0 - 4.0 * x * x);
          },
          [u](const RationalFeedback& f) { return f.c1 * (1.0 - 1.0 / (1.0 + f.c2 * u)); },
          [u](const TabulatedFeedback& f) { return interpolate(f.knots, f.values, u); },
      },
      v_);
}

FeedbackFamily FeedbackProfile::family() const {
  return std::visit(overloaded{
                        [](const SineFeedback&) { return FeedbackFamily::sine; },
                        [](const QuadraticFeedback&) { return FeedbackFamily::quadratic; },
                        [](const RationalFeedback&) { return FeedbackFamily::rational; },
                        [](const TabulatedFeedback&) { return FeedbackFamily::tabulated; },
                    },
                    v_);
}

std::string FeedbackProfile::describe() const {
  std::ostringstream out;
  out.precision(9);
  std::visit(overloaded{
                 [&](const SineFeedback& f) { out << "sine(phi=" << f.phi << ")"; },
                 [&](const QuadraticFeedback& f) { out << "quadratic(phi=" << f.phi << ")"; },
                 [&](const RationalFeedback& f) {
                   out << "rational(c1=" << f.c1 << ", c2=" << f.c2 << ")";
                 },
                 [&](const TabulatedFeedback& f) {
                   out << "tabulated(" << f.knots.size() << " knots)";
                 },
             },
             v_);
  return out.str();
}

PayoffProfile PayoffProfile::constant(double c) {
  require(c >= 0.0 && std::isfinite(c), "constant payoff must be nonnegative");
  return PayoffProfile(ConstantPayoff{c});
}

PayoffProfile PayoffProfile::sine(double c1, double c2) {
  // Minimum over [0, 1] is min(c2, c1 + c2).
  require(c2 >= 0.0 && c1 + c2 >= 0.0, "sine payoff must be nonnegative on [0, 1]");
  return PayoffProfile(SinePayoff{c1, c2});
}

double PayoffProfile::operator()(double s) const {
  return std::visit(overloaded{
                        [](const ConstantPayoff& m) { return m.c; },
                        [s](const SinePayoff& m) { return m.c1 * std::sin(kPi * half(s)) + m.c2; },
                    },
                    v_);
}

double PayoffProfile::max_value() const {
  return std::visit(overloaded{
                        [](const ConstantPayoff& m) { return m.c; },
                        [](const SinePayoff& m) { return std::max(m.c2, m.c1 + m.c2); },
                    },
                    v_);
}

std::string PayoffProfile::describe() const {
  std::ostringstream out;
  out.precision(9);
  std::visit(overloaded{
                 [&](const ConstantPayoff& m) { out << "constant(c=" << m.c << ")"; },
                 [&](const SinePayoff& m) { out << "sine(c1=" << m.c1 << ", c2=" << m.c2 << ")"; },
             },
             v_);
  return out.str();
}

DriftSpec::DriftSpec(FeedbackProfile feedback_, PayoffProfile payoff_, int n_)
    : feedback(std::move(feedback_)), payoff(payoff_), n(n_) {
  require(n >= 2, "drift spec: N must be at least 2");
}

double feedback_prob(const FeedbackProfile& profile, double s) { return profile(check_consensus(s)); }

double payoff(const PayoffProfile& profile, double s) { return profile(check_consensus(s)); }

double drift(const DriftSpec& spec, double s) {
  check_consensus(s);
  return 4.0 * spec.payoff(s) * (spec.feedback(s) - 0.5) * (s - 0.5);
}

namespace {

std::vector<double> scan_roots(const DriftSpec& spec) {
  const int cells = 10 * spec.n;
  auto f = [&](double s) { return drift(spec, s); };

  std::vector<double> roots{0.5};
  double x0 = 0.0;
  double f0 = f(x0);
  if (f0 == 0.0) roots.push_back(x0);
  for (int k = 1; k <= cells; ++k) {
    const double x1 = static_cast<double>(k) / cells;
    const double f1 = f(x1);
    if (f1 == 0.0) {
      roots.push_back(x1);
    } else if (f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0)) {
      double lo = x0, hi = x1, flo = f0;
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

}  // namespace

std::vector<double> drift_roots(const DriftSpec& spec) {
  std::vector<double> roots;
  const bool flat_payoff = spec.payoff.max_value() == 0.0;
  if (flat_payoff) {
    roots = {0.5};
  } else if (const auto* f = std::get_if<SineFeedback>(&spec.feedback.variant())) {
    roots = {0.5};
    if (f->phi > 0.5) {
      const double s1 = std::asin(1.0 / (2.0 * f->phi)) / kPi;
      roots.push_back(s1);
      roots.push_back(1.0 - s1);
    }
  } else if (const auto* q = std::get_if<QuadraticFeedback>(&spec.feedback.variant())) {
    // phi (1 - 4 u^2) = 1/2 with u = s - 1/2.
    roots = {0.5};
    if (q->phi > 0.5) {
      const double u = 0.5 * std::sqrt(1.0 - 1.0 / (2.0 * q->phi));
      roots.push_back(0.5 - u);
      roots.push_back(0.5 + u);
    }
  } else {
    roots = scan_roots(spec);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              roots.end());
  return roots;
}

void PerformanceParams::validate() const {
  require(a1 > 0.0, "performance: a1 must be positive");
  require(a2 > 0.0, "performance: a2 must be positive");
  require(b > 0.0, "performance: b must be positive");
  require(c < 0.0, "performance: c must be negative");
  require(d >= 0.0, "performance: d must be nonnegative");
}

double cooperation(const PerformanceParams& p, double x) {
  require(x >= 0.0, "swarm size must be nonnegative");
  return p.a1 * std::pow(x, p.b);
}

double interference(const PerformanceParams& p, double x) {
  require(x >= 0.0, "swarm size must be nonnegative");
  return p.a2 * std::exp(p.c * x) + p.d;
}

double performance(const PerformanceParams& p, double x) {
  require(x >= 0.0, "swarm size must be nonnegative");
  return p.a1 * std::pow(x, p.b) * p.a2 * std::exp(p.c * x);
}

double ehrenfest_closed_form(long long t, int n, double b0) {
  require(n >= 2, "Ehrenfest urn: N must be at least 2");
  require(t >= 0, "Ehrenfest urn: t must be nonnegative");
  require(b0 >= 0.0 && b0 <= n, "Ehrenfest urn: B0 outside [0, N]");
  const double half_n = 0.5 * n;
  return half_n + (b0 - half_n) * std::pow(1.0 - 2.0 / n, static_cast<double>(t));
}

}  // namespace swarmcalc
