#pragma once

// Weighted Levenberg-Marquardt least squares and the named fit recipes.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace swarmcalc {

struct DataRow {
  double x;
  double y;
  double w = 1.0;
};

struct Dataset {
  std::string name;
  std::vector<DataRow> rows;

  static Dataset from(std::span<const double> x, std::span<const double> y, std::span<const double> w = {});

  std::size_t size() const { return rows.size(); }
  std::size_t weighted_rows() const;
  double max_x() const;
  double max_y() const;
  /// Rows with lo <= x <= hi.
  Dataset restricted(double lo, double hi) const;
  /// Throws std::invalid_argument on an empty set, negative or non-finite
  /// weights, or non-finite coordinates.
  void validate() const;
};

struct Parameter {
  std::string name;
  double value = 0.0;
  bool fixed = false;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

using ModelFunction = std::function<double(double x, std::span<const double> p)>;

struct ModelSpec {
  std::string id;       // performance, interference, cooperation, ...
  std::string formula;  // printed in fit tables
  ModelFunction f;
  std::vector<Parameter> params;

  std::size_t index(const std::string& name) const;
  Parameter& param(const std::string& name) { return params[index(name)]; }
  const Parameter& param(const std::string& name) const { return params[index(name)]; }
  std::size_t free_count() const;
  /// Throws std::invalid_argument when no parameter is free, a bound pair is
  /// inverted or an initial value lies outside its bounds.
  void validate() const;
};

/// Sets initial values and fixes parameters by name. Unknown names throw
/// std::invalid_argument.
void apply_overrides(ModelSpec& model, const std::map<std::string, double>& init,
                     const std::map<std::string, double>& fixed);

struct LmOptions {
  double lambda0 = 1e-3;
  double lambda_factor = 10.0;
  int max_iterations = 200;
  double rel_tolerance = 1e-9;
  double lambda_max = 1e12;
};

struct TraceEntry {
  int iteration;
  double chi2;
  double lambda;
  bool accepted;
};

struct FitResult {
  std::string model;
  std::string formula;
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> initial;
  std::vector<double> std_errors;      // 0 for fixed parameters
  std::vector<double> percent_errors;  // 100 stderr / |value|
  std::vector<bool> fixed;
  std::vector<bool> at_bound;  // free parameter pinned at a bound and refitted around
  double chi2 = 0.0;           // weighted sum of squared residuals
  double rms = 0.0;            // sqrt(chi2 / dof)
  int dof = 0;
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<TraceEntry> trace;

  std::size_t index(const std::string& name) const;
  double value(const std::string& name) const { return values[index(name)]; }
  double std_error(const std::string& name) const { return std_errors[index(name)]; }
  double percent_error(const std::string& name) const { return percent_errors[index(name)]; }
  /// Parameters as a map, for building curves or chaining fits.
  std::map<std::string, double> parameter_map() const;
};

/// Minimizes sum w (y - f(x; p))^2 over the free parameters, starting from
/// the values stored in the model. Rows are processed in sorted (x, y, w)
/// order. Steps are projected into the box bounds; a free parameter that ends
/// on a bound is fixed there and the others are refitted.
///
/// Throws std::invalid_argument when dof < 1 and NumericalError when the
/// model is not finite at the start or the damped normal equations stay
/// singular. Running out of iterations returns converged = false.
FitResult levenberg_marquardt(const ModelSpec& model, const Dataset& data, const LmOptions& options = {});

/// Same with explicit initial values for every parameter.
FitResult levenberg_marquardt(const ModelSpec& model, const Dataset& data, std::span<const double> init,
                              const LmOptions& options = {});

/// sqrt(diag((J^T W J)^-1) chi2 / dof) for the columns of a Jacobian.
/// A singular J^T W J gives infinity for every parameter.
std::vector<double> asymptotic_stderr(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& weights,
                                      const Eigen::VectorXd& residuals, int dof);

/// Central-difference Jacobian with step 1e-6 max(|p_j|, 1) times `scale`.
Eigen::MatrixXd numeric_jacobian(const ModelFunction& f, const std::vector<DataRow>& rows,
                                 std::span<const double> p, double scale = 1.0);

/// Throws NumericalError carrying the tail of the trace unless converged.
void require_converged(const FitResult& result);

/// Evaluates the fitted model of `result` at x.
double evaluate(const ModelSpec& model, const FitResult& result, double x);

/// Fit table: function, dof, rms, then value, error, percent.
std::string format_fit_table(const FitResult& result);

// Model builders with the default initial guesses of each recipe.

/// A x^b exp(c x) with A = a1 a2 > 0. Starts at (max y / max x, 1, -1 / max x).
ModelSpec performance_model(const Dataset& data);
/// a2 exp(c x) + d.
ModelSpec interference_model(const Dataset& data);
/// a1 x^b a2 exp(c x) with a2 and c fixed.
ModelSpec cooperation_model(const Dataset& data, double a2, double c);
/// A N^b exp(c N), c free in sign. Starts from a log-linear regression.
ModelSpec switch_time_model(const Dataset& data);
/// a - exp(b t).
ModelSpec growth_model(const Dataset& data);
/// 4 c2 (phi sin(pi s) - 1/2)(s - 1/2) with c2 >= 0, phi in [0, 1].
ModelSpec drift_model(const Dataset& data);
/// phi sin(pi s), phi in [0, 1].
ModelSpec sine_feedback_model(const Dataset& data);
/// phi (1 - 4 (s - 1/2)^2), phi in [0, 1].
ModelSpec quadratic_feedback_model(const Dataset& data);
/// c1 (1 - 1 / (1 + c2 min(s, 1 - s))), c1 in [0, 1], c2 >= 0.
ModelSpec rational_feedback_model(const Dataset& data);

// Recipes.

FitResult fit_performance(const Dataset& data, const LmOptions& options = {});

struct StagedFit {
  FitResult interference;
  FitResult performance;
};

/// Fits I to the random-behaviour data, then (a1, b) of the performance
/// curve with a2 and c taken from the first stage.
StagedFit fit_staged(const Dataset& random_data, const Dataset& full_data, const LmOptions& options = {});

/// (a1, b) fitted on the rows with x in [lo, hi] only, a2 and c fixed.
FitResult fit_narrow(const Dataset& data, double lo, double hi, double a2, double c, const LmOptions& options = {});

FitResult fit_switch_times(const Dataset& data, const LmOptions& options = {});

/// Weights for the feedback-growth fit: 0 before t = 700, 2 from t = 3000.
double growth_weight(double t);

FitResult fit_feedback_growth(const Dataset& series, const LmOptions& options = {});

}  // namespace swarmcalc
