#include "swarmcalc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "swarmcalc/errors.hpp"

namespace swarmcalc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

Dataset Dataset::from(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || (!w.empty() && w.size() != x.size())) {
    throw std::invalid_argument("dataset: column lengths differ");
  }
  Dataset d;
  d.rows.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d.rows.push_back({x[i], y[i], w.empty() ? 1.0 : w[i]});
  return d;
}

std::size_t Dataset::weighted_rows() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const DataRow& r) { return r.w > 0.0; }));
}

double Dataset::max_x() const {
  double m = -kInf;
  for (const auto& r : rows) m = std::max(m, r.x);
  return m;
}

double Dataset::max_y() const {
  double m = -kInf;
  for (const auto& r : rows) m = std::max(m, r.y);
  return m;
}

Dataset Dataset::restricted(double lo, double hi) const {
  Dataset out{name, {}};
  for (const auto& r : rows) {
    if (r.x >= lo && r.x <= hi) out.rows.push_back(r);
  }
  return out;
}

void Dataset::validate() const {
  if (rows.empty()) throw std::invalid_argument("dataset '" + name + "' is empty");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.w) || r.w < 0.0) {
      std::ostringstream msg;
      msg << "dataset '" << name << "': row " << i + 1 << " has a non-finite value or negative weight";
      throw std::invalid_argument(msg.str());
    }
  }
}

std::size_t ModelSpec::index(const std::string& name) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name == name) return i;
  }
  throw std::invalid_argument("model " + id + " has no parameter '" + name + "'");
}

std::size_t ModelSpec::free_count() const {
  return static_cast<std::size_t>(std::count_if(params.begin(), params.end(), [](const Parameter& p) { return !p.fixed; }));
}

void ModelSpec::validate() const {
  if (!f) throw std::invalid_argument("model " + id + " has no function");
  if (free_count() == 0) throw std::invalid_argument("model " + id + " has no free parameter");
  for (const auto& p : params) {
    if (!(p.lower <= p.upper)) throw std::invalid_argument("parameter " + p.name + ": lower bound above upper bound");
    if (!std::isfinite(p.value)) throw std::invalid_argument("parameter " + p.name + ": initial value not finite");
    if (!p.fixed && (p.value < p.lower || p.value > p.upper)) {
      throw std::invalid_argument("parameter " + p.name + ": initial value outside its bounds");
    }
  }
}

void apply_overrides(ModelSpec& model, const std::map<std::string, double>& init,
                     const std::map<std::string, double>& fixed) {
  for (const auto& [name, v] : init) model.param(name).value = v;
  for (const auto& [name, v] : fixed) {
    auto& p = model.param(name);
    p.value = v;
    p.fixed = true;
  }
}

std::size_t FitResult::index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw std::invalid_argument("fit result has no parameter '" + name + "'");
}

std::map<std::string, double> FitResult::parameter_map() const {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = values[i];
  return out;
}

Eigen::MatrixXd numeric_jacobian(const ModelFunction& f, const std::vector<DataRow>& rows, std::span<const double> p,
                                 double scale) {
  std::vector<double> q(p.begin(), p.end());
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.size()));
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double h = 1e-6 * std::max(std::abs(p[j]), 1.0) * scale;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      q[j] = p[j] + h;
      const double hi = f(rows[i].x, q);
      q[j] = p[j] - h;
      const double lo = f(rows[i].x, q);
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (hi - lo) / (2.0 * h);
    }
    q[j] = p[j];
  }
  return jac;
}

std::vector<double> asymptotic_stderr(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& weights,
                                      const Eigen::VectorXd& residuals, int dof) {
  if (dof < 1) throw std::invalid_argument("standard errors need dof >= 1");
  const auto k = jacobian.cols();
  std::vector<double> out(static_cast<std::size_t>(k), kInf);
  const Eigen::MatrixXd a = jacobian.transpose() * weights.asDiagonal() * jacobian;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!a.allFinite() || !lu.isInvertible()) return out;
  const Eigen::MatrixXd cov = lu.inverse();
  const double chi2 = residuals.cwiseProduct(residuals).dot(weights);
  const double variance = chi2 / dof;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double v = cov(j, j) * variance;
    out[static_cast<std::size_t>(j)] = v >= 0.0 && std::isfinite(v) ? std::sqrt(v) : kInf;
  }
  return out;
}

namespace {

struct Problem {
  const ModelFunction& f;
  const std::vector<DataRow>& rows;
  Eigen::VectorXd w;

  Eigen::VectorXd residuals(std::span<const double> p) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) r[static_cast<Eigen::Index>(i)] = rows[i].y - f(rows[i].x, p);
    return r;
  }

  double chi2(const Eigen::VectorXd& r) const { return r.cwiseProduct(r).dot(w); }
};

struct Minimum {
  int iterations = 0;
  bool converged = false;
  std::string message;
};

// Levenberg-Marquardt over the free entries of p, with Marquardt's diagonal
// scaling and steps projected into the bounds.
Minimum minimize(const Problem& prob, std::vector<double>& p, const std::vector<Parameter>& params,
                 const std::vector<std::size_t>& free, const LmOptions& opt, std::vector<TraceEntry>& trace,
                 int iteration_offset) {
  const auto k = static_cast<Eigen::Index>(free.size());
  auto project = [&](std::size_t j, double v) { return std::clamp(v, params[j].lower, params[j].upper); };
  auto free_jacobian = [&](std::span<const double> q) {
    const Eigen::MatrixXd full = numeric_jacobian(prob.f, prob.rows, q);
    Eigen::MatrixXd jac(full.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) jac.col(c) = full.col(static_cast<Eigen::Index>(free[c]));
    return jac;
  };

  Eigen::VectorXd r = prob.residuals(p);
  double chi2 = prob.chi2(r);
  if (!std::isfinite(chi2)) throw NumericalError("fit: model is not finite at the initial parameters");
  double y_norm = 0.0;
  for (std::size_t i = 0; i < prob.rows.size(); ++i) {
    y_norm += prob.w[static_cast<Eigen::Index>(i)] * prob.rows[i].y * prob.rows[i].y;
  }

  double lambda = opt.lambda0;
  Minimum out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    const Eigen::MatrixXd jac = free_jacobian(p);
    const Eigen::MatrixXd a = jac.transpose() * prob.w.asDiagonal() * jac;
    const Eigen::VectorXd g = jac.transpose() * prob.w.asDiagonal() * r;
    if (!a.allFinite() || !g.allFinite()) throw NumericalError("fit: Jacobian is not finite");
    Eigen::VectorXd diag = a.diagonal();
    for (Eigen::Index c = 0; c < k; ++c) {
      if (!(diag[c] > 0.0)) diag[c] = 1.0;
    }

    bool accepted = false;
    bool solved_once = false;
    while (lambda <= opt.lambda_max) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd delta = damped.ldlt().solve(g);
      if (!delta.allFinite()) {
        trace.push_back({iteration_offset + it, chi2, lambda, false});
        lambda *= opt.lambda_factor;
        continue;
      }
      solved_once = true;
      std::vector<double> trial = p;
      for (Eigen::Index c = 0; c < k; ++c) trial[free[c]] = project(free[c], p[free[c]] + delta[c]);
      const Eigen::VectorXd r_trial = prob.residuals(trial);
      const double chi2_trial = prob.chi2(r_trial);
      if (std::isfinite(chi2_trial) && chi2_trial < chi2) {
        trace.push_back({iteration_offset + it, chi2_trial, lambda, true});
        const double reduction = (chi2 - chi2_trial) / std::max(chi2_trial, std::numeric_limits<double>::min());
        p = std::move(trial);
        r = r_trial;
        chi2 = chi2_trial;
        lambda = std::max(lambda / opt.lambda_factor, 1e-12);
        accepted = true;
        if (reduction < opt.rel_tolerance || chi2 <= 1e-28 * y_norm) {
          out.converged = true;
          out.message = "relative chi2 change below tolerance";
          return out;
        }
        break;
      }
      trace.push_back({iteration_offset + it, chi2_trial, lambda, false});
      lambda *= opt.lambda_factor;
    }
    if (!accepted) {
      if (!solved_once) {
        std::ostringstream msg;
        msg << "fit: damped normal equations singular up to lambda " << opt.lambda_max;
        throw NumericalError(msg.str());
      }
      out.converged = true;
      out.message = "chi2 cannot be reduced further";
      return out;
    }
  }
  out.message = "iteration limit reached";
  return out;
}

}  // namespace

FitResult levenberg_marquardt(const ModelSpec& model, const Dataset& data, std::span<const double> init,
                              const LmOptions& options) {
  if (init.size() != model.params.size()) throw std::invalid_argument("fit: initial vector has wrong length");
  ModelSpec m = model;
  for (std::size_t j = 0; j < init.size(); ++j) m.params[j].value = init[j];
  return levenberg_marquardt(m, data, options);
}

FitResult levenberg_marquardt(const ModelSpec& model, const Dataset& data, const LmOptions& options) {
  model.validate();
  data.validate();

  std::vector<DataRow> rows = data.rows;
  std::sort(rows.begin(), rows.end(),
            [](const DataRow& l, const DataRow& r) { return std::tie(l.x, l.y, l.w) < std::tie(r.x, r.y, r.w); });
  Eigen::VectorXd w(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) w[static_cast<Eigen::Index>(i)] = rows[i].w;
  const Problem prob{model.f, rows, w};

  const auto n_weighted = static_cast<int>(data.weighted_rows());
  if (n_weighted - static_cast<int>(model.free_count()) < 1) {
    std::ostringstream msg;
    msg << "fit " << model.id << ": " << n_weighted << " weighted rows for " << model.free_count()
        << " free parameters leaves no degrees of freedom";
    throw std::invalid_argument(msg.str());
  }

  FitResult res;
  res.model = model.id;
  res.formula = model.formula;
  std::vector<double> p;
  for (const auto& par : model.params) {
    res.names.push_back(par.name);
    res.initial.push_back(par.value);
    res.fixed.push_back(par.fixed);
    p.push_back(par.value);
  }
  res.at_bound.assign(p.size(), false);

  std::vector<Parameter> params = model.params;
  Minimum min;
  int iterations = 0;
  for (;;) {
    std::vector<std::size_t> free;
    for (std::size_t j = 0; j < params.size(); ++j) {
      if (!params[j].fixed) free.push_back(j);
    }
    if (free.empty()) break;
    min = minimize(prob, p, params, free, options, res.trace, iterations);
    iterations += min.iterations;

    // Clamp-and-refit: pin free parameters sitting on a bound.
    bool pinned = false;
    for (std::size_t j : free) {
      if (p[j] == params[j].lower || p[j] == params[j].upper) {
        params[j].fixed = true;
        res.at_bound[j] = true;
        pinned = true;
      }
    }
    if (!pinned) break;
  }

  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (!params[j].fixed) free.push_back(j);
  }
  res.values = p;
  res.iterations = iterations;
  res.converged = min.converged || free.empty();
  res.message = free.empty() ? "all parameters at bounds" : min.message;
  res.dof = n_weighted - static_cast<int>(free.size());

  const Eigen::VectorXd r = prob.residuals(p);
  res.chi2 = prob.chi2(r);
  res.rms = std::sqrt(res.chi2 / res.dof);
  res.std_errors.assign(p.size(), 0.0);
  if (!free.empty()) {
    const Eigen::MatrixXd full = numeric_jacobian(prob.f, rows, p);
    Eigen::MatrixXd jac(full.rows(), static_cast<Eigen::Index>(free.size()));
    for (std::size_t c = 0; c < free.size(); ++c) jac.col(static_cast<Eigen::Index>(c)) = full.col(static_cast<Eigen::Index>(free[c]));
    const auto se = asymptotic_stderr(jac, w, r, res.dof);
    for (std::size_t c = 0; c < free.size(); ++c) res.std_errors[free[c]] = se[c];
  }
  res.percent_errors.resize(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    res.percent_errors[j] = p[j] != 0.0 ? 100.0 * res.std_errors[j] / std::abs(p[j]) : (res.std_errors[j] > 0.0 ? kInf : 0.0);
  }
  return res;
}

void require_converged(const FitResult& result) {
  if (result.converged) return;
  std::ostringstream msg;
  msg << "fit " << result.model << " did not converge after " << result.iterations << " iterations ("
      << result.message << ")";
  const std::size_t tail = std::min<std::size_t>(result.trace.size(), 5);
  for (std::size_t i = result.trace.size() - tail; i < result.trace.size(); ++i) {
    const auto& t = result.trace[i];
    msg << "\n  iter " << t.iteration << " chi2 " << t.chi2 << " lambda " << t.lambda << (t.accepted ? " accepted" : " rejected");
  }
  throw NumericalError(msg.str());
}

double evaluate(const ModelSpec& model, const FitResult& result, double x) {
  return model.f(x, result.values);
}

std::string format_fit_table(const FitResult& r) {
  std::ostringstream out;
  out << "function                      : " << r.formula << "\n"
      << "degrees of freedom            : " << r.dof << "\n"
      << "root mean square of residuals : " << fmt("%g", r.rms) << "\n\n"
      << "parameter       value           asymptotic standard error\n"
      << "=========       =====           =========================\n";
  for (std::size_t j = 0; j < r.names.size(); ++j) {
    char line[160];
    if (r.fixed[j] || r.at_bound[j]) {
      std::snprintf(line, sizeof line, "%-15s = %-15g %s\n", r.names[j].c_str(), r.values[j],
                    r.fixed[j] ? "(fixed)" : "(at bound)");
    } else {
      std::snprintf(line, sizeof line, "%-15s = %-15g +/- %-12.4g (%.4g%%)\n", r.names[j].c_str(), r.values[j],
                    r.std_errors[j], r.percent_errors[j]);
    }
    out << line;
  }
  return out.str();
}

namespace {

Parameter free_param(std::string name, double value, double lower = -kInf, double upper = kInf) {
  return Parameter{std::move(name), std::clamp(value, lower, upper), false, lower, upper};
}

// Weighted least squares for y ~ X beta on the rows where `use` holds.
std::optional<Eigen::VectorXd> linear_fit(const std::vector<Eigen::VectorXd>& design, const std::vector<double>& y,
                                          const std::vector<double>& w) {
  if (design.empty()) return std::nullopt;
  const auto k = design.front().size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < design.size(); ++i) {
    a += w[i] * design[i] * design[i].transpose();
    b += w[i] * y[i] * design[i];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::VectorXd beta = lu.solve(b);
  if (!beta.allFinite()) return std::nullopt;
  return beta;
}

double row_weight(const DataRow& r) { return r.w > 0.0 ? r.w : 0.0; }

}  // namespace

ModelSpec performance_model(const Dataset& data) {
  const double mx = std::max(data.max_x(), 1e-300);
  ModelSpec m;
  m.id = "performance";
  m.formula = "P(x)=a1*x^b*a2*exp(c*x)";
  m.f = [](double x, std::span<const double> p) { return p[0] * std::pow(x, p[1]) * std::exp(p[2] * x); };
  m.params = {free_param("A", std::max(data.max_y() / mx, 1e-12), std::numeric_limits<double>::min()),
              free_param("b", 1.0), free_param("c", -1.0 / mx)};
  return m;
}

ModelSpec interference_model(const Dataset& data) {
  double lo = kInf;
  double hi = -kInf;
  for (const auto& r : data.rows) {
    lo = std::min(lo, r.y);
    hi = std::max(hi, r.y);
  }
  const double d0 = lo - 0.01 * (hi - lo);
  double a0 = std::max(hi - d0, 1e-12);
  double c0 = -1.0 / std::max(data.max_x(), 1e-300);
  std::vector<Eigen::VectorXd> design;
  std::vector<double> ys;
  std::vector<double> ws;
  for (const auto& r : data.rows) {
    if (r.y - d0 <= 0.0) continue;
    design.push_back(Eigen::Vector2d(1.0, r.x));
    ys.push_back(std::log(r.y - d0));
    ws.push_back(row_weight(r));
  }
  if (auto beta = linear_fit(design, ys, ws); beta && (*beta)[1] < 0.0) {
    a0 = std::exp((*beta)[0]);
    c0 = (*beta)[1];
  }
  ModelSpec m;
  m.id = "interference";
  m.formula = "I(x)=a2*exp(c*x)+d";
  m.f = [](double x, std::span<const double> p) { return p[0] * std::exp(p[1] * x) + p[2]; };
  m.params = {free_param("a2", a0), free_param("c", c0), free_param("d", d0)};
  return m;
}

ModelSpec cooperation_model(const Dataset& data, double a2, double c) {
  double a1 = 1e-3;
  double b = 1.0;
  std::vector<Eigen::VectorXd> design;
  std::vector<double> ys;
  std::vector<double> ws;
  for (const auto& r : data.rows) {
    const double base = a2 * std::exp(c * r.x);
    if (r.x <= 0.0 || r.y <= 0.0 || base <= 0.0) continue;
    design.push_back(Eigen::Vector2d(1.0, std::log(r.x)));
    ys.push_back(std::log(r.y / base));
    ws.push_back(row_weight(r));
  }
  if (auto beta = linear_fit(design, ys, ws)) {
    a1 = std::exp((*beta)[0]);
    b = (*beta)[1];
  }
  ModelSpec m;
  m.id = "cooperation";
  m.formula = "P(x)=a1*x^b*a2*exp(c*x)";
  m.f = [](double x, std::span<const double> p) { return p[0] * std::pow(x, p[1]) * p[2] * std::exp(p[3] * x); };
  m.params = {free_param("a1", a1), free_param("b", b), Parameter{"a2", a2, true}, Parameter{"c", c, true}};
  return m;
}

ModelSpec switch_time_model(const Dataset& data) {
  double mean = 0.0;
  for (const auto& r : data.rows) mean += r.y;
  mean /= std::max<std::size_t>(data.size(), 1);
  double a = std::max(mean, 1e-12);
  double b = 0.0;
  double c = 0.0;
  std::vector<Eigen::VectorXd> design;
  std::vector<double> ys;
  std::vector<double> ws;
  for (const auto& r : data.rows) {
    if (r.x <= 0.0 || r.y <= 0.0) continue;
    design.push_back(Eigen::Vector3d(1.0, std::log(r.x), r.x));
    ys.push_back(std::log(r.y));
    ws.push_back(row_weight(r) > 0.0 ? 1.0 : 0.0);
  }
  if (auto beta = linear_fit(design, ys, ws)) {
    a = std::exp((*beta)[0]);
    b = (*beta)[1];
    c = (*beta)[2];
  }
  ModelSpec m;
  m.id = "switch-times";
  m.formula = "tau(N)=a1*N^b*a2*exp(c*N)";
  m.f = [](double x, std::span<const double> p) { return p[0] * std::pow(x, p[1]) * std::exp(p[2] * x); };
  m.params = {free_param("A", a), free_param("b", b), free_param("c", c)};
  return m;
}

ModelSpec growth_model(const Dataset& data) {
  double lo = kInf;
  double hi = -kInf;
  for (const auto& r : data.rows) {
    if (r.w <= 0.0) continue;
    lo = std::min(lo, r.y);
    hi = std::max(hi, r.y);
  }
  if (!std::isfinite(hi)) lo = hi = 0.0;
  const double a = hi + 0.1 * (hi - lo) + 1e-2;
  double num = 0.0;
  double den = 0.0;
  for (const auto& r : data.rows) {
    if (r.w <= 0.0) continue;
    num += r.w * r.x * std::log(a - r.y);
    den += r.w * r.x * r.x;
  }
  const double b = den > 0.0 ? num / den : -1e-3;
  ModelSpec m;
  m.id = "feedback-growth";
  m.formula = "phi(t)=a-exp(b*t)";
  m.f = [](double x, std::span<const double> p) { return p[0] - std::exp(p[1] * x); };
  m.params = {free_param("a", a), free_param("b", b)};
  return m;
}

ModelSpec drift_model(const Dataset& data) {
  // Linear in (c2 phi, c2): drift = c2 phi 4 sin(pi s)(s - 1/2) - c2 2 (s - 1/2).
  std::vector<Eigen::VectorXd> design;
  std::vector<double> ys;
  std::vector<double> ws;
  for (const auto& r : data.rows) {
    design.push_back(Eigen::Vector2d(4.0 * std::sin(std::numbers::pi * r.x) * (r.x - 0.5), -2.0 * (r.x - 0.5)));
    ys.push_back(r.y);
    ws.push_back(row_weight(r));
  }
  double c2 = 1.0;
  double phi = 0.5;
  if (auto beta = linear_fit(design, ys, ws); beta && (*beta)[1] > 0.0) {
    c2 = (*beta)[1];
    phi = (*beta)[0] / c2;
  }
  ModelSpec m;
  m.id = "drift";
  m.formula = "dB(s)=4*c2*(phi*sin(pi*s)-0.5)*(s-0.5)";
  m.f = [](double s, std::span<const double> p) {
    return 4.0 * p[0] * (p[1] * std::sin(std::numbers::pi * s) - 0.5) * (s - 0.5);
  };
  m.params = {free_param("c2", c2, 0.0), free_param("phi", phi, 0.0, 1.0)};
  return m;
}

namespace {

ModelSpec amplitude_model(const Dataset& data, std::string id, std::string formula, double (*shape)(double)) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& r : data.rows) {
    const double g = shape(r.x);
    num += row_weight(r) * r.y * g;
    den += row_weight(r) * g * g;
  }
  ModelSpec m;
  m.id = std::move(id);
  m.formula = std::move(formula);
  m.f = [shape](double s, std::span<const double> p) { return p[0] * shape(s); };
  m.params = {free_param("phi", den > 0.0 ? num / den : 0.5, 0.0, 1.0)};
  return m;
}

}  // namespace

ModelSpec sine_feedback_model(const Dataset& data) {
  return amplitude_model(data, "sine-feedback", "P(s)=phi*sin(pi*s)",
                         [](double s) { return std::sin(std::numbers::pi * s); });
}

ModelSpec quadratic_feedback_model(const Dataset& data) {
  return amplitude_model(data, "quadratic-feedback", "P(s)=phi*(1-4*(s-0.5)^2)",
                         [](double s) { return 1.0 - 4.0 * (s - 0.5) * (s - 0.5); });
}

ModelSpec rational_feedback_model(const Dataset& data) {
  double peak = 0.0;
  for (const auto& r : data.rows) peak = std::max(peak, r.y);
  const double c1 = std::clamp(peak, 1e-3, 1.0);
  // P reaches c1 / 2 where c2 min(s, 1-s) = 1.
  double u_half = 0.25;
  for (const auto& r : data.rows) {
    const double u = std::min(r.x, 1.0 - r.x);
    if (r.y >= 0.5 * peak && u > 0.0) u_half = std::min(u_half, u);
  }
  ModelSpec m;
  m.id = "rational-feedback";
  m.formula = "P(s)=c1*(1-1/(1+c2*min(s,1-s)))";
  m.f = [](double s, std::span<const double> p) {
    return p[0] * (1.0 - 1.0 / (1.0 + p[1] * std::min(s, 1.0 - s)));
  };
  m.params = {free_param("c1", c1, 0.0, 1.0), free_param("c2", 1.0 / u_half, 0.0)};
  return m;
}

FitResult fit_performance(const Dataset& data, const LmOptions& options) {
  if (data.size() < 4) throw std::invalid_argument("performance fit needs at least 4 rows");
  return levenberg_marquardt(performance_model(data), data, options);
}

StagedFit fit_staged(const Dataset& random_data, const Dataset& full_data, const LmOptions& options) {
  StagedFit out;
  try {
    out.interference = levenberg_marquardt(interference_model(random_data), random_data, options);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("stage 1 (interference): ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("stage 1 (interference): ") + e.what());
  }
  const double a2 = out.interference.value("a2");
  const double c = out.interference.value("c");
  try {
    out.performance = levenberg_marquardt(cooperation_model(full_data, a2, c), full_data, options);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("stage 2 (cooperation): ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("stage 2 (cooperation): ") + e.what());
  }
  return out;
}

FitResult fit_narrow(const Dataset& data, double lo, double hi, double a2, double c, const LmOptions& options) {
  if (!(lo <= hi)) throw std::invalid_argument("narrow fit: empty interval");
  const Dataset inside = data.restricted(lo, hi);
  if (inside.weighted_rows() < 3) {
    std::ostringstream msg;
    msg << "narrow fit: " << inside.weighted_rows() << " weighted rows in [" << lo << ", " << hi
        << "], need at least 3 for two free parameters";
    throw std::invalid_argument(msg.str());
  }
  return levenberg_marquardt(cooperation_model(inside, a2, c), inside, options);
}

FitResult fit_switch_times(const Dataset& data, const LmOptions& options) {
  if (data.size() < 4) throw std::invalid_argument("switching-time fit needs at least 4 rows");
  return levenberg_marquardt(switch_time_model(data), data, options);
}

double growth_weight(double t) {
  if (t < 700.0) return 0.0;
  if (t >= 3000.0) return 2.0;
  return 1.0;
}

FitResult fit_feedback_growth(const Dataset& series, const LmOptions& options) {
  if (series.weighted_rows() < 3) throw std::invalid_argument("feedback-growth fit needs at least 3 weighted points");
  FitResult r = levenberg_marquardt(growth_model(series), series, options);
  require_converged(r);
  return r;
}

}  // namespace swarmcalc
