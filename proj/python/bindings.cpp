#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swarmcalc/density.hpp"
#include "swarmcalc/errors.hpp"
#include "swarmcalc/estimation.hpp"
#include "swarmcalc/fit.hpp"
#include "swarmcalc/markov.hpp"
#include "swarmcalc/urn.hpp"

namespace py = pybind11;
using namespace swarmcalc;

namespace {

Dataset dataset(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
  return Dataset::from(x, y, w);
}

py::dict fit_dict(const FitResult& r) {
  py::dict params, errors;
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    params[py::str(r.names[i])] = r.values[i];
    errors[py::str(r.names[i])] = r.std_errors[i];
  }
  py::dict out;
  out["model"] = r.model;
  out["params"] = params;
  out["std_errors"] = errors;
  out["rms"] = r.rms;
  out["chi2"] = r.chi2;
  out["dof"] = r.dof;
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["message"] = r.message;
  out["table"] = format_fit_table(r);
  return out;
}

FeedbackFamily family_of(const std::string& name) {
  if (name == "sine") return FeedbackFamily::sine;
  if (name == "quadratic") return FeedbackFamily::quadratic;
  if (name == "rational") return FeedbackFamily::rational;
  throw std::invalid_argument("unknown feedback family: " + name);
}

}  // namespace

PYBIND11_MODULE(_swarmcalc, m) {
  m.doc() = "Urn models of collective decisions, their Markov chains and fitting recipes";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<FeedbackProfile>(m, "FeedbackProfile")
      .def_static("sine", &FeedbackProfile::sine, py::arg("phi"))
      .def_static("quadratic", &FeedbackProfile::quadratic, py::arg("phi"))
      .def_static("rational", &FeedbackProfile::rational, py::arg("c1"), py::arg("c2"))
      .def_static(
          "tabulated",
          [](const std::vector<double>& s, const std::vector<double>& p) { return FeedbackProfile::tabulated(s, p); },
          py::arg("s"), py::arg("p"))
      .def("__call__", &FeedbackProfile::operator(), py::arg("s"))
      .def("__repr__", &FeedbackProfile::describe);

  py::class_<PayoffProfile>(m, "PayoffProfile")
      .def_static("constant", &PayoffProfile::constant, py::arg("c") = 1.0)
      .def_static("sine", &PayoffProfile::sine, py::arg("c1"), py::arg("c2"))
      .def("__call__", &PayoffProfile::operator(), py::arg("s"))
      .def("__repr__", &PayoffProfile::describe);

  py::class_<DriftSpec>(m, "DriftSpec")
      .def(py::init<FeedbackProfile, PayoffProfile, int>(), py::arg("feedback"),
           py::arg("payoff") = PayoffProfile::constant(), py::arg("n") = 64)
      .def_readonly("feedback", &DriftSpec::feedback)
      .def_readonly("payoff", &DriftSpec::payoff)
      .def_readonly("n", &DriftSpec::n);

  m.def("drift", &drift, py::arg("spec"), py::arg("s"));
  m.def("drift_roots", &drift_roots, py::arg("spec"));
  m.def("ehrenfest_closed_form", &ehrenfest_closed_form, py::arg("t"), py::arg("n"), py::arg("b0"));

  py::class_<RevisionLog>(m, "RevisionLog")
      .def(py::init<int>(), py::arg("n"))
      .def_readonly("n", &RevisionLog::n)
      .def_readwrite("r_b", &RevisionLog::r_b)
      .def_readwrite("r_r", &RevisionLog::r_r)
      .def_readwrite("visits", &RevisionLog::visits)
      .def("total_revisions", &RevisionLog::total_revisions)
      .def("validate", &RevisionLog::validate);

  // Simulation.
  auto config = [](const DriftSpec& spec, long long steps, std::uint64_t seed, int b0, bool center,
                   std::size_t replicates) {
    return SimConfig{spec, steps, seed, center ? InitialCount::center() : InitialCount::at(b0), replicates};
  };
  m.def(
      "run_trajectory",
      [config](const DriftSpec& spec, long long steps, std::uint64_t seed, int b0) {
        return run_trajectory(config(spec, steps, seed, b0, false, 1));
      },
      py::arg("spec"), py::arg("steps"), py::arg("seed") = 0, py::arg("b0") = 0);
  m.def(
      "final_states",
      [config](const DriftSpec& spec, long long steps, std::size_t replicates, std::uint64_t seed, bool center) {
        return final_states(config(spec, steps, seed, 0, center, replicates));
      },
      py::arg("spec"), py::arg("steps"), py::arg("replicates"), py::arg("seed") = 0, py::arg("center") = true);
  m.def(
      "measure_drift",
      [config](const DriftSpec& spec, std::uint64_t samples_per_state, std::uint64_t seed) {
        py::list out;
        for (const auto& r : measure_drift(config(spec, 0, seed, 0, false, 1), samples_per_state)) {
          out.append(py::make_tuple(r.s, r.mean, r.std_error));
        }
        return out;
      },
      py::arg("spec"), py::arg("samples_per_state"), py::arg("seed") = 0);
  m.def("sample_revisions", &sample_revisions, py::arg("spec"), py::arg("samples_per_state"), py::arg("seed") = 0);
  m.def(
      "record_revisions",
      [config](const DriftSpec& spec, long long steps, std::size_t replicates, std::uint64_t seed) {
        return record_revisions(config(spec, steps, seed, 0, true, replicates));
      },
      py::arg("spec"), py::arg("steps"), py::arg("replicates") = 1, py::arg("seed") = 0);
  m.def(
      "occupancy",
      [config](const DriftSpec& spec, long long steps, std::size_t replicates, std::uint64_t seed) {
        return occupancy(config(spec, steps, seed, 0, true, replicates));
      },
      py::arg("spec"), py::arg("steps"), py::arg("replicates") = 1, py::arg("seed") = 0);

  // Markov chain.
  py::class_<TransitionMatrix>(m, "TransitionMatrix")
      .def_readonly("n", &TransitionMatrix::n)
      .def_readonly("up", &TransitionMatrix::up)
      .def_readonly("down", &TransitionMatrix::down)
      .def_readonly("stay", &TransitionMatrix::stay)
      .def("__call__", &TransitionMatrix::operator(), py::arg("i"), py::arg("j"));
  m.def("build_transition", &build_transition, py::arg("spec"));
  m.def(
      "steady_state", [](const TransitionMatrix& t) { return steady_state(t); }, py::arg("t"));
  m.def("steady_state_detailed_balance", &steady_state_detailed_balance, py::arg("t"));
  m.def("distribution_peaks", &distribution_peaks, py::arg("pi"));
  m.def(
      "splitting_probability",
      [](const std::vector<double>& pi, int a, int b) { return splitting_probability(pi, a, b).sigma; },
      py::arg("pi"), py::arg("a"), py::arg("b"));
  m.def(
      "splitting_exact", [](const TransitionMatrix& t, int a, int b) { return splitting_exact(t, a, b).sigma; },
      py::arg("t"), py::arg("a"), py::arg("b"));
  m.def("mfpt", &mfpt, py::arg("t"), py::arg("target"));
  m.def("switching_time", &switching_time, py::arg("spec"), py::arg("s_from"), py::arg("s_to"));
  m.def("binomial_half", &binomial_half, py::arg("n"));
  m.def("total_variation", &total_variation, py::arg("p"), py::arg("q"));

  // Fitting.
  m.def(
      "fit_performance",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
        return fit_dict(fit_performance(dataset(x, y, w)));
      },
      py::arg("x"), py::arg("y"), py::arg("w") = std::vector<double>{});
  m.def(
      "fit_narrow",
      [](const std::vector<double>& x, const std::vector<double>& y, double lo, double hi, double a2, double c) {
        return fit_dict(fit_narrow(dataset(x, y, {}), lo, hi, a2, c));
      },
      py::arg("x"), py::arg("y"), py::arg("lo"), py::arg("hi"), py::arg("a2"), py::arg("c"));
  m.def(
      "fit_switch_times",
      [](const std::vector<double>& n, const std::vector<double>& tau) {
        return fit_dict(fit_switch_times(dataset(n, tau, {})));
      },
      py::arg("n"), py::arg("tau"));
  m.def(
      "fit_curve",
      [](const std::function<double(double, std::vector<double>)>& f, const std::vector<std::string>& names,
         const std::vector<double>& init, const std::vector<double>& x, const std::vector<double>& y,
         const std::vector<double>& w) {
        if (names.size() != init.size()) throw std::invalid_argument("names and init differ in length");
        ModelSpec model;
        model.id = "custom";
        model.formula = "python callable";
        model.f = [f](double xv, std::span<const double> p) { return f(xv, std::vector<double>(p.begin(), p.end())); };
        for (std::size_t i = 0; i < names.size(); ++i) model.params.push_back({names[i], init[i]});
        return fit_dict(levenberg_marquardt(model, dataset(x, y, w)));
      },
      py::arg("f"), py::arg("names"), py::arg("init"), py::arg("x"), py::arg("y"),
      py::arg("w") = std::vector<double>{},
      "Weighted Levenberg-Marquardt fit of f(x, params) with every parameter free.");

  // Estimation.
  m.def("ratio_from_feedback", &ratio_from_feedback, py::arg("p"), py::arg("s"));
  m.def(
      "estimate_feedback",
      [](const RevisionLog& log, double pole_mask, std::uint64_t min_revisions) {
        py::list out;
        for (const auto& p : estimate_feedback(log, {pole_mask, min_revisions}).points) {
          out.append(py::make_tuple(p.s, p.p, p.revisions, to_string(p.marker)));
        }
        return out;
      },
      py::arg("log"), py::arg("pole_mask") = -1.0, py::arg("min_revisions") = 1,
      "(s, P, revisions, marker) per state; P is NaN unless the marker is 'defined'.");
  m.def(
      "fit_feedback_profile",
      [](const RevisionLog& log, const std::string& family) {
        auto [profile, fit] = fit_feedback_profile(estimate_feedback(log), family_of(family));
        return py::make_tuple(profile, fit_dict(fit));
      },
      py::arg("log"), py::arg("family") = "sine");
  m.def("predict_steady_state", &predict_steady_state, py::arg("profile"),
        py::arg("payoff") = PayoffProfile::constant(), py::arg("n") = 64);

  // Density-classification scenario.
  py::enum_<Mixing>(m, "Mixing").value("well_mixed", Mixing::well_mixed).value("grid", Mixing::grid);
  py::enum_<RecognitionFailure>(m, "RecognitionFailure")
      .value("drop", RecognitionFailure::drop)
      .value("misread", RecognitionFailure::misread);
  py::enum_<Placement>(m, "Placement").value("uniform", Placement::uniform).value("segregated", Placement::segregated);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("agents", &ScenarioConfig::agents)
      .def_readwrite("recognition_rate", &ScenarioConfig::recognition_rate)
      .def_readwrite("steps", &ScenarioConfig::steps)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("mixing", &ScenarioConfig::mixing)
      .def_readwrite("initial_red", &ScenarioConfig::initial_red)
      .def_readwrite("failure", &ScenarioConfig::failure)
      .def_readwrite("placement", &ScenarioConfig::placement)
      .def_readwrite("window_length", &ScenarioConfig::window_length)
      .def_readwrite("window_edges", &ScenarioConfig::window_edges)
      .def("windows", &ScenarioConfig::windows);

  m.def(
      "dc_run",
      [](const ScenarioConfig& c) {
        DcRun run = dc_run(c);
        return py::make_tuple(run.red, run.edges, run.logs);
      },
      py::arg("config"), "(red counts, window edges, revision logs)");
  m.def(
      "feedback_timeseries",
      [](const ScenarioConfig& c, std::size_t runs, double s0_lo, double s0_hi) {
        const DcEnsemble ens = dc_ensemble(c, runs, s0_lo, s0_hi);
        py::list out;
        for (const auto& p : feedback_timeseries(dc_drift_windows(ens.edges, ens.logs)).points) {
          out.append(py::make_tuple(p.t, p.ok, p.phi, p.phi_std_error));
        }
        return out;
      },
      py::arg("config"), py::arg("runs"), py::arg("s0_lo") = 0.05, py::arg("s0_hi") = 0.95,
      "(t, ok, phi, phi std error) per window of the pooled ensemble.");
}
