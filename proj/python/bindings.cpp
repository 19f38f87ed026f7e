#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coupledpf/filters.hpp"
#include "coupledpf/harness.hpp"
#include "coupledpf/inference.hpp"
#include "coupledpf/oracle.hpp"
#include "coupledpf/rhee_glynn.hpp"

namespace py = pybind11;
using namespace coupledpf;

namespace {

SeedKey seed_key(std::uint64_t seed, std::uint64_t replicate) {
  return SeedKey{.seed = seed, .replicate = replicate};
}

ModelPtr model_for(const std::string& id, std::size_t dim, std::size_t horizon) {
  return make_model(id, ModelOptions{.dim = dim, .horizon = horizon});
}

Scheme scheme_for(const std::string& name) { return Scheme{.kind = parse_scheme(name)}; }

Observations observations(const Matrix& y) { return Observations(y); }

std::optional<LinearGaussianSpec> lg_spec(const std::string& model, double theta, std::size_t dim,
                                          std::size_t horizon) {
  if (model == "hidden-ar") return hidden_ar_spec(theta, dim);
  if (model == "unlikely-obs") return unlikely_observation_spec(horizon);
  return std::nullopt;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coupled particle filters";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ArithmeticError);
  py::register_exception<UnsupportedOperation>(m, "UnsupportedOperation", PyExc_NotImplementedError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("philox4x32", &philox4x32, py::arg("counter"), py::arg("key"),
        "Philox4x32-10 block function.");

  m.def(
      "hilbert_key",
      [](const std::vector<double>& point, const std::vector<double>& lower, const std::vector<double>& upper,
         unsigned order) { return hilbert_key(point, BoundingBox{lower, upper}, order); },
      py::arg("point"), py::arg("lower"), py::arg("upper"), py::arg("order"));

  m.def(
      "simulate",
      [](const std::string& model, const std::vector<double>& theta, std::size_t horizon, std::uint64_t seed,
         std::size_t dim) {
        const auto mod = model_for(model, dim, horizon);
        const Parameter th = theta.empty() ? mod->default_theta() : Parameter(theta);
        auto sim = coupledpf::simulate(*mod, th, horizon, seed_key(seed, 0));
        return py::make_tuple(sim.states, sim.observations.matrix());
      },
      py::arg("model"), py::arg("theta"), py::arg("horizon"), py::arg("seed") = 1, py::arg("dim") = 1,
      "Simulated (states, observations) as arrays of shape (T+1, d_x) and (T, d_y).");

  m.def(
      "bootstrap_loglik",
      [](const std::string& model, const std::vector<double>& theta, const Matrix& y, std::size_t particles,
         std::uint64_t seed, std::uint64_t replicate, std::size_t dim) {
        const auto mod = model_for(model, dim, static_cast<std::size_t>(y.rows()));
        return bootstrap_pf(*mod, Parameter(theta), observations(y), particles, seed_key(seed, replicate)).loglik;
      },
      py::arg("model"), py::arg("theta"), py::arg("y"), py::arg("particles"), py::arg("seed") = 1,
      py::arg("replicate") = 0, py::arg("dim") = 1);

  m.def(
      "coupled_loglik",
      [](const std::string& model, const std::vector<double>& theta, const std::vector<double>& theta_tilde,
         const Matrix& y, std::size_t particles, const std::string& scheme, std::uint64_t seed,
         std::uint64_t replicate, std::size_t dim) {
        const auto mod = model_for(model, dim, static_cast<std::size_t>(y.rows()));
        const auto run = coupled_bpf(*mod, Parameter(theta), Parameter(theta_tilde), observations(y), particles,
                                     scheme_for(scheme), seed_key(seed, replicate));
        return py::make_tuple(run.trace.loglik, run.trace_tilde.loglik);
      },
      py::arg("model"), py::arg("theta"), py::arg("theta_tilde"), py::arg("y"), py::arg("particles"),
      py::arg("scheme") = "index-coupled", py::arg("seed") = 1, py::arg("replicate") = 0, py::arg("dim") = 1);

  m.def(
      "fd_score",
      [](const std::string& model, const std::vector<double>& theta, double h, const Matrix& y,
         std::size_t particles, const std::string& scheme, std::uint64_t seed, std::uint64_t replicate,
         std::size_t dim) {
        const auto mod = model_for(model, dim, static_cast<std::size_t>(y.rows()));
        return coupledpf::fd_score(*mod, Parameter(theta), 0, h, observations(y), particles, scheme_for(scheme),
                                   seed_key(seed, replicate))
            .estimate;
      },
      py::arg("model"), py::arg("theta"), py::arg("h"), py::arg("y"), py::arg("particles"),
      py::arg("scheme") = "index-coupled", py::arg("seed") = 1, py::arg("replicate") = 0, py::arg("dim") = 1);

  m.def(
      "index_coupled_matrix",
      [](const std::vector<double>& w, const std::vector<double>& w_tilde) {
        return index_coupled_build(w, w_tilde).dense();
      },
      py::arg("w"), py::arg("w_tilde"));

  m.def(
      "transport_coupling",
      [](const std::vector<double>& w, const Matrix& x, const std::vector<double>& w_tilde, const Matrix& x_tilde,
         double epsilon_frac, double alpha_target, bool symmetrized) {
        const TransportOptions opt{.epsilon_frac = epsilon_frac, .alpha_target = alpha_target};
        return symmetrized ? symmetrized_transport(w, x, w_tilde, x_tilde, opt).p
                           : coupledpf::transport_coupling(w, x, w_tilde, x_tilde, opt).p;
      },
      py::arg("w"), py::arg("x"), py::arg("w_tilde"), py::arg("x_tilde"), py::arg("epsilon_frac") = 0.05,
      py::arg("alpha_target") = 0.95, py::arg("symmetrized") = false);

  m.def(
      "kalman_loglik",
      [](const std::string& model, double theta, const Matrix& y, std::size_t dim) {
        const auto spec = lg_spec(model, theta, dim, static_cast<std::size_t>(y.rows()));
        if (!spec) throw InvalidArgument("kalman_loglik: model '" + model + "' is not linear-Gaussian");
        return kalman_filter(*spec, observations(y)).loglik;
      },
      py::arg("model"), py::arg("theta"), py::arg("y"), py::arg("dim") = 1);

  m.def(
      "kalman_smoothing_means",
      [](const std::string& model, double theta, const Matrix& y, std::size_t dim) {
        const auto spec = lg_spec(model, theta, dim, static_cast<std::size_t>(y.rows()));
        if (!spec) throw InvalidArgument("kalman_smoothing_means: model '" + model + "' is not linear-Gaussian");
        const auto s = kalman_smoother(*spec, observations(y));
        Matrix out(static_cast<Eigen::Index>(s.means.size()), static_cast<Eigen::Index>(dim));
        for (std::size_t t = 0; t < s.means.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = s.means[t].transpose();
        return out;
      },
      py::arg("model"), py::arg("theta"), py::arg("y"), py::arg("dim") = 1);

  m.def(
      "rg_estimate",
      [](const std::string& model, const std::vector<double>& theta, const Matrix& y, std::size_t particles,
         const std::string& scheme, bool rao_blackwell, bool ancestor_sampling, std::uint64_t seed,
         std::uint64_t replicate, std::size_t dim) {
        const auto mod = model_for(model, dim, static_cast<std::size_t>(y.rows()));
        RgOptions opt;
        opt.particles = particles;
        opt.scheme = scheme_for(scheme);
        opt.rao_blackwell = rao_blackwell;
        opt.ancestor_sampling = ancestor_sampling;
        const Parameter th = theta.empty() ? mod->default_theta() : Parameter(theta);
        const auto e = coupledpf::rg_estimate(*mod, th, observations(y), opt, seed_key(seed, replicate));
        py::dict out;
        out["h"] = e.h;
        out["tau"] = e.tau ? py::cast(*e.tau) : py::none();
        out["iterations"] = e.iterations_run;
        out["complete"] = e.complete;
        return out;
      },
      py::arg("model"), py::arg("theta"), py::arg("y"), py::arg("particles"), py::arg("scheme") = "index-coupled",
      py::arg("rao_blackwell") = false, py::arg("ancestor_sampling") = false, py::arg("seed") = 1,
      py::arg("replicate") = 0, py::arg("dim") = 1);

  py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def("set", [](harness::ExperimentConfig& c, const std::string& key, const std::string& value) {
        harness::apply_setting(c, key, value);
      })
      .def("canonical", &harness::ExperimentConfig::canonical)
      .def("hash", &harness::ExperimentConfig::hash)
      .def("validate", &harness::ExperimentConfig::validate);

  m.def(
      "run",
      [](const std::string& command, const harness::ExperimentConfig& config) {
        harness::RunOutput out;
        if (command == "simulate") out = harness::run_simulate(config);
        else if (command == "profile-likelihood") out = harness::run_profile(config);
        else if (command == "fd-score") out = harness::run_fd_study(config);
        else if (command == "pmmh") out = harness::run_pmmh(config);
        else if (command == "rg-smooth") out = harness::run_rg(config);
        else if (command == "validate") out = harness::run_validate(config);
        else throw InvalidArgument("unknown command '" + command + "'");
        py::dict d;
        d["csv"] = out.csv;
        d["aggregate_csv"] = out.aggregate_csv;
        d["summary_json"] = out.summary_json;
        d["exit_code"] = out.exit_code;
        return d;
      },
      py::arg("command"), py::arg("config"),
      "Runs one harness command; returns the CSV text, aggregate CSV, summary JSON and exit code.");
}
