#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "douglab/bounds.hpp"
#include "douglab/experiment.hpp"
#include "douglab/sim.hpp"
#include "douglab/transport.hpp"
#include "douglab/verify.hpp"

namespace py = pybind11;
using namespace douglab;

namespace {

StepSchedule make_schedule(double alpha, long long K, double xi) {
  return StepSchedule(alpha, K, xi);
}

}  // namespace

PYBIND11_MODULE(_douglab, m) {
  m.doc() = "SA / discrete-OU laboratory: simulation engines, Wasserstein "
            "estimators and the finite-time bound evaluators";

  py::register_exception<SingularSystem>(m, "SingularSystem");
  py::register_exception<NotPd>(m, "NotPd");
  py::register_exception<ConfigError>(m, "ConfigurationError");

  // linalg
  m.def("solve_lyapunov", &solve_lyapunov, py::arg("a"), py::arg("q"),
        "Solve A^T X + X A + Q = 0");
  m.def("is_hurwitz", &is_hurwitz, py::arg("a"));
  m.def("spd_sqrt",
        [](const Matrix& s) { return spd_sqrt(SpdMatrix(s)); }, py::arg("s"));
  m.def("symmetric_eigen", [](const Matrix& s) {
    const EigenDecomposition e = symmetric_eigen(s);
    return py::make_tuple(e.values, e.vectors);
  });
  m.def("v_norm", [](const Vector& x, const Matrix& v) {
    return v_norm(x, SpdMatrix(v));
  });
  m.def("v_operator_norm", [](const Matrix& u, const Matrix& v) {
    return v_operator_norm(u, SpdMatrix(v));
  });

  // schedule
  py::class_<StepSchedule>(m, "StepSchedule")
      .def(py::init(&make_schedule), py::arg("alpha"), py::arg("K"), py::arg("xi"))
      .def("step", &StepSchedule::step)
      .def_readonly("alpha", &StepSchedule::alpha)
      .def_readonly("K", &StepSchedule::K)
      .def_readonly("xi", &StepSchedule::xi);
  m.def("drift_matrix", &drift_matrix, py::arg("schedule"), py::arg("k"), py::arg("j"));
  m.def("limit_drift", &limit_drift, py::arg("schedule"), py::arg("j"));

  // transport
  m.def("w1_1d", [](const Matrix& x, const Matrix& y, int bootstrap) {
    const W1Estimate e = w1_1d(x, y, bootstrap);
    return py::make_tuple(e.value, e.stderr_);
  }, py::arg("x"), py::arg("y"), py::arg("bootstrap") = 200);
  m.def("w1_exact_matching", [](const Matrix& x, const Matrix& y, int bootstrap) {
    const W1Estimate e = w1_exact_matching(x, y, bootstrap);
    return py::make_tuple(e.value, e.stderr_);
  }, py::arg("x"), py::arg("y"), py::arg("bootstrap") = 200);
  m.def("w1_sliced",
        [](const Matrix& x, const Matrix& y, int nproj, std::uint64_t seed) {
          RandomStream rng(seed, 0);
          const W1Estimate e = w1_sliced(x, y, nproj, rng, 0);
          return e.value;
        },
        py::arg("x"), py::arg("y"), py::arg("n_projections") = 256,
        py::arg("seed") = 1);
  m.def("w1_gaussian_1d", &w1_gaussian_1d);
  m.def("sample_gaussian", [](const Matrix& sigma, long long n, std::uint64_t seed) {
    RandomStream rng(seed, 0);
    return sample_gaussian(SpdMatrix(sigma), n, rng);
  }, py::arg("sigma"), py::arg("n"), py::arg("seed") = 1);
  m.def("normal_ccdf", &normal_ccdf);

  // bounds
  m.def("tail_sandwich", [](double a, const Vector& zeta, double w1, const Matrix& sigma) {
    const TailSandwich t = tail_sandwich(a, zeta, w1, SpdMatrix(sigma));
    return py::make_tuple(t.lower, t.upper);
  }, py::arg("a"), py::arg("zeta"), py::arg("w1"), py::arg("sigma"));
  m.def("rec_sol_closed_form",
        [](double u0, double mu1, double mu2, double mu3, double rho1,
           double rho2, const StepSchedule& s, long long k) {
          const FlaggedValue v = rec_sol_closed_form(u0, mu1, mu2, mu3, rho1, rho2, s, k);
          return py::make_tuple(v.value, v.hypotheses_ok);
        });
  m.def("clt_rate", [](long long k, const StepSchedule& s, double c) {
    const FlaggedValue v = clt_rate(k, s, c);
    return py::make_tuple(v.value, v.hypotheses_ok);
  });

  // config-driven pipelines (JSON text in, file artifacts out)
  m.def("run_command", [](const std::string& cmd, const std::string& config_json,
                          const std::string& out_dir) {
    const ExperimentConfig cfg = parse_config_text(config_json);
    if (cmd == "simulate") return cmd_simulate(cfg, out_dir);
    if (cmd == "doug") return cmd_doug(cfg, out_dir);
    if (cmd == "w1") return cmd_w1(cfg, out_dir);
    if (cmd == "bounds") return cmd_bounds(cfg, out_dir);
    if (cmd == "rates") return cmd_rates(cfg, out_dir);
    if (cmd == "tails") return cmd_tails(cfg, out_dir);
    if (cmd == "clt") return cmd_clt(cfg, out_dir);
    throw ConfigError("unknown command " + cmd);
  }, py::arg("cmd"), py::arg("config_json"), py::arg("out_dir"));

  m.def("verify", [](const std::string& selector) {
    py::list out;
    for (const auto& r : run_verify(selector)) {
      py::dict d;
      d["id"] = r.id;
      d["pass"] = r.pass;
      d["detail"] = r.detail;
      d["seconds"] = r.seconds;
      out.append(d);
    }
    return out;
  }, py::arg("selector") = "");
}
