#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aloha/drift.hpp"
#include "aloha/io.hpp"
#include "aloha/kernel.hpp"
#include "aloha/regions.hpp"
#include "aloha/simulate.hpp"

namespace py = pybind11;
using namespace aloha;

namespace {

SystemParams make(const std::vector<double>& p, const std::vector<double>& lambda) {
    return SystemParams::bernoulli(p, lambda);
}

std::string classify(const std::vector<double>& p, const std::vector<double>& lambda,
                     const std::string& mode, double tol) {
    regions::RegionOptions opts;
    opts.tol = tol;
    const auto params = make(p, std::vector<double>(p.size(), 0.0));
    return io::to_json(regions::classify(params, lambda, regions::mode_from_string(mode), opts)).dump();
}

std::string simulate(const std::vector<double>& p, const std::vector<double>& lambda,
                     std::uint64_t steps, std::uint64_t seed, const std::string& system,
                     std::optional<QueueState> q0) {
    sim::SimConfig cfg;
    cfg.steps = steps;
    cfg.seed = seed;
    cfg.system = sim::system_from_string(system);
    return io::to_json(sim::run(make(p, lambda), q0.value_or(QueueState(p.size(), 0)), cfg)).dump();
}

std::string dominance(const std::vector<double>& p, const std::vector<double>& lambda,
                      std::uint64_t steps, std::uint64_t seed, std::optional<QueueState> q0) {
    sim::SimConfig cfg;
    cfg.steps = steps;
    cfg.seed = seed;
    return io::to_json(sim::run_coupled_dominance(make(p, lambda), q0.value_or(QueueState(p.size(), 0)),
                                                  cfg))
        .dump();
}

std::string drift_report(const std::vector<double>& p, const std::vector<double>& lambda,
                         std::uint64_t cross_check_cap) {
    return io::to_json(drift::verify_theorem_assumptions(make(p, lambda), lambda, cross_check_cap)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.attr("__version__") = ALOHA_VERSION;

    py::register_exception<BudgetError>(m, "BudgetError", PyExc_ValueError);

    m.def("symmetric_sup_lambda", &regions::symmetric_sup_lambda, py::arg("p"), py::arg("queues"));
    m.def("classify_json", &classify, py::arg("p"), py::arg("lam"), py::arg("mode") = "default",
          py::arg("tol") = 0.0);
    m.def("constraint_values",
          [](const std::vector<double>& p, const std::vector<double>& lambda,
             std::optional<std::vector<std::size_t>> eta) {
              const auto params = make(p, lambda);
              const auto perm = eta ? Permutation::from_one_based(*eta) : Permutation::identity(p.size());
              return regions::constraint_profile(params, perm, lambda).values;
          },
          py::arg("p"), py::arg("lam"), py::arg("eta") = py::none());
    m.def("figure_vertices", [](const std::vector<double>& p) {
        return regions::figure1_vertices(make(p, std::vector<double>(p.size(), 0.0)));
    }, py::arg("p"));

    m.def("simulate_json", &simulate, py::arg("p"), py::arg("lam"), py::arg("steps"),
          py::arg("seed") = 1, py::arg("system") = "original", py::arg("q0") = py::none());
    m.def("dominance_json", &dominance, py::arg("p"), py::arg("lam"), py::arg("steps"),
          py::arg("seed") = 1, py::arg("q0") = py::none());

    m.def("lyapunov_value",
          [](const std::vector<double>& p, std::size_t j, const QueueState& q) {
              return drift::lyapunov_value(make(p, std::vector<double>(p.size(), 0.0)), j - 1, q);
          },
          py::arg("p"), py::arg("j"), py::arg("q"));
    m.def("analytic_drift",
          [](const std::vector<double>& p, const std::vector<double>& lambda, std::size_t j,
             const QueueState& q) { return drift::analytic_drift(make(p, lambda), lambda, j - 1, q); },
          py::arg("p"), py::arg("lam"), py::arg("j"), py::arg("q"));
    m.def("exact_drift",
          [](const std::vector<double>& p, const std::vector<double>& lambda, std::size_t j,
             const QueueState& q) {
              const auto params = make(p, lambda);
              const drift::StateFunction V = [&](const QueueState& s) {
                  return drift::lyapunov_value(params, j - 1, s);
              };
              return drift::exact_one_step_drift(params, V, q);
          },
          py::arg("p"), py::arg("lam"), py::arg("j"), py::arg("q"));
    m.def("transience_drift",
          [](const std::vector<double>& p, const std::vector<double>& lambda, std::size_t j, double theta,
             const QueueState& q) { return drift::transience_drift(make(p, lambda), j - 1, theta, q); },
          py::arg("p"), py::arg("lam"), py::arg("j"), py::arg("theta"), py::arg("q"));
    m.def("drift_report_json", &drift_report, py::arg("p"), py::arg("lam"),
          py::arg("cross_check_cap") = 2);

    m.def("kernel_lemma21",
          [](const std::vector<double>& p, const std::vector<double>& lambda, std::uint64_t cap,
             std::size_t j, std::size_t t1, std::size_t t2) {
              const auto params = make(p, lambda);
              const auto k = kernel::FiniteKernel::build_truncated(params, cap);
              const auto V = kernel::tabulate(k, [&](const QueueState& s) {
                  return drift::lyapunov_value(params, j - 1, s);
              });
              double worst = 0.0;
              for (std::size_t x = 0; x < k.size(); ++x) {
                  worst = std::max(worst, kernel::verify_lemma21(k, V, x, t1, t2));
              }
              return worst;
          },
          py::arg("p"), py::arg("lam"), py::arg("cap"), py::arg("j") = 1, py::arg("t1") = 2,
          py::arg("t2") = 3);
}
