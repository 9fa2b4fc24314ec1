#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aloha/model.hpp"
#include "aloha/simulate.hpp"
#include "aloha/transitions.hpp"

namespace aloha::drift {

/// Coefficients of the linear Lyapunov function V_j: 1/(v_j p_j) on Q_j,
/// 1/v_k on Q_k for k < j, nothing after j. Indices are zero-based.
struct LyapunovSpec {
    std::size_t j = 0;
    std::vector<double> coeffs;
};

LyapunovSpec lyapunov_spec(const SystemParams& params, std::size_t j);

double lyapunov_value(const SystemParams& params, std::size_t j, std::span<const std::uint64_t> q);

/// Value of the j-th stability constraint at rates `lambda` (identity order).
double constraint_value(const SystemParams& params, std::span<const double> lambda, std::size_t j);

/// Closed-form one-step drift of V_j: constraint - 1 when Q_j ≥ 1,
/// constraint - (1 - u_j) when Q_j = 0.
double analytic_drift(const SystemParams& params, std::span<const double> lambda, std::size_t j,
                      std::span<const std::uint64_t> q);

/// E[D_j/(p_j v_j) + Σ_{k<j} D_k/v_k | Q] computed from the success probabilities.
double dhat_expectation(const SystemParams& params, std::span<const std::uint64_t> q,
                        std::size_t j);

using StateFunction = std::function<double(const QueueState&)>;

/// E[V(Q') | Q] - V(Q) by exhaustive enumeration of one slot, using the
/// arrival laws in `params`.
double exact_one_step_drift(const SystemParams& params, const StateFunction& V,
                            const QueueState& q, sim::System system = sim::System::dominant,
                            std::uint64_t budget = kDefaultOutcomeBudget);

struct DriftReport {
    /// 1 - constraint_j: the negative-drift margin on {Q_j ≥ 1}.
    std::vector<double> epsilon;
    /// Largest drift of V_j over all states.
    std::vector<double> eta_bound;
    std::vector<bool> monotone_per_queue;
    bool monotone = true;
    bool assumption21_ok = true;
    bool assumption22_ok = true;
    bool satisfied = true;
    std::vector<double> constraint_values;
    /// Largest |analytic - enumerated| drift over the cross-check grid, when run.
    std::optional<double> max_enumeration_gap;
    std::uint64_t cross_check_states = 0;
};

/// Checks the three drift-criterion assumptions for the dominant system in
/// identity order. With `cross_check_cap` > 0 the closed-form drifts are also
/// compared against enumeration on {0..cap}^J (requires `lambda` to match the
/// arrival means in `params`).
DriftReport verify_theorem_assumptions(const SystemParams& params, std::span<const double> lambda,
                                       std::uint64_t cross_check_cap = 0);

/// One-step drift of Z_j(Q, θ) = 1 - θ^{V_j(Q)}, by enumeration.
double transience_drift(const SystemParams& params, std::size_t j, double theta,
                        const QueueState& q, std::uint64_t budget = kDefaultOutcomeBudget);

struct ThetaCertificate {
    double theta = 0.0;
    /// min over the sample of the drift of Z_j at theta.
    double min_drift = 0.0;
    std::size_t states_checked = 0;
    std::string caveat;
};

/// Searches θ in [1e-6, 1 - 1e-9] maximising the minimum drift of Z_j over `sample`.
/// Returns a certificate only when that minimum exceeds `tol`.
std::optional<ThetaCertificate> find_theta_star(const SystemParams& params, std::size_t j,
                                                std::span<const QueueState> sample,
                                                double tol = 0.0);

/// All states of the box {0..cap}^J, last coordinate fastest.
std::vector<QueueState> box_states(std::size_t queues, std::uint64_t cap);

}  // namespace aloha::drift
