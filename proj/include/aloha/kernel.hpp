#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "aloha/model.hpp"
#include "aloha/simulate.hpp"
#include "aloha/transitions.hpp"

namespace aloha::kernel {

inline constexpr std::size_t kDefaultMaxStates = 4096;

enum class ClipPolicy { clip_arrivals };

/// Dense row-stochastic transition matrix over the box {0..cap}^J.
/// States are ordered with the last coordinate varying fastest.
class FiniteKernel {
public:
    /// Exact one-slot transitions of the chosen system, with arrivals that
    /// would overshoot `cap` clipped to it.
    static FiniteKernel build_truncated(const SystemParams& params, std::uint64_t cap,
                                        sim::System system = sim::System::dominant,
                                        std::size_t max_states = kDefaultMaxStates,
                                        std::uint64_t outcome_budget = kDefaultOutcomeBudget);

    /// A user-supplied chain on states 0..n-1 (one queue, cap n-1).
    static FiniteKernel from_matrix(const std::vector<std::vector<double>>& rows);

    /// A user-supplied chain over the box {0..cap}^queues; `states[i]` labels row i.
    static FiniteKernel from_matrix(std::size_t queues, std::uint64_t cap,
                                    std::vector<QueueState> states, std::vector<double> matrix);

    std::size_t size() const noexcept { return states_.size(); }
    std::size_t queues() const noexcept { return queues_; }
    std::uint64_t cap() const noexcept { return cap_; }
    ClipPolicy clip_policy() const noexcept { return ClipPolicy::clip_arrivals; }
    const std::vector<QueueState>& states() const noexcept { return states_; }
    const QueueState& state(std::size_t i) const { return states_.at(i); }
    std::size_t index_of(std::span<const std::uint64_t> x) const;

    double operator()(std::size_t from, std::size_t to) const noexcept {
        return matrix_[from * size() + to];
    }
    std::span<const double> row(std::size_t from) const noexcept {
        return {matrix_.data() + from * size(), size()};
    }

    /// P·f (expectation after one step).
    std::vector<double> apply(std::span<const double> f) const;
    /// μ·P (distribution after one step).
    std::vector<double> propagate(std::span<const double> mu) const;

private:
    FiniteKernel(std::size_t queues, std::uint64_t cap, std::vector<QueueState> states,
                 std::vector<double> matrix);
    void validate() const;

    std::size_t queues_;
    std::uint64_t cap_;
    std::vector<QueueState> states_;
    std::vector<double> matrix_;
};

using DriftVector = std::vector<double>;

/// Tabulate a state function over the kernel's states.
std::vector<double> tabulate(const FiniteKernel& kernel,
                             const std::function<double(const QueueState&)>& V);

/// Δ^k V for every state: P^k V - V.
DriftVector drift_vector(const FiniteKernel& kernel, std::span<const double> V, std::size_t k = 1);

/// Δ^k V(x) via the k-step distribution from x.
double k_step_drift(const FiniteKernel& kernel, std::span<const double> V, std::size_t x,
                    std::size_t k);

/// Distribution after `steps` steps from state x.
std::vector<double> distribution_from(const FiniteKernel& kernel, std::size_t x, std::size_t steps);

double verify_lemma21(const FiniteKernel& kernel, std::span<const double> V, std::size_t x,
                      std::size_t t1, std::size_t t2);

double verify_corollary21(const FiniteKernel& kernel, std::span<const double> V, std::size_t x,
                          std::span<const std::size_t> steps);

struct DriftBoundReport {
    std::size_t checked = 0;
    std::size_t violations = 0;
    /// max over checked x of Δ^k V_j(x) + k ε_j (nonpositive when the bound holds).
    double max_excess = 0.0;
    double epsilon = 0.0;
    bool inconclusive = false;
};

/// Checks Δ^k V_j(x) ≤ -k ε_j on interior states with x_j ≥ k, where interior
/// means every coordinate is at most cap - k·max_batch.
DriftBoundReport verify_lemma23(const FiniteKernel& kernel, const SystemParams& params, std::size_t j,
                             std::size_t k);

struct LevelDecomposition {
    /// Distinct drift values, strictly decreasing.
    std::vector<double> levels;
    /// State indices with drift equal to each level.
    std::vector<std::vector<std::size_t>> level_sets;
    /// For each state, the index of its level.
    std::vector<std::size_t> level_of;
    /// Whether each cumulative set B_l = A_1 ∪ … ∪ A_l is a lower set of the box.
    std::vector<bool> lower;
};

LevelDecomposition level_decomposition(const FiniteKernel& kernel, std::span<const double> drift,
                                       double merge_tol = 1e-12);

/// |Δ^n V(x) - (d_L + Σ_l (d_l - d_{l+1}) Σ_{k<n} P^k(x, B_l))|.
double verify_lemma24(const FiniteKernel& kernel, std::span<const double> V,
                      const LevelDecomposition& decomposition, std::size_t x, std::size_t n);

struct MonotoneReport {
    std::size_t pairs_checked = 0;
    std::size_t violations = 0;
    bool inconclusive = false;
};

/// Counts interior comparable pairs x ≤ y with Δ^n V(x) < Δ^n V(y) - 1e-10.
MonotoneReport verify_nstep_monotone(const FiniteKernel& kernel, std::span<const double> V,
                                     std::uint64_t max_batch, std::size_t n);

/// Power iteration until ‖πP - π‖₁ ≤ tol.
std::vector<double> stationary_distribution(const FiniteKernel& kernel, double tol = 1e-12,
                                            std::size_t max_iters = 1000000);

struct OrderCheck {
    bool ordered = true;
    std::uint64_t lower_sets = 0;
    /// min over lower sets of P1(B) - P2(B).
    double worst_gap = 0.0;
};

using PartialOrder = std::function<bool(const QueueState&, const QueueState&)>;

/// Brute force over every lower set B of `points` under `leq`: first ≤_st second
/// iff P1(B) ≥ P2(B) for all B. At most 64 points.
OrderCheck check_lower_set_order(std::span<const double> first, std::span<const double> second,
                                 const std::vector<QueueState>& points,
                                 const PartialOrder& leq = {}, double tol = 1e-12);

/// Plain-text form: "n J B", n matrix rows, then n lines "index c_1 … c_J".
void write_text(std::ostream& out, const FiniteKernel& kernel);
FiniteKernel read_text(std::istream& in);

}  // namespace aloha::kernel
