#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aloha/model.hpp"
#include "aloha/rng.hpp"

namespace aloha::sim {

enum class System { original, dominant };

const char* to_string(System system) noexcept;
System system_from_string(const std::string& name);

/// Attempt draws and arrival batches for one slot.
struct SlotInputs {
    std::vector<bool> attempts;
    std::vector<std::uint64_t> arrivals;
};

struct StepResult {
    QueueState next;
    std::vector<bool> departures;
};

struct SimConfig {
    std::uint64_t steps = 1;
    std::uint64_t seed = 1;
    System system = System::dominant;
    bool record_trace = false;
    std::uint64_t trace_stride = 1;
};

struct SimResult {
    QueueState final_state;
    /// Average of Q^n over the slots n = 0 .. steps-1.
    std::vector<double> time_avg_queue;
    /// Largest value of each queue seen over Q^0 .. Q^steps.
    QueueState max_queue;
    std::vector<std::uint64_t> departures;
    std::uint64_t slots = 0;
    /// (n, Q^n) for n a multiple of the stride, plus the final state.
    std::optional<std::vector<std::pair<std::uint64_t, QueueState>>> trace;
};

struct CouplingReport {
    std::uint64_t violations = 0;
    std::uint64_t slots = 0;
    /// First slot index at which the ordering failed, if any.
    std::optional<std::uint64_t> first_violation;
};

/// A queue length would exceed the 64-bit range.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Departure indicators for one slot given the pre-slot state and attempt draws.
void departures(System system, std::span<const std::uint64_t> q, const std::vector<bool>& attempts,
                std::vector<bool>& out);

SlotInputs sample_inputs(const SystemParams& params, const CounterRng& rng, std::uint64_t slot);

/// Collision channel with only non-empty queues transmitting.
StepResult step_original(const SystemParams& params, const QueueState& q, const SlotInputs& in);

/// Queue j succeeds iff it is busy and attempts, no busy queue before it attempts,
/// and no queue after it attempts (empty queues send dummy packets).
StepResult step_dominant(const SystemParams& params, const QueueState& q, const SlotInputs& in);

SimResult run(const SystemParams& params, const QueueState& q0, const SimConfig& cfg);

/// S1 and S2 from the same start and the same inputs; counts slots where S1 > S2 somewhere.
CouplingReport run_coupled_dominance(const SystemParams& params, const QueueState& q0,
                                     const SimConfig& cfg);

/// Two dominant systems from q0 ≤ q0prime with shared inputs; counts slots where the order breaks.
CouplingReport run_coupled_order(const SystemParams& params, const QueueState& q0,
                                 const QueueState& q0prime, const SimConfig& cfg);

struct DriftEstimate {
    double estimate = 0.0;
    /// 95% normal-approximation half-width across replicates.
    double half_width = 0.0;
    std::vector<double> per_replicate;
};

/// Monte Carlo estimate of (V_j(Q^horizon) - V_j(x0)) / horizon in the dominant system.
/// `j` is zero-based. Replicate r uses seed `seed + r`.
DriftEstimate estimate_drift_limit(const SystemParams& params, std::size_t j, const QueueState& x0,
                                   std::uint64_t horizon, std::size_t replicates,
                                   std::uint64_t seed);

bool componentwise_leq(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

}  // namespace aloha::sim
