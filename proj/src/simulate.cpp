#include "aloha/simulate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "aloha/drift.hpp"

namespace aloha::sim {
namespace {

// Departure rules written against raw buffers so that the run loops do not allocate.
void departures_original(std::span<const std::uint64_t> q, const std::vector<bool>& y,
                         std::vector<bool>& d) {
    const std::size_t n = q.size();
    std::size_t transmitters = 0;
    std::size_t last = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (y[j] && q[j] > 0) {
            ++transmitters;
            last = j;
        }
    }
    for (std::size_t j = 0; j < n; ++j) d[j] = false;
    if (transmitters == 1) d[last] = true;
}

void departures_dominant(std::span<const std::uint64_t> q, const std::vector<bool>& y,
                         std::vector<bool>& d) {
    const std::size_t n = q.size();
    // suffix_quiet[j]: nobody after j attempted (real or dummy)
    bool later_quiet = true;
    for (std::size_t j = n; j-- > 0;) {
        d[j] = later_quiet && y[j] && q[j] > 0;
        if (y[j]) later_quiet = false;
    }
    bool earlier_quiet = true;
    for (std::size_t j = 0; j < n; ++j) {
        if (!earlier_quiet) d[j] = false;
        if (y[j] && q[j] > 0) earlier_quiet = false;
    }
}

void apply(std::vector<std::uint64_t>& q, const SlotInputs& in, const std::vector<bool>& d) {
    for (std::size_t j = 0; j < q.size(); ++j) {
        const std::uint64_t after = q[j] - (d[j] ? 1U : 0U);
        if (in.arrivals[j] > std::numeric_limits<std::uint64_t>::max() - after) {
            throw OverflowError("queue " + std::to_string(j + 1) + " overflows 64 bits");
        }
        q[j] = after + in.arrivals[j];
    }
}

void check_inputs(const SystemParams& params, const QueueState& q, const SlotInputs& in) {
    require_same_size(params.queues(), q.size(), "queue state");
    require_same_size(params.queues(), in.attempts.size(), "attempt draws");
    require_same_size(params.queues(), in.arrivals.size(), "arrival batches");
}

void sample_into(const SystemParams& params, const CounterRng& rng, std::uint64_t slot,
                 SlotInputs& in) {
    for (std::size_t j = 0; j < params.queues(); ++j) {
        const auto idx = static_cast<std::uint32_t>(j);
        in.attempts[j] = rng.uniform(slot, CounterRng::kAttempt, idx) < params.attempt(j);
        in.arrivals[j] = params.arrival(j).sample(rng.uniform(slot, CounterRng::kArrival, idx));
    }
}

void validate_config(const SystemParams& params, const QueueState& q0, const SimConfig& cfg) {
    require_same_size(params.queues(), q0.size(), "initial state");
    if (cfg.steps == 0) throw std::invalid_argument("steps must be at least 1");
    if (cfg.trace_stride == 0) throw std::invalid_argument("trace stride must be at least 1");
}

using DepartureRule = void (*)(std::span<const std::uint64_t>, const std::vector<bool>&,
                               std::vector<bool>&);

DepartureRule rule_for(System system) {
    return system == System::original ? departures_original : departures_dominant;
}

// Advance one system through `slot`, rethrowing overflow with the slot index.
void advance(DepartureRule rule, std::vector<std::uint64_t>& q, const SlotInputs& in,
             std::vector<bool>& d, std::uint64_t slot) {
    rule(q, in.attempts, d);
    try {
        apply(q, in, d);
    } catch (const OverflowError& e) {
        throw OverflowError(std::string(e.what()) + " at slot " + std::to_string(slot));
    }
}

}  // namespace

const char* to_string(System system) noexcept {
    return system == System::original ? "original" : "dominant";
}

System system_from_string(const std::string& name) {
    if (name == "original") return System::original;
    if (name == "dominant") return System::dominant;
    throw std::invalid_argument("unknown system '" + name + "' (expected original|dominant)");
}

void departures(System system, std::span<const std::uint64_t> q, const std::vector<bool>& attempts,
                std::vector<bool>& out) {
    require_same_size(q.size(), attempts.size(), "attempt draws");
    out.resize(q.size());
    rule_for(system)(q, attempts, out);
}

bool componentwise_leq(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] > b[j]) return false;
    }
    return true;
}

SlotInputs sample_inputs(const SystemParams& params, const CounterRng& rng, std::uint64_t slot) {
    SlotInputs in{std::vector<bool>(params.queues()),
                  std::vector<std::uint64_t>(params.queues())};
    sample_into(params, rng, slot, in);
    return in;
}

StepResult step_original(const SystemParams& params, const QueueState& q, const SlotInputs& in) {
    check_inputs(params, q, in);
    StepResult out{q, std::vector<bool>(q.size())};
    departures_original(q, in.attempts, out.departures);
    apply(out.next, in, out.departures);
    return out;
}

StepResult step_dominant(const SystemParams& params, const QueueState& q, const SlotInputs& in) {
    check_inputs(params, q, in);
    StepResult out{q, std::vector<bool>(q.size())};
    departures_dominant(q, in.attempts, out.departures);
    apply(out.next, in, out.departures);
    return out;
}

SimResult run(const SystemParams& params, const QueueState& q0, const SimConfig& cfg) {
    validate_config(params, q0, cfg);
    const std::size_t n = params.queues();
    const CounterRng rng(cfg.seed);
    const DepartureRule rule = rule_for(cfg.system);

    SimResult result;
    result.max_queue = q0;
    result.departures.assign(n, 0);
    if (cfg.record_trace) result.trace.emplace();

    std::vector<double> sums(n, 0.0);
    QueueState q = q0;
    SlotInputs in{std::vector<bool>(n), std::vector<std::uint64_t>(n)};
    std::vector<bool> d(n);
    for (std::uint64_t slot = 0; slot < cfg.steps; ++slot) {
        if (result.trace && slot % cfg.trace_stride == 0) result.trace->emplace_back(slot, q);
        for (std::size_t j = 0; j < n; ++j) sums[j] += static_cast<double>(q[j]);
        sample_into(params, rng, slot, in);
        advance(rule, q, in, d, slot);
        for (std::size_t j = 0; j < n; ++j) {
            if (d[j]) ++result.departures[j];
            if (q[j] > result.max_queue[j]) result.max_queue[j] = q[j];
        }
    }
    if (result.trace && (result.trace->empty() || result.trace->back().first != cfg.steps)) {
        result.trace->emplace_back(cfg.steps, q);
    }
    result.slots = cfg.steps;
    result.final_state = std::move(q);
    result.time_avg_queue.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        result.time_avg_queue[j] = sums[j] / static_cast<double>(cfg.steps);
    }
    return result;
}

CouplingReport run_coupled_dominance(const SystemParams& params, const QueueState& q0,
                                     const SimConfig& cfg) {
    validate_config(params, q0, cfg);
    const std::size_t n = params.queues();
    const CounterRng rng(cfg.seed);
    QueueState original = q0;
    QueueState dominant = q0;
    SlotInputs in{std::vector<bool>(n), std::vector<std::uint64_t>(n)};
    std::vector<bool> d(n);
    CouplingReport report;
    for (std::uint64_t slot = 0; slot < cfg.steps; ++slot) {
        sample_into(params, rng, slot, in);
        advance(departures_original, original, in, d, slot);
        advance(departures_dominant, dominant, in, d, slot);
        if (!componentwise_leq(original, dominant)) {
            if (!report.first_violation) report.first_violation = slot;
            ++report.violations;
        }
    }
    report.slots = cfg.steps;
    return report;
}

CouplingReport run_coupled_order(const SystemParams& params, const QueueState& q0,
                                 const QueueState& q0prime, const SimConfig& cfg) {
    validate_config(params, q0, cfg);
    require_same_size(params.queues(), q0prime.size(), "second initial state");
    if (!componentwise_leq(q0, q0prime)) {
        throw std::invalid_argument("initial states are not componentwise ordered (q0 <= q0prime)");
    }
    const std::size_t n = params.queues();
    const CounterRng rng(cfg.seed);
    QueueState lower = q0;
    QueueState upper = q0prime;
    SlotInputs in{std::vector<bool>(n), std::vector<std::uint64_t>(n)};
    std::vector<bool> d(n);
    CouplingReport report;
    for (std::uint64_t slot = 0; slot < cfg.steps; ++slot) {
        sample_into(params, rng, slot, in);
        advance(departures_dominant, lower, in, d, slot);
        advance(departures_dominant, upper, in, d, slot);
        if (!componentwise_leq(lower, upper)) {
            if (!report.first_violation) report.first_violation = slot;
            ++report.violations;
        }
    }
    report.slots = cfg.steps;
    return report;
}

DriftEstimate estimate_drift_limit(const SystemParams& params, std::size_t j, const QueueState& x0,
                                   std::uint64_t horizon, std::size_t replicates,
                                   std::uint64_t seed) {
    if (j >= params.queues()) throw std::invalid_argument("Lyapunov index out of range");
    if (horizon < 1000) throw std::invalid_argument("horizon must be at least 1000 slots");
    if (replicates < 2) throw std::invalid_argument("need at least 2 replicates for a half-width");

    const double start = drift::lyapunov_value(params, j, x0);
    DriftEstimate est;
    est.per_replicate.reserve(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        SimConfig cfg{horizon, seed + r, System::dominant, false, 1};
        const auto res = run(params, x0, cfg);
        est.per_replicate.push_back(
            (drift::lyapunov_value(params, j, res.final_state) - start) /
            static_cast<double>(horizon));
    }
    double mean = 0.0;
    for (double x : est.per_replicate) mean += x;
    mean /= static_cast<double>(replicates);
    double ss = 0.0;
    for (double x : est.per_replicate) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(replicates - 1));
    est.estimate = mean;
    est.half_width = 1.96 * sd / std::sqrt(static_cast<double>(replicates));
    return est;
}

}  // namespace aloha::sim
