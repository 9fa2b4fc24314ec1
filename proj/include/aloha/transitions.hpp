#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "aloha/model.hpp"
#include "aloha/simulate.hpp"

namespace aloha {

inline constexpr std::uint64_t kDefaultOutcomeBudget = std::uint64_t{1} << 22;

/// Number of joint (attempt pattern, arrival batch) outcomes of one slot.
inline std::uint64_t outcome_count(const SystemParams& params) {
    if (params.queues() >= 63) return UINT64_MAX;
    std::uint64_t count = std::uint64_t{1} << params.queues();
    for (const auto& a : params.arrivals()) {
        const std::uint64_t s = a.pmf().size();
        if (count > UINT64_MAX / s) return UINT64_MAX;
        count *= s;
    }
    return count;
}

/// Calls `visit(probability, next_state)` once for every joint outcome of one
/// slot from state `q`. With `cap`, each next coordinate is clipped to it.
template <typename Visitor>
void for_each_transition(const SystemParams& params, const QueueState& q, sim::System system,
                         Visitor&& visit, std::optional<std::uint64_t> cap = std::nullopt,
                         std::uint64_t budget = kDefaultOutcomeBudget) {
    const std::size_t n = params.queues();
    require_same_size(n, q.size(), "queue state");
    const std::uint64_t needed = outcome_count(params);
    if (needed > budget) throw BudgetError("one-slot outcome enumeration too large", needed, budget);

    std::vector<bool> attempts(n);
    std::vector<bool> dep(n);
    std::vector<std::size_t> digit(n);
    QueueState next(n);
    for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << n); ++pattern) {
        double p_attempt = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            attempts[j] = (pattern >> j) & 1U;
            p_attempt *= attempts[j] ? params.attempt(j) : 1.0 - params.attempt(j);
        }
        sim::departures(system, q, attempts, dep);

        std::fill(digit.begin(), digit.end(), 0);
        while (true) {
            double prob = p_attempt;
            for (std::size_t j = 0; j < n; ++j) {
                const auto& [batch, pb] = params.arrival(j).pmf()[digit[j]];
                prob *= pb;
                next[j] = q[j] - (dep[j] ? 1U : 0U) + batch;
                if (cap) next[j] = std::min(next[j], *cap);
            }
            if (prob > 0.0) visit(prob, static_cast<const QueueState&>(next));

            std::size_t j = 0;
            while (j < n && ++digit[j] == params.arrival(j).pmf().size()) digit[j++] = 0;
            if (j == n) break;
        }
    }
}

}  // namespace aloha
