#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aloha {

/// Raised when an exhaustive enumeration or a dense representation would
/// exceed its configured budget. `required()` reports the size that was asked for.
class BudgetError : public std::length_error {
public:
    BudgetError(const std::string& what, std::uint64_t required, std::uint64_t budget)
        : std::length_error(what + " (required " + std::to_string(required) + ", budget " +
                            std::to_string(budget) + ")"),
          required_(required), budget_(budget) {}

    std::uint64_t required() const noexcept { return required_; }
    std::uint64_t budget() const noexcept { return budget_; }

private:
    std::uint64_t required_;
    std::uint64_t budget_;
};

/// Finite-support batch arrival law for one queue.
class ArrivalDist {
public:
    using Atom = std::pair<std::uint64_t, double>;

    explicit ArrivalDist(std::vector<Atom> pmf);

    /// One arrival with probability `rate`, none otherwise.
    static ArrivalDist bernoulli(double rate);

    const std::vector<Atom>& pmf() const noexcept { return pmf_; }
    double mean() const noexcept { return mean_; }
    std::uint64_t max_batch() const noexcept { return max_batch_; }

    /// Inverse-CDF draw from a uniform variate in [0,1).
    std::uint64_t sample(double uniform) const noexcept;

private:
    std::vector<Atom> pmf_;
    std::vector<double> cdf_;
    double mean_ = 0.0;
    std::uint64_t max_batch_ = 0;
};

using QueueState = std::vector<std::uint64_t>;

/// A reordering of the queues. Stored zero-based: `order[pos]` is the queue
/// placed at position `pos`. Text and JSON forms are one-based.
class Permutation {
public:
    explicit Permutation(std::vector<std::size_t> order);
    static Permutation identity(std::size_t size);
    /// Parse from one-based labels.
    static Permutation from_one_based(std::span<const std::size_t> labels);

    std::size_t size() const noexcept { return order_.size(); }
    std::size_t operator[](std::size_t pos) const noexcept { return order_[pos]; }
    const std::vector<std::size_t>& order() const noexcept { return order_; }
    std::vector<std::size_t> one_based() const;
    bool is_identity() const noexcept;

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::size_t> order_;
};

class SystemParams {
public:
    SystemParams(std::vector<double> attempt, std::vector<ArrivalDist> arrivals);

    /// Bernoulli arrivals with the given rates.
    static SystemParams bernoulli(std::vector<double> attempt, std::span<const double> rates);

    std::size_t queues() const noexcept { return p_.size(); }
    const std::vector<double>& attempt() const noexcept { return p_; }
    double attempt(std::size_t j) const noexcept { return p_[j]; }
    const std::vector<ArrivalDist>& arrivals() const noexcept { return arrivals_; }
    const ArrivalDist& arrival(std::size_t j) const noexcept { return arrivals_[j]; }

    /// Arrival means λ_j.
    std::vector<double> rates() const;

    /// Queues relabelled so that new queue `pos` is old queue `eta[pos]`.
    SystemParams permuted(const Permutation& eta) const;

private:
    std::vector<double> p_;
    std::vector<ArrivalDist> arrivals_;
};

/// Relabel any per-queue vector into permutation order.
template <typename T>
std::vector<T> permute(std::span<const T> values, const Permutation& eta) {
    std::vector<T> out;
    out.reserve(eta.size());
    for (std::size_t pos = 0; pos < eta.size(); ++pos) out.push_back(values[eta[pos]]);
    return out;
}

/// Probability that no queue placed after each position attempts, real or dummy:
/// entry pos = Π_{m>pos} (1 − p_{η_m}). The last entry is 1.
std::vector<double> v_probs(const SystemParams& params, const Permutation& eta);
std::vector<double> v_probs(const SystemParams& params);

/// Probability that no real packet is sent from queues before j (identity order).
std::vector<double> u_probs(const SystemParams& params, std::span<const std::uint64_t> q);

/// Per-queue success probability r_j = u_j p_j v_j 1{Q_j > 0} in the dominant system.
std::vector<double> success_probs(const SystemParams& params, std::span<const std::uint64_t> q);

std::vector<bool> busy_signature(std::span<const std::uint64_t> q);

/// Signature packed into a bitmask; bit j set iff Q_j > 0. Requires J ≤ 63.
std::uint64_t signature_mask(std::span<const std::uint64_t> q);

/// Representative {0,1}^J state of a signature mask.
QueueState state_of_mask(std::uint64_t mask, std::size_t queues);

void require_same_size(std::size_t expected, std::size_t got, const char* what);

}  // namespace aloha
