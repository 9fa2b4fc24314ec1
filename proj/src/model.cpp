#include "aloha/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace aloha {

void require_same_size(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) {
        throw std::invalid_argument(std::string(what) + ": expected length " +
                                    std::to_string(expected) + ", got " + std::to_string(got));
    }
}

ArrivalDist::ArrivalDist(std::vector<Atom> pmf) : pmf_(std::move(pmf)) {
    if (pmf_.empty()) throw std::invalid_argument("arrival pmf is empty");
    std::sort(pmf_.begin(), pmf_.end());
    double total = 0.0;
    for (std::size_t i = 0; i < pmf_.size(); ++i) {
        const auto& [batch, prob] = pmf_[i];
        if (i > 0 && pmf_[i - 1].first == batch) {
            throw std::invalid_argument("arrival pmf has duplicate batch size " +
                                        std::to_string(batch));
        }
        if (!(prob >= 0.0 && prob <= 1.0)) {
            throw std::invalid_argument("arrival probability outside [0,1] for batch " +
                                        std::to_string(batch));
        }
        total += prob;
        mean_ += static_cast<double>(batch) * prob;
        max_batch_ = std::max(max_batch_, batch);
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("arrival pmf sums to " + std::to_string(total) + ", not 1");
    }
    cdf_.reserve(pmf_.size());
    double acc = 0.0;
    for (const auto& atom : pmf_) {
        acc += atom.second;
        cdf_.push_back(acc);
    }
    cdf_.back() = 1.0;
}

ArrivalDist ArrivalDist::bernoulli(double rate) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw std::invalid_argument("Bernoulli arrival rate must lie in [0,1], got " +
                                    std::to_string(rate));
    }
    if (rate == 0.0) return ArrivalDist({{0, 1.0}});
    if (rate == 1.0) return ArrivalDist({{1, 1.0}});
    return ArrivalDist({{0, 1.0 - rate}, {1, rate}});
}

std::uint64_t ArrivalDist::sample(double uniform) const noexcept {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), uniform);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()),
                                           pmf_.size() - 1);
    return pmf_[idx].first;
}

Permutation::Permutation(std::vector<std::size_t> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (auto idx : order_) {
        if (idx >= order_.size() || seen[idx]) {
            throw std::invalid_argument("not a permutation of the queue indices");
        }
        seen[idx] = true;
    }
}

Permutation Permutation::identity(std::size_t size) {
    std::vector<std::size_t> order(size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    return Permutation(std::move(order));
}

Permutation Permutation::from_one_based(std::span<const std::size_t> labels) {
    std::vector<std::size_t> order;
    order.reserve(labels.size());
    for (auto label : labels) {
        if (label == 0) throw std::invalid_argument("permutation labels are one-based");
        order.push_back(label - 1);
    }
    return Permutation(std::move(order));
}

std::vector<std::size_t> Permutation::one_based() const {
    std::vector<std::size_t> out(order_);
    for (auto& idx : out) ++idx;
    return out;
}

bool Permutation::is_identity() const noexcept {
    for (std::size_t i = 0; i < order_.size(); ++i) {
        if (order_[i] != i) return false;
    }
    return true;
}

SystemParams::SystemParams(std::vector<double> attempt, std::vector<ArrivalDist> arrivals)
    : p_(std::move(attempt)), arrivals_(std::move(arrivals)) {
    if (p_.empty()) throw std::invalid_argument("system needs at least one queue");
    require_same_size(p_.size(), arrivals_.size(), "arrival distributions");
    for (std::size_t j = 0; j < p_.size(); ++j) {
        if (!(p_[j] > 0.0 && p_[j] < 1.0)) {
            throw std::invalid_argument("attempt probability p_" + std::to_string(j + 1) +
                                        " must lie strictly inside (0,1), got " +
                                        std::to_string(p_[j]));
        }
    }
}

SystemParams SystemParams::bernoulli(std::vector<double> attempt, std::span<const double> rates) {
    require_same_size(attempt.size(), rates.size(), "arrival rates");
    std::vector<ArrivalDist> arrivals;
    arrivals.reserve(rates.size());
    for (double rate : rates) arrivals.push_back(ArrivalDist::bernoulli(rate));
    return SystemParams(std::move(attempt), std::move(arrivals));
}

std::vector<double> SystemParams::rates() const {
    std::vector<double> out;
    out.reserve(arrivals_.size());
    for (const auto& a : arrivals_) out.push_back(a.mean());
    return out;
}

SystemParams SystemParams::permuted(const Permutation& eta) const {
    require_same_size(queues(), eta.size(), "permutation");
    return SystemParams(permute<double>(p_, eta), permute<ArrivalDist>(arrivals_, eta));
}

std::vector<double> v_probs(const SystemParams& params, const Permutation& eta) {
    const std::size_t n = params.queues();
    require_same_size(n, eta.size(), "permutation");
    std::vector<double> v(n, 1.0);
    for (std::size_t pos = n - 1; pos-- > 0;) {
        v[pos] = v[pos + 1] * (1.0 - params.attempt(eta[pos + 1]));
    }
    return v;
}

std::vector<double> v_probs(const SystemParams& params) {
    return v_probs(params, Permutation::identity(params.queues()));
}

std::vector<double> u_probs(const SystemParams& params, std::span<const std::uint64_t> q) {
    const std::size_t n = params.queues();
    require_same_size(n, q.size(), "queue state");
    std::vector<double> u(n, 1.0);
    for (std::size_t j = 1; j < n; ++j) {
        u[j] = u[j - 1] * (q[j - 1] > 0 ? 1.0 - params.attempt(j - 1) : 1.0);
    }
    return u;
}

std::vector<double> success_probs(const SystemParams& params, std::span<const std::uint64_t> q) {
    const auto u = u_probs(params, q);
    const auto v = v_probs(params);
    std::vector<double> r(params.queues(), 0.0);
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (q[j] > 0) r[j] = u[j] * params.attempt(j) * v[j];
    }
    return r;
}

std::vector<bool> busy_signature(std::span<const std::uint64_t> q) {
    std::vector<bool> sig(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) sig[j] = q[j] > 0;
    return sig;
}

std::uint64_t signature_mask(std::span<const std::uint64_t> q) {
    if (q.size() > 63) throw std::invalid_argument("signature masks support at most 63 queues");
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        if (q[j] > 0) mask |= std::uint64_t{1} << j;
    }
    return mask;
}

QueueState state_of_mask(std::uint64_t mask, std::size_t queues) {
    QueueState q(queues, 0);
    for (std::size_t j = 0; j < queues; ++j) q[j] = (mask >> j) & 1U;
    return q;
}

}  // namespace aloha
