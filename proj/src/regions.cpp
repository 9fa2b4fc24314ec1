#include "aloha/regions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aloha::regions {
namespace {

void check_rates(const SystemParams& params, std::span<const double> lambda) {
    require_same_size(params.queues(), lambda.size(), "arrival rate vector");
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        if (!(lambda[j] >= 0.0) || !std::isfinite(lambda[j])) {
            throw std::invalid_argument("arrival rate lambda_" + std::to_string(j + 1) +
                                        " must be finite and nonnegative");
        }
    }
}

bool all_below(const std::vector<double>& values, double bound) {
    return std::all_of(values.begin(), values.end(), [bound](double v) { return v < bound; });
}

bool unstable_original(const std::vector<double>& values, double tol) {
    if (values.size() == 1) return values[0] > 1.0 + tol;
    if (!(values[0] < 1.0 - tol)) return false;
    return std::all_of(values.begin() + 1, values.end(), [tol](double v) { return v > 1.0 + tol; });
}

bool unstable_dominant(const std::vector<double>& values, double tol) {
    return std::any_of(values.begin(), values.end(), [tol](double v) { return v > 1.0 + tol; });
}

MembershipVerdict found(Status status, ConstraintProfile profile) {
    MembershipVerdict verdict;
    verdict.status = status;
    verdict.witness = profile.eta;
    verdict.profile = std::move(profile);
    return verdict;
}

}  // namespace

const char* to_string(Status status) noexcept {
    switch (status) {
        case Status::stable_sufficient: return "stable_sufficient";
        case Status::unstable_sufficient: return "unstable_sufficient";
        case Status::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

const char* to_string(InstabilityMode mode) noexcept {
    return mode == InstabilityMode::original ? "default" : "dominant-only";
}

InstabilityMode mode_from_string(const std::string& name) {
    if (name == "default" || name == "original") return InstabilityMode::original;
    if (name == "dominant-only" || name == "dominant_only") return InstabilityMode::dominant_only;
    throw std::invalid_argument("unknown instability mode '" + name +
                                "' (expected default|dominant-only)");
}

ConstraintProfile constraint_profile(const SystemParams& params, const Permutation& eta,
                                     std::span<const double> lambda) {
    check_rates(params, lambda);
    const auto v = v_probs(params, eta);
    ConstraintProfile profile{eta, std::vector<double>(params.queues())};
    double prefix = 0.0;  // Σ_{k<pos} λ_{η_k} / v_k
    for (std::size_t pos = 0; pos < params.queues(); ++pos) {
        const std::size_t queue = eta[pos];
        profile.values[pos] = lambda[queue] / (params.attempt(queue) * v[pos]) + prefix;
        prefix += lambda[queue] / v[pos];
    }
    return profile;
}

std::vector<Permutation> candidate_orderings(std::size_t queues, const RegionOptions& opts) {
    if (opts.candidates) {
        for (const auto& eta : *opts.candidates) {
            require_same_size(queues, eta.size(), "candidate ordering");
        }
        return *opts.candidates;
    }
    if (queues > opts.permutation_cap) {
        throw std::invalid_argument(
            "J = " + std::to_string(queues) + " exceeds the permutation cap of " +
            std::to_string(opts.permutation_cap) + "; supply candidate orderings explicitly");
    }
    std::vector<std::size_t> order(queues);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Permutation> all;
    do {
        all.emplace_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
    return all;
}

MembershipVerdict in_C(const SystemParams& params, std::span<const double> lambda,
                       const RegionOptions& opts) {
    check_rates(params, lambda);
    for (const auto& eta : candidate_orderings(params.queues(), opts)) {
        auto profile = constraint_profile(params, eta, lambda);
        if (all_below(profile.values, 1.0 - opts.tol)) {
            return found(Status::stable_sufficient, std::move(profile));
        }
    }
    return {};
}

MembershipVerdict in_D(const SystemParams& params, std::span<const double> lambda,
                       InstabilityMode mode, const RegionOptions& opts) {
    check_rates(params, lambda);
    for (const auto& eta : candidate_orderings(params.queues(), opts)) {
        auto profile = constraint_profile(params, eta, lambda);
        const bool hit = mode == InstabilityMode::original
                             ? unstable_original(profile.values, opts.tol)
                             : unstable_dominant(profile.values, opts.tol);
        if (hit) {
            auto verdict = found(Status::unstable_sufficient, std::move(profile));
            verdict.mode = mode;
            return verdict;
        }
    }
    return {};
}

MembershipVerdict classify(const SystemParams& params, std::span<const double> lambda,
                           InstabilityMode mode, const RegionOptions& opts) {
    auto stable = in_C(params, lambda, opts);
    if (stable.status == Status::stable_sufficient) return stable;
    return in_D(params, lambda, mode, opts);
}

std::map<std::string, Point> figure1_vertices(const SystemParams& params) {
    if (params.queues() != 3) {
        throw std::invalid_argument("figure vertices are defined for exactly three queues");
    }
    const double p1 = params.attempt(0), p2 = params.attempt(1), p3 = params.attempt(2);
    const double q1 = 1.0 - p1, q2 = 1.0 - p2, q3 = 1.0 - p3;
    return {
        {"A", {p1, 0.0, 0.0}},
        {"B", {0.0, p2, 0.0}},
        {"C", {0.0, 0.0, p3}},
        {"O", {p1 * q2 * q3, q1 * p2 * q3, q1 * q2 * p3}},
        {"alpha", {p1 * q2, q1 * p2, 0.0}},
        {"beta", {0.0, p2 * q3, q2 * p3}},
        {"gamma", {p1 * q3, 0.0, q1 * p3}},
        {"P", {p1 * q2, 0.0, 0.0}},
        {"Q", {0.0, q1 * p2, 0.0}},
        {"X", {p1 * q3, 0.0, q1 * q2 * p3}},
        {"Y", {0.0, p2 * q3, q1 * q2 * p3}},
        {"E", {0.0, q1 * p2 * q3, q1 * q2 * p3}},
        {"F", {p1 * q2 * q3, 0.0, q1 * q2 * p3}},
    };
}

std::vector<BoundaryPoint> boundary_samples(const SystemParams& params, std::size_t resolution,
                                            std::optional<Slice> slice) {
    const std::size_t n = params.queues();
    if (n != 2 && n != 3) {
        throw std::invalid_argument("boundary export supports J = 2 or 3 only");
    }
    if (resolution == 0) throw std::invalid_argument("resolution must be at least 1");
    if (slice && (slice->index >= n || !(slice->value >= 0.0))) {
        throw std::invalid_argument("slice must fix an existing coordinate at a nonnegative value");
    }

    std::vector<std::size_t> free_axes;
    for (std::size_t k = 0; k < n; ++k) {
        if (!slice || slice->index != k) free_axes.push_back(k);
    }

    // Grid of directions on the simplex spanned by the free axes.
    std::vector<Point> directions;
    const double res = static_cast<double>(resolution);
    if (free_axes.size() == 1) {
        Point d(n, 0.0);
        d[free_axes[0]] = 1.0;
        directions.push_back(d);
    } else if (free_axes.size() == 2) {
        for (std::size_t i = 0; i <= resolution; ++i) {
            Point d(n, 0.0);
            d[free_axes[0]] = static_cast<double>(resolution - i) / res;
            d[free_axes[1]] = static_cast<double>(i) / res;
            directions.push_back(d);
        }
    } else {
        for (std::size_t a = 0; a <= resolution; ++a) {
            for (std::size_t b = 0; a + b <= resolution; ++b) {
                Point d(n, 0.0);
                d[0] = static_cast<double>(resolution - a - b) / res;
                d[1] = static_cast<double>(a) / res;
                d[2] = static_cast<double>(b) / res;
                directions.push_back(d);
            }
        }
    }

    Point base(n, 0.0);
    if (slice) base[slice->index] = slice->value;
    const auto point_at = [&](const Point& d, double t) {
        Point lambda = base;
        for (std::size_t k = 0; k < n; ++k) lambda[k] += t * d[k];
        return lambda;
    };
    const auto inside = [&](const Point& lambda) {
        return in_C(params, lambda).status == Status::stable_sufficient;
    };

    std::vector<BoundaryPoint> out;
    if (!inside(base)) return out;
    for (const auto& d : directions) {
        // C lies inside [0,1)^J and each direction has a component of at least 1/J.
        double lo = 0.0;
        double hi = static_cast<double>(n) + 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-9 * hi + 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            (inside(point_at(d, mid)) ? lo : hi) = mid;
        }
        BoundaryPoint bp{point_at(d, lo), Permutation::identity(n), 0};
        const auto verdict = in_C(params, bp.lambda);
        bp.witness = *verdict.witness;
        const auto& values = verdict.profile->values;
        bp.active_constraint =
            static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                     values.begin()) + 1;
        out.push_back(std::move(bp));
    }
    return out;
}

double symmetric_sup_lambda(double p, std::size_t queues) {
    if (queues == 0) throw std::invalid_argument("need at least one queue");
    const std::vector<double> ones(queues, 1.0);
    const auto params = SystemParams::bernoulli(std::vector<double>(queues, p),
                                                std::vector<double>(queues, 0.0));
    // With λ = 1 the profile holds each constraint's coefficient on λ.
    const auto coeffs = constraint_profile(params, Permutation::identity(queues), ones).values;
    double sup = 1.0 / coeffs[0];
    for (double c : coeffs) sup = std::min(sup, 1.0 / c);
    return sup;
}

}  // namespace aloha::regions
