#include "aloha/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aloha::drift {
namespace {

void check_index(const SystemParams& params, std::size_t j) {
    if (j >= params.queues()) {
        throw std::invalid_argument("Lyapunov index " + std::to_string(j + 1) + " out of range");
    }
}

constexpr std::size_t kMaxSignatureQueues = 24;
constexpr std::size_t kMaxStructuralQueues = 10;
constexpr double kMonotoneSlack = 1e-12;

}  // namespace

LyapunovSpec lyapunov_spec(const SystemParams& params, std::size_t j) {
    check_index(params, j);
    const auto v = v_probs(params);
    LyapunovSpec spec{j, std::vector<double>(params.queues(), 0.0)};
    for (std::size_t k = 0; k < j; ++k) spec.coeffs[k] = 1.0 / v[k];
    spec.coeffs[j] = 1.0 / (v[j] * params.attempt(j));
    return spec;
}

double lyapunov_value(const SystemParams& params, std::size_t j, std::span<const std::uint64_t> q) {
    require_same_size(params.queues(), q.size(), "queue state");
    const auto spec = lyapunov_spec(params, j);
    double value = 0.0;
    for (std::size_t k = 0; k <= j; ++k) value += spec.coeffs[k] * static_cast<double>(q[k]);
    return value;
}

double constraint_value(const SystemParams& params, std::span<const double> lambda, std::size_t j) {
    require_same_size(params.queues(), lambda.size(), "arrival rate vector");
    const auto spec = lyapunov_spec(params, j);
    double value = 0.0;
    for (std::size_t k = 0; k <= j; ++k) value += spec.coeffs[k] * lambda[k];
    return value;
}

double analytic_drift(const SystemParams& params, std::span<const double> lambda, std::size_t j,
                      std::span<const std::uint64_t> q) {
    require_same_size(params.queues(), q.size(), "queue state");
    const double c = constraint_value(params, lambda, j);
    if (q[j] >= 1) return c - 1.0;
    return c - (1.0 - u_probs(params, q)[j]);
}

double dhat_expectation(const SystemParams& params, std::span<const std::uint64_t> q,
                        std::size_t j) {
    const auto spec = lyapunov_spec(params, j);
    const auto r = success_probs(params, q);
    double total = 0.0;
    for (std::size_t k = 0; k <= j; ++k) total += spec.coeffs[k] * r[k];
    return total;
}

double exact_one_step_drift(const SystemParams& params, const StateFunction& V,
                            const QueueState& q, sim::System system, std::uint64_t budget) {
    const double base = V(q);
    // Neumaier-compensated sum of prob * (V(next) - V(q)).
    double sum = 0.0, carry = 0.0;
    for_each_transition(
        params, q, system,
        [&](double prob, const QueueState& next) {
            const double term = prob * (V(next) - base);
            const double t = sum + term;
            carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
            sum = t;
        },
        std::nullopt, budget);
    return sum + carry;
}

std::vector<QueueState> box_states(std::size_t queues, std::uint64_t cap) {
    std::vector<QueueState> states;
    QueueState x(queues, 0);
    while (true) {
        states.push_back(x);
        std::size_t k = queues;
        while (k > 0 && x[k - 1] == cap) x[--k] = 0;
        if (k == 0) break;
        ++x[k - 1];
    }
    return states;
}

DriftReport verify_theorem_assumptions(const SystemParams& params, std::span<const double> lambda,
                                       std::uint64_t cross_check_cap) {
    const std::size_t n = params.queues();
    require_same_size(n, lambda.size(), "arrival rate vector");
    for (double l : lambda) {
        if (!(l >= 0.0)) throw std::invalid_argument("arrival rates must be nonnegative");
    }
    if (n > kMaxSignatureQueues) {
        throw BudgetError("signature scan too large", std::uint64_t{1} << n,
                          std::uint64_t{1} << kMaxSignatureQueues);
    }

    DriftReport report;
    const std::uint64_t signatures = std::uint64_t{1} << n;
    for (std::size_t j = 0; j < n; ++j) {
        const double c = constraint_value(params, lambda, j);
        report.constraint_values.push_back(c);
        report.epsilon.push_back(1.0 - c);

        std::vector<double> drift_of(signatures);
        double eta = -std::numeric_limits<double>::infinity();
        for (std::uint64_t s = 0; s < signatures; ++s) {
            drift_of[s] = analytic_drift(params, lambda, j, state_of_mask(s, n));
            eta = std::max(eta, drift_of[s]);
        }
        report.eta_bound.push_back(eta);

        // Covering pairs s < s | bit suffice for the whole order by transitivity.
        bool monotone = true;
        for (std::uint64_t s = 0; s < signatures && monotone; ++s) {
            for (std::size_t k = 0; k < n; ++k) {
                const std::uint64_t up = s | (std::uint64_t{1} << k);
                if (up != s && drift_of[s] < drift_of[up] - kMonotoneSlack) {
                    monotone = false;
                    break;
                }
            }
        }
        report.monotone_per_queue.push_back(monotone);
        report.monotone = report.monotone && monotone;
        report.assumption21_ok = report.assumption21_ok && report.epsilon.back() > 0.0;
    }

    // Departures are single packets from busy queues, so Q_j cannot reach 0
    // in fewer than Q_j slots. Confirmed by enumeration where affordable.
    if (n <= kMaxStructuralQueues) {
        std::vector<bool> attempts(n);
        std::vector<bool> dep(n);
        for (std::uint64_t s = 0; s < signatures && report.assumption22_ok; ++s) {
            const auto q = state_of_mask(s, n);
            for (std::uint64_t y = 0; y < signatures; ++y) {
                for (std::size_t k = 0; k < n; ++k) attempts[k] = (y >> k) & 1U;
                sim::departures(sim::System::dominant, q, attempts, dep);
                std::size_t count = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (dep[k]) {
                        ++count;
                        if (q[k] == 0) report.assumption22_ok = false;
                    }
                }
                if (count > 1) report.assumption22_ok = false;
            }
        }
    }

    if (cross_check_cap > 0) {
        const auto rates = params.rates();
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(rates[j] - lambda[j]) > 1e-12) {
                throw std::invalid_argument(
                    "cross-check needs lambda equal to the arrival means in params");
            }
        }
        double gap = 0.0;
        const auto states = box_states(n, cross_check_cap);
        for (const auto& q : states) {
            for (std::size_t j = 0; j < n; ++j) {
                const double exact = exact_one_step_drift(
                    params, [&](const QueueState& x) { return lyapunov_value(params, j, x); }, q);
                gap = std::max(gap, std::abs(exact - analytic_drift(params, lambda, j, q)));
            }
        }
        report.max_enumeration_gap = gap;
        report.cross_check_states = states.size();
    }

    report.satisfied = report.assumption21_ok && report.assumption22_ok && report.monotone;
    return report;
}

double transience_drift(const SystemParams& params, std::size_t j, double theta,
                        const QueueState& q, std::uint64_t budget) {
    check_index(params, j);
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("theta must lie strictly inside (0,1)");
    }
    const double log_theta = std::log(theta);
    const double v_now = lyapunov_value(params, j, q);
    // θ^V - E θ^{V'} = θ^V E[1 - θ^{V'-V}], with expm1 to keep precision near θ = 1.
    double acc = 0.0;
    for_each_transition(
        params, q, sim::System::dominant,
        [&](double prob, const QueueState& next) {
            const double jump = lyapunov_value(params, j, next) - v_now;
            acc += prob * -std::expm1(jump * log_theta);
        },
        std::nullopt, budget);
    return std::exp(v_now * log_theta) * acc;
}

std::optional<ThetaCertificate> find_theta_star(const SystemParams& params, std::size_t j,
                                                std::span<const QueueState> sample, double tol) {
    check_index(params, j);
    if (sample.empty()) throw std::invalid_argument("state sample must not be empty");

    const auto worst = [&](double theta) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& q : sample) m = std::min(m, transience_drift(params, j, theta, q));
        return m;
    };
    // Search over s = log10(1 - θ) so that the region near θ = 1 is resolved.
    constexpr double kLowTheta = 1e-6;
    constexpr double kHighTheta = 1.0 - 1e-9;
    const double s_min = std::log10(1.0 - kHighTheta);
    const double s_max = std::log10(1.0 - kLowTheta);
    const auto theta_of = [](double s) { return 1.0 - std::pow(10.0, s); };

    constexpr int kGrid = 240;
    double best_s = s_min;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
        const double s = s_min + (s_max - s_min) * i / kGrid;
        const double f = worst(theta_of(s));
        if (f > best) {
            best = f;
            best_s = s;
        }
    }
    // Golden-section refinement inside the neighbouring grid cells.
    const double cell = (s_max - s_min) / kGrid;
    double a = std::max(s_min, best_s - cell);
    double b = std::min(s_max, best_s + cell);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = worst(theta_of(c));
    double fd = worst(theta_of(d));
    for (int it = 0; it < 60; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = worst(theta_of(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = worst(theta_of(d));
        }
    }
    if (fc > best) {
        best = fc;
        best_s = c;
    }
    if (fd > best) {
        best = fd;
        best_s = d;
    }
    if (!(best > tol)) return std::nullopt;
    return ThetaCertificate{theta_of(best_s), best, sample.size(),
                            "positivity certified on the supplied state sample only"};
}

}  // namespace aloha::drift
