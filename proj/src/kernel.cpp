#include "aloha/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "aloha/drift.hpp"

namespace aloha::kernel {
namespace {

constexpr double kRowTol = 1e-12;
constexpr double kMonotoneTol = 1e-10;
constexpr std::size_t kMaxOrderPoints = 64;

std::uint64_t box_size(std::size_t queues, std::uint64_t cap, std::uint64_t limit) {
    std::uint64_t total = 1;
    for (std::size_t j = 0; j < queues; ++j) {
        if (total > limit / (cap + 1)) return limit + 1;
        total *= cap + 1;
    }
    return total;
}

bool is_interior(const QueueState& x, std::uint64_t limit) {
    return std::all_of(x.begin(), x.end(), [limit](std::uint64_t c) { return c <= limit; });
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace

FiniteKernel::FiniteKernel(std::size_t queues, std::uint64_t cap, std::vector<QueueState> states,
                           std::vector<double> matrix)
    : queues_(queues), cap_(cap), states_(std::move(states)), matrix_(std::move(matrix)) {
    validate();
}

void FiniteKernel::validate() const {
    const std::size_t n = states_.size();
    if (n == 0) throw std::invalid_argument("kernel has no states");
    if (matrix_.size() != n * n) throw std::invalid_argument("kernel matrix is not n x n");
    if (box_size(queues_, cap_, n) != n) {
        throw std::invalid_argument("kernel states do not cover the box {0..B}^J");
    }
    std::vector<bool> seen(n, false);
    for (const auto& s : states_) {
        if (s.size() != queues_) throw std::invalid_argument("kernel state has wrong dimension");
        const std::size_t idx = index_of(s);
        if (seen[idx]) throw std::invalid_argument("kernel states are not distinct");
        seen[idx] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (double p : row(i)) {
            if (!(p >= 0.0)) throw std::invalid_argument("kernel has a negative entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowTol) {
            throw std::invalid_argument("kernel row " + std::to_string(i) + " sums to " +
                                        format_double(sum));
        }
    }
}

FiniteKernel FiniteKernel::build_truncated(const SystemParams& params, std::uint64_t cap,
                                           sim::System system, std::size_t max_states,
                                           std::uint64_t outcome_budget) {
    const std::size_t J = params.queues();
    const std::uint64_t n = box_size(J, cap, max_states);
    if (n > max_states) {
        // Report the true size where it fits in 64 bits.
        double exact = std::pow(static_cast<double>(cap) + 1.0, static_cast<double>(J));
        const auto required = exact < 1.8e19 ? static_cast<std::uint64_t>(exact) : UINT64_MAX;
        throw BudgetError("truncated state space too large for a dense kernel", required,
                          max_states);
    }
    auto states = drift::box_states(J, cap);
    std::vector<double> matrix(n * n, 0.0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        double* row = matrix.data() + i * n;
        for_each_transition(
            params, states[i], system,
            [&](double prob, const QueueState& next) {
                std::size_t idx = 0;
                for (std::size_t j = 0; j < J; ++j) idx = idx * (cap + 1) + next[j];
                row[idx] += prob;
            },
            cap, outcome_budget);
    }
    return FiniteKernel(J, cap, std::move(states), std::move(matrix));
}

FiniteKernel FiniteKernel::from_matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    if (n == 0) throw std::invalid_argument("empty matrix");
    std::vector<double> matrix;
    matrix.reserve(n * n);
    std::vector<QueueState> states;
    for (std::size_t i = 0; i < n; ++i) {
        require_same_size(n, rows[i].size(), "matrix row");
        matrix.insert(matrix.end(), rows[i].begin(), rows[i].end());
        states.push_back({i});
    }
    return FiniteKernel(1, n - 1, std::move(states), std::move(matrix));
}

FiniteKernel FiniteKernel::from_matrix(std::size_t queues, std::uint64_t cap,
                                       std::vector<QueueState> states, std::vector<double> matrix) {
    return FiniteKernel(queues, cap, std::move(states), std::move(matrix));
}

std::size_t FiniteKernel::index_of(std::span<const std::uint64_t> x) const {
    require_same_size(queues_, x.size(), "state");
    std::size_t idx = 0;
    for (auto c : x) {
        if (c > cap_) throw std::out_of_range("state lies outside the kernel box");
        idx = idx * (cap_ + 1) + c;
    }
    return idx;
}

std::vector<double> FiniteKernel::apply(std::span<const double> f) const {
    require_same_size(size(), f.size(), "state function");
    std::vector<double> out(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        const auto r = row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) acc += r[k] * f[k];
        out[i] = acc;
    }
    return out;
}

std::vector<double> FiniteKernel::propagate(std::span<const double> mu) const {
    require_same_size(size(), mu.size(), "distribution");
    std::vector<double> out(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        if (mu[i] == 0.0) continue;
        const auto r = row(i);
        for (std::size_t k = 0; k < r.size(); ++k) out[k] += mu[i] * r[k];
    }
    return out;
}

std::vector<double> tabulate(const FiniteKernel& kernel,
                             const std::function<double(const QueueState&)>& V) {
    std::vector<double> out;
    out.reserve(kernel.size());
    for (const auto& s : kernel.states()) out.push_back(V(s));
    return out;
}

DriftVector drift_vector(const FiniteKernel& kernel, std::span<const double> V, std::size_t k) {
    std::vector<double> f(V.begin(), V.end());
    for (std::size_t step = 0; step < k; ++step) f = kernel.apply(f);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= V[i];
    return f;
}

std::vector<double> distribution_from(const FiniteKernel& kernel, std::size_t x,
                                      std::size_t steps) {
    std::vector<double> mu(kernel.size(), 0.0);
    mu.at(x) = 1.0;
    for (std::size_t s = 0; s < steps; ++s) mu = kernel.propagate(mu);
    return mu;
}

namespace {
double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}
}  // namespace

double k_step_drift(const FiniteKernel& kernel, std::span<const double> V, std::size_t x,
                    std::size_t k) {
    require_same_size(kernel.size(), V.size(), "state function");
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    return dot(distribution_from(kernel, x, k), V) - V[x];
}

double verify_lemma21(const FiniteKernel& kernel, std::span<const double> V, std::size_t x,
                      std::size_t t1, std::size_t t2) {
    if (t1 == 0 || t2 == 0) throw std::invalid_argument("t1 and t2 must be at least 1");
    const double lhs = k_step_drift(kernel, V, x, t1 + t2);
    const double rhs =
        k_step_drift(kernel, V, x, t1) + dot(distribution_from(kernel, x, t1),
                                             drift_vector(kernel, V, t2));
    return std::abs(lhs - rhs);
}

double verify_corollary21(const FiniteKernel& kernel, std::span<const double> V, std::size_t x,
                          std::span<const std::size_t> steps) {
    if (steps.empty()) throw std::invalid_argument("need at least one step count");
    std::size_t total = 0;
    for (auto t : steps) {
        if (t == 0) throw std::invalid_argument("step counts must be at least 1");
        total += t;
    }
    const double lhs = k_step_drift(kernel, V, x, total);
    double rhs = 0.0;
    std::vector<double> mu(kernel.size(), 0.0);
    mu.at(x) = 1.0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        rhs += dot(mu, drift_vector(kernel, V, steps[i]));
        for (std::size_t s = 0; s < steps[i]; ++s) mu = kernel.propagate(mu);
    }
    return std::abs(lhs - rhs);
}

DriftBoundReport verify_lemma23(const FiniteKernel& kernel, const SystemParams& params, std::size_t j,
                             std::size_t k) {
    require_same_size(params.queues(), kernel.queues(), "kernel dimension");
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    DriftBoundReport report;
    const auto rates = params.rates();
    report.epsilon = 1.0 - drift::constraint_value(params, rates, j);

    std::uint64_t max_batch = 0;
    for (const auto& a : params.arrivals()) max_batch = std::max(max_batch, a.max_batch());
    const std::uint64_t reach = k * max_batch;
    if (reach > kernel.cap()) {
        report.inconclusive = true;
        return report;
    }
    const std::uint64_t limit = kernel.cap() - reach;
    const auto V = tabulate(kernel, [&](const QueueState& x) {
        return drift::lyapunov_value(params, j, x);
    });
    const auto dk = drift_vector(kernel, V, k);
    report.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        const auto& x = kernel.state(i);
        if (!is_interior(x, limit) || x[j] < k) continue;
        ++report.checked;
        const double excess = dk[i] + static_cast<double>(k) * report.epsilon;
        report.max_excess = std::max(report.max_excess, excess);
        if (excess > 1e-10) ++report.violations;
    }
    if (report.checked == 0) {
        report.inconclusive = true;
        report.max_excess = 0.0;
    }
    return report;
}

LevelDecomposition level_decomposition(const FiniteKernel& kernel, std::span<const double> drift,
                                       double merge_tol) {
    require_same_size(kernel.size(), drift.size(), "drift vector");
    std::vector<std::size_t> order(drift.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return drift[a] > drift[b]; });

    LevelDecomposition dec;
    dec.level_of.assign(drift.size(), 0);
    for (auto i : order) {
        if (dec.levels.empty() || dec.levels.back() - drift[i] > merge_tol) {
            dec.levels.push_back(drift[i]);
            dec.level_sets.emplace_back();
        }
        dec.level_sets.back().push_back(i);
        dec.level_of[i] = dec.levels.size() - 1;
    }

    // B_l is a lower set iff no state in it has a box predecessor outside it,
    // i.e. a predecessor with a strictly higher level index.
    dec.lower.assign(dec.levels.size(), true);
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        QueueState x = kernel.state(i);
        for (std::size_t c = 0; c < x.size(); ++c) {
            if (x[c] == 0) continue;
            --x[c];
            const std::size_t pred_level = dec.level_of[kernel.index_of(x)];
            ++x[c];
            // x ∈ B_l but pred ∉ B_l for every l in [level_of[i], pred_level).
            for (std::size_t l = dec.level_of[i]; l < pred_level; ++l) dec.lower[l] = false;
        }
    }
    return dec;
}

double verify_lemma24(const FiniteKernel& kernel, std::span<const double> V,
                      const LevelDecomposition& decomposition, std::size_t x, std::size_t n) {
    if (n == 0) throw std::invalid_argument("n must be at least 1");
    const std::size_t L = decomposition.levels.size();
    const double lhs = k_step_drift(kernel, V, x, n);

    // occupancy[l] = Σ_{k<n} P^k(x, A_l)
    std::vector<double> occupancy(L, 0.0);
    std::vector<double> mu(kernel.size(), 0.0);
    mu.at(x) = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < mu.size(); ++i) occupancy[decomposition.level_of[i]] += mu[i];
        if (k + 1 < n) mu = kernel.propagate(mu);
    }
    // Occupation probabilities over n slots sum to n, so the base level enters n times.
    double rhs = static_cast<double>(n) * decomposition.levels[L - 1];
    double cumulative = 0.0;  // Σ_{k<n} P^k(x, B_l)
    for (std::size_t l = 0; l + 1 < L; ++l) {
        cumulative += occupancy[l];
        rhs += (decomposition.levels[l] - decomposition.levels[l + 1]) * cumulative;
    }
    return std::abs(lhs - rhs);
}

MonotoneReport verify_nstep_monotone(const FiniteKernel& kernel, std::span<const double> V,
                                     std::uint64_t max_batch, std::size_t n) {
    if (n == 0) throw std::invalid_argument("n must be at least 1");
    MonotoneReport report;
    const std::uint64_t reach = n * max_batch;
    if (reach > kernel.cap()) {
        report.inconclusive = true;
        return report;
    }
    const std::uint64_t limit = kernel.cap() - reach;
    const auto dn = drift_vector(kernel, V, n);
    std::vector<std::size_t> interior;
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        if (is_interior(kernel.state(i), limit)) interior.push_back(i);
    }
    for (auto a : interior) {
        for (auto b : interior) {
            if (a == b || !sim::componentwise_leq(kernel.state(a), kernel.state(b))) continue;
            ++report.pairs_checked;
            if (dn[a] < dn[b] - kMonotoneTol) ++report.violations;
        }
    }
    return report;
}

std::vector<double> stationary_distribution(const FiniteKernel& kernel, double tol,
                                            std::size_t max_iters) {
    std::vector<double> pi(kernel.size(), 1.0 / static_cast<double>(kernel.size()));
    for (std::size_t it = 0; it < max_iters; ++it) {
        auto next = kernel.propagate(pi);
        double total = 0.0;
        for (double p : next) total += p;
        for (double& p : next) p /= total;
        double change = 0.0;
        for (std::size_t i = 0; i < pi.size(); ++i) change += std::abs(next[i] - pi[i]);
        pi = std::move(next);
        if (change <= tol) return pi;
    }
    throw std::runtime_error("power iteration did not converge within " +
                             std::to_string(max_iters) + " iterations");
}

OrderCheck check_lower_set_order(std::span<const double> first, std::span<const double> second,
                                 const std::vector<QueueState>& points, const PartialOrder& leq,
                                 double tol) {
    const std::size_t n = points.size();
    require_same_size(n, first.size(), "first distribution");
    require_same_size(n, second.size(), "second distribution");
    if (n > kMaxOrderPoints) {
        throw BudgetError("lower-set enumeration limited to small boxes", n, kMaxOrderPoints);
    }
    const PartialOrder order = leq ? leq : [](const QueueState& a, const QueueState& b) {
        return sim::componentwise_leq(a, b);
    };

    // Linear extension: repeatedly take a point with no unplaced predecessor.
    std::vector<std::size_t> ext;
    std::vector<bool> placed(n, false);
    while (ext.size() < n) {
        bool progress = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (placed[i]) continue;
            bool minimal = true;
            for (std::size_t k = 0; k < n && minimal; ++k) {
                if (k != i && !placed[k] && order(points[k], points[i])) minimal = false;
            }
            if (minimal) {
                placed[i] = true;
                ext.push_back(i);
                progress = true;
            }
        }
        if (!progress) throw std::invalid_argument("relation is not a partial order on the points");
    }
    std::vector<std::uint64_t> preds(n, 0);  // in extension positions
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            if (order(points[ext[b]], points[ext[a]])) preds[a] |= std::uint64_t{1} << b;
        }
    }

    OrderCheck result;
    result.worst_gap = std::numeric_limits<double>::infinity();
    // Depth-first over include/exclude decisions along the extension.
    const auto visit = [&](auto&& self, std::size_t pos, std::uint64_t included, double p1,
                           double p2) -> void {
        if (pos == n) {
            ++result.lower_sets;
            result.worst_gap = std::min(result.worst_gap, p1 - p2);
            return;
        }
        self(self, pos + 1, included, p1, p2);
        if ((preds[pos] & ~included) == 0) {
            self(self, pos + 1, included | (std::uint64_t{1} << pos), p1 + first[ext[pos]],
                 p2 + second[ext[pos]]);
        }
    };
    visit(visit, 0, 0, 0.0, 0.0);
    result.ordered = result.worst_gap >= -tol;
    return result;
}

void write_text(std::ostream& out, const FiniteKernel& kernel) {
    const std::size_t n = kernel.size();
    out << n << ' ' << kernel.queues() << ' ' << kernel.cap() << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = kernel.row(i);
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) out << ' ';
            out << format_double(r[k]);
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < n; ++i) {
        out << i;
        for (auto c : kernel.state(i)) out << ' ' << c;
        out << '\n';
    }
}

FiniteKernel read_text(std::istream& in) {
    std::size_t n = 0, queues = 0;
    std::uint64_t cap = 0;
    if (!(in >> n >> queues >> cap) || n == 0 || queues == 0) {
        throw std::invalid_argument("kernel text: bad header, expected 'n J B'");
    }
    if (n > kDefaultMaxStates) {
        throw BudgetError("kernel text: too many states for a dense kernel", n, kDefaultMaxStates);
    }
    std::vector<double> matrix(n * n);
    for (auto& p : matrix) {
        if (!(in >> p)) throw std::invalid_argument("kernel text: truncated matrix");
    }
    std::vector<QueueState> states(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t idx = 0;
        if (!(in >> idx) || idx >= n) throw std::invalid_argument("kernel text: bad state index");
        QueueState s(queues);
        for (auto& c : s) {
            if (!(in >> c)) throw std::invalid_argument("kernel text: truncated state line");
        }
        states[idx] = std::move(s);
    }
    return FiniteKernel::from_matrix(queues, cap, std::move(states), std::move(matrix));
}

}  // namespace aloha::kernel
