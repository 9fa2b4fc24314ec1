#include <doctest.h>

#include <cmath>
#include <random>

#include "aloha/drift.hpp"
#include "oracles.hpp"

using namespace aloha;
using namespace aloha::drift;
using doctest::Approx;

namespace {

SystemParams bern(std::vector<double> p, std::vector<double> l) {
    return SystemParams::bernoulli(std::move(p), l);
}

struct Draw {
    std::vector<double> p, l;
};

Draw random_draw(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> up(0.05, 0.95), ul(0.0, 0.3);
    Draw d{std::vector<double>(n), std::vector<double>(n)};
    for (auto& x : d.p) x = up(gen);
    for (auto& x : d.l) x = ul(gen);
    return d;
}

// Independent linear form straight from the coefficient definition.
double v_oracle(const std::vector<double>& p, std::size_t j, const QueueState& q) {
    auto v = [&](std::size_t k) {
        double prod = 1.0;
        for (std::size_t m = k + 1; m < p.size(); ++m) prod *= 1.0 - p[m];
        return prod;
    };
    double total = static_cast<double>(q[j]) / (v(j) * p[j]);
    for (std::size_t k = 0; k < j; ++k) total += static_cast<double>(q[k]) / v(k);
    return total;
}

}  // namespace

TEST_CASE("lyapunov_value examples") {
    const auto params = bern({0.5, 0.5, 0.5}, {0, 0, 0});
    CHECK(lyapunov_value(params, 2, QueueState{0, 0, 0}) == 0.0);
    CHECK(lyapunov_value(params, 2, QueueState{1, 0, 2}) == Approx(8.0));
    CHECK(lyapunov_value(params, 0, QueueState{2, 5, 7}) == Approx(16.0));
    const auto spec = lyapunov_spec(params, 1);
    CHECK(spec.coeffs == std::vector<double>{4.0, 4.0, 0.0});
    CHECK_THROWS_AS(lyapunov_spec(params, 3), std::invalid_argument);
}

TEST_CASE("lyapunov_value matches the coefficient oracle") {
    std::mt19937_64 gen(4);
    for (int i = 0; i < 20; ++i) {
        const auto d = random_draw(gen, 4);
        const auto params = bern(d.p, d.l);
        for (const auto& q : oracle::grid(4, 2)) {
            for (std::size_t j = 0; j < 4; ++j) {
                CHECK(lyapunov_value(params, j, q) == Approx(v_oracle(d.p, j, q)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("analytic_drift examples") {
    const std::vector<double> l(3, 0.05);
    const auto params = bern({0.5, 0.5, 0.5}, l);
    CHECK(analytic_drift(params, l, 2, QueueState{0, 0, 1}) == Approx(-0.6));
    CHECK(analytic_drift(params, l, 2, QueueState{4, 0, 9}) == Approx(-0.6));
    CHECK(analytic_drift(params, l, 1, QueueState{0, 0, 3}) == Approx(0.4));
    const std::vector<double> zero(3, 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(analytic_drift(params, zero, j, QueueState{0, 0, 0}) == 0.0);
    }
}

TEST_CASE("dhat_expectation examples and exactness") {
    const auto params = bern({0.5, 0.5, 0.5}, {0, 0, 0});
    CHECK(dhat_expectation(params, QueueState{1, 0, 2}, 2) == Approx(1.0));
    CHECK(dhat_expectation(params, QueueState{1, 0, 2}, 1) == Approx(0.5));
    for (std::size_t j = 0; j < 3; ++j) CHECK(dhat_expectation(params, QueueState{0, 0, 0}, j) == 0.0);

    std::mt19937_64 gen(12);
    for (std::size_t n = 1; n <= 6; ++n) {
        for (int draw = 0; draw < 20; ++draw) {
            const auto d = random_draw(gen, n);
            const auto ps = bern(d.p, d.l);
            for (std::uint64_t mask = 0; mask < (1u << n); ++mask) {
                const auto q = state_of_mask(mask, n);
                const auto u = u_probs(ps, q);
                for (std::size_t j = 0; j < n; ++j) {
                    const double target = q[j] >= 1 ? 1.0 : 1.0 - u[j];
                    CHECK(std::abs(dhat_expectation(ps, q, j) - target) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("exact_one_step_drift examples") {
    const std::vector<double> l(3, 0.05);
    const auto params = bern({0.5, 0.5, 0.5}, l);
    const StateFunction v3 = [&](const QueueState& q) { return lyapunov_value(params, 2, q); };
    CHECK(std::abs(exact_one_step_drift(params, v3, {1, 1, 1}) - (-0.6)) <= 1e-12);

    const StateFunction constant = [](const QueueState&) { return 3.5; };
    CHECK(exact_one_step_drift(params, constant, {2, 0, 1}) == Approx(0.0).epsilon(1e-15));

    const auto quiet = bern({0.3, 0.6, 0.4}, {0, 0, 0});
    const StateFunction total = [](const QueueState& q) {
        return static_cast<double>(q[0] + q[1] + q[2]);
    };
    const QueueState q{0, 3, 0};
    CHECK(exact_one_step_drift(quiet, total, q) == Approx(-success_probs(quiet, q)[1]));

    CHECK_THROWS_AS(exact_one_step_drift(params, v3, {1, 1, 1}, sim::System::dominant, 4),
                    BudgetError);
}

TEST_CASE("closed-form drift equals enumeration on {0,1,2}^J") {
    std::mt19937_64 gen(19);
    for (std::size_t n = 1; n <= 5; ++n) {
        for (int draw = 0; draw < 20; ++draw) {
            const auto d = random_draw(gen, n);
            const auto params = bern(d.p, d.l);
            for (std::size_t j = 0; j < n; ++j) {
                const StateFunction V = [&](const QueueState& q) {
                    return lyapunov_value(params, j, q);
                };
                for (const auto& q : oracle::grid(n, 2)) {
                    const double gap =
                        std::abs(analytic_drift(params, d.l, j, q) - exact_one_step_drift(params, V, q));
                    CHECK(gap <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("busy drift ignores the other coordinates") {
    std::mt19937_64 gen(2);
    const auto d = random_draw(gen, 4);
    const auto params = bern(d.p, d.l);
    for (std::size_t j = 0; j < 4; ++j) {
        const double busy = constraint_value(params, d.l, j) - 1.0;
        for (const auto& q : oracle::grid(4, 2)) {
            if (q[j] >= 1) CHECK(analytic_drift(params, d.l, j, q) == Approx(busy).epsilon(1e-14));
        }
    }
}

TEST_CASE("drift is non-increasing along the signature order") {
    std::mt19937_64 gen(6);
    for (std::size_t n = 1; n <= 6; ++n) {
        const auto d = random_draw(gen, n);
        const auto params = bern(d.p, d.l);
        for (std::uint64_t a = 0; a < (1u << n); ++a) {
            for (std::uint64_t b = 0; b < (1u << n); ++b) {
                if ((a & b) != a) continue;
                const auto qa = state_of_mask(a, n), qb = state_of_mask(b, n);
                for (std::size_t j = 0; j < n; ++j) {
                    CHECK(analytic_drift(params, d.l, j, qa) >=
                          analytic_drift(params, d.l, j, qb) - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("verify_theorem_assumptions examples") {
    const std::vector<double> l(3, 0.05);
    const auto params = bern({0.5, 0.5, 0.5}, l);
    auto rep = verify_theorem_assumptions(params, l, 2);
    for (double e : rep.epsilon) CHECK(e == Approx(0.6));
    CHECK(rep.monotone);
    CHECK(rep.assumption22_ok);
    CHECK(rep.satisfied);
    REQUIRE(rep.max_enumeration_gap);
    CHECK(*rep.max_enumeration_gap <= 1e-12);
    CHECK(rep.cross_check_states == 27);

    // third constraint: 2 λ_3 + 2 λ_2 + 4 λ_1 = 1.2
    const std::vector<double> hot{0.05, 0.05, 0.45};
    rep = verify_theorem_assumptions(bern({0.5, 0.5, 0.5}, hot), hot);
    CHECK(rep.constraint_values[2] == Approx(1.2));
    CHECK(rep.epsilon[2] == Approx(-0.2));
    CHECK_FALSE(rep.satisfied);

    const std::vector<double> zero(3, 0.0);
    rep = verify_theorem_assumptions(bern({0.5, 0.5, 0.5}, zero), zero);
    for (double e : rep.epsilon) CHECK(e == Approx(1.0));
    CHECK(rep.satisfied);
}

TEST_CASE("transience drift near one") {
    std::mt19937_64 gen(10);
    std::uniform_int_distribution<std::uint64_t> uq(0, 4);
    for (int draw = 0; draw < 10; ++draw) {
        const auto d = random_draw(gen, 3);
        const auto params = bern(d.p, d.l);
        const QueueState q{uq(gen), uq(gen), uq(gen)};
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::abs(transience_drift(params, j, 1.0 - 1e-9, q)) <= 1e-6);
            const double theta = 1.0 - 1e-6, h = 1e-7;
            const double slope =
                (transience_drift(params, j, theta + h, q) - transience_drift(params, j, theta - h, q)) /
                (2 * h);
            const double want = -analytic_drift(params, d.l, j, q);
            CHECK(std::abs(slope - want) <= 1e-3 * std::max(std::abs(want), 1e-3));
        }
    }
    const auto params = bern({0.4, 0.5}, {0.0, 0.0});
    CHECK(transience_drift(params, 1, 0.5, {0, 0}) == 0.0);
    CHECK_THROWS_AS(transience_drift(params, 1, 1.0, {0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(transience_drift(params, 1, 0.0, {0, 0}), std::invalid_argument);
}

TEST_CASE("find_theta_star") {
    const auto sample = box_states(2, 2);
    CHECK(sample.size() == 9);
    CHECK(sample[1] == QueueState{0, 1});

    // identity order, second constraint at 1.1, first at 0.8
    const std::vector<double> l{0.2, 0.35};
    const auto unstable = bern({0.5, 0.5}, l);
    const auto cert = find_theta_star(unstable, 1, sample);
    REQUIRE(cert);
    CHECK(cert->min_drift > 0.0);
    CHECK(cert->theta > 0.0);
    CHECK(cert->theta < 1.0);
    CHECK(cert->states_checked == 9);
    CHECK_FALSE(cert->caveat.empty());

    const std::vector<double> calm{0.05, 0.05};
    const auto stable = bern({0.5, 0.5}, calm);
    for (std::size_t j = 0; j < 2; ++j) CHECK_FALSE(find_theta_star(stable, j, sample));

    CHECK_THROWS_AS(find_theta_star(stable, 0, std::span<const QueueState>{}), std::invalid_argument);
}
