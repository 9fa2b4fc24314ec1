#include <doctest.h>

#include <random>

#include "aloha/model.hpp"
#include "oracles.hpp"

using namespace aloha;
using doctest::Approx;

namespace {

SystemParams make(std::vector<double> p) {
    return SystemParams::bernoulli(p, std::vector<double>(p.size(), 0.0));
}

void check_vec(const std::vector<double>& got, const std::vector<double>& want, double eps = 1e-15) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == Approx(want[i]).epsilon(eps));
}

}  // namespace

TEST_CASE("v_probs examples") {
    check_vec(v_probs(make({0.5, 0.5, 0.5})), {0.25, 0.5, 1.0});
    check_vec(v_probs(make({0.2, 0.4, 0.6})), {0.24, 0.4, 1.0});
    for (std::size_t n = 1; n <= 6; ++n) {
        CHECK(v_probs(make(std::vector<double>(n, 0.3))).back() == 1.0);
    }
}

TEST_CASE("v_probs under a permutation uses positional products") {
    const auto params = make({0.2, 0.4, 0.6});
    // eta = (3,1,2): positions hold queues 3,1,2
    const auto eta = Permutation::from_one_based(std::vector<std::size_t>{3, 1, 2});
    check_vec(v_probs(params, eta), {0.8 * 0.6, 0.6, 1.0});
    // Relabel-then-identity gives the same vector.
    check_vec(v_probs(params.permuted(eta)), v_probs(params, eta));
}

TEST_CASE("u_probs examples") {
    check_vec(u_probs(make({0.5, 0.5, 0.5}), QueueState{1, 0, 2}), {1.0, 0.5, 0.5});
    check_vec(u_probs(make({0.2, 0.4, 0.6}), QueueState{3, 1, 0}), {1.0, 0.8, 0.48});
    check_vec(u_probs(make({0.2, 0.4, 0.6}), QueueState{0, 0, 0}), {1.0, 1.0, 1.0});
}

TEST_CASE("success_probs examples") {
    check_vec(success_probs(make({0.5, 0.5, 0.5}), QueueState{1, 0, 2}), {0.125, 0.0, 0.25});
    check_vec(success_probs(make({0.5, 0.5, 0.5}), QueueState{0, 0, 0}), {0.0, 0.0, 0.0});
    check_vec(success_probs(make({0.3}), QueueState{5}), {0.3});
}

TEST_CASE("busy_signature") {
    CHECK(busy_signature(QueueState{1, 0, 2}) == std::vector<bool>{true, false, true});
    CHECK(busy_signature(QueueState{0, 0, 0, 0}) == std::vector<bool>(4, false));
    CHECK(signature_mask(QueueState{1, 0, 2}) == 0b101);
    CHECK(state_of_mask(0b101, 3) == QueueState{1, 0, 1});
}

TEST_CASE("success probabilities match enumeration of the departure products") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    for (std::size_t n = 1; n <= 6; ++n) {
        for (int draw = 0; draw < 5; ++draw) {
            std::vector<double> p(n);
            for (auto& x : p) x = unif(gen);
            const auto params = make(p);
            for (std::uint64_t mask = 0; mask < (1u << n); ++mask) {
                const auto q = state_of_mask(mask, n);
                check_vec(success_probs(params, q), oracle::departure_probs(p, q), 1e-13);
            }
        }
    }
}

TEST_CASE("at most one success per slot on every signature") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    for (std::size_t n = 1; n <= 6; ++n) {
        std::vector<double> p(n);
        for (auto& x : p) x = unif(gen);
        const auto params = make(p);
        for (std::uint64_t mask = 0; mask < (1u << n); ++mask) {
            double total = 0.0;
            for (double r : success_probs(params, state_of_mask(mask, n))) {
                CHECK(r >= 0.0);
                CHECK(r <= 1.0);
                total += r;
            }
            CHECK(total <= 1.0 + 1e-15);
        }
    }
}

TEST_CASE("success_probs is constant on each signature fibre") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    for (std::size_t n = 1; n <= 5; ++n) {
        std::vector<double> p(n);
        for (auto& x : p) x = unif(gen);
        const auto params = make(p);
        for (const auto& q : oracle::grid(n, 2)) {
            const auto rep = state_of_mask(signature_mask(q), n);
            CHECK(success_probs(params, q) == success_probs(params, rep));
        }
    }
}

TEST_CASE("u_probs is non-increasing in the componentwise order") {
    const auto params = make({0.3, 0.6, 0.2, 0.7});
    const auto states = oracle::grid(4, 2);
    for (const auto& a : states) {
        for (const auto& b : states) {
            bool leq = true;
            for (std::size_t k = 0; k < 4; ++k) leq = leq && a[k] <= b[k];
            if (!leq) continue;
            const auto ua = u_probs(params, a);
            const auto ub = u_probs(params, b);
            for (std::size_t k = 0; k < 4; ++k) CHECK(ua[k] >= ub[k]);
        }
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(make({0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(make({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make({}), std::invalid_argument);
    CHECK_THROWS_AS(SystemParams({0.5}, {}), std::invalid_argument);
    CHECK_THROWS_AS(ArrivalDist({{0, 0.5}, {1, 0.4}}), std::invalid_argument);
    CHECK_THROWS_AS(ArrivalDist({{1, 0.5}, {1, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(ArrivalDist::bernoulli(1.5), std::invalid_argument);
    CHECK_THROWS_AS(Permutation({0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Permutation({0, 2}), std::invalid_argument);
}

TEST_CASE("arrival distribution mean and sampling") {
    const ArrivalDist dist({{0, 0.5}, {2, 0.25}, {5, 0.25}});
    CHECK(dist.mean() == Approx(1.75));
    CHECK(dist.max_batch() == 5);
    CHECK(dist.sample(0.0) == 0);
    CHECK(dist.sample(0.49) == 0);
    CHECK(dist.sample(0.5) == 2);
    CHECK(dist.sample(0.8) == 5);
    CHECK(dist.sample(0.999999) == 5);
}
