#include <doctest.h>

#include <sstream>

#include "aloha/io.hpp"

using namespace aloha;
using namespace aloha::io;

TEST_CASE("format_double round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 2.5e-17, 123456789.123456789}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.125) == "0.125");
}

TEST_CASE("verdict json") {
    const std::vector<double> zeros{0.0, 0.0};
    const auto params = SystemParams::bernoulli({0.5, 0.5}, zeros);
    const std::vector<double> l{0.2, 0.2};
    const auto j = to_json(regions::classify(params, l));
    CHECK(j["status"] == "stable_sufficient");
    CHECK(j["witness"] == json::array({1, 2}));
    CHECK(j["profile"]["values"].size() == 2);
    CHECK(j["mode"].is_null());

    const std::vector<double> far{0.5, 0.5};
    const auto none = to_json(regions::classify(params, far));
    CHECK(none["status"] == "inconclusive");
    CHECK(none["witness"].is_null());
}

TEST_CASE("drift report json shape") {
    const std::vector<double> l(3, 0.05);
    const auto params = SystemParams::bernoulli({0.5, 0.5, 0.5}, l);
    const auto j = to_json(drift::verify_theorem_assumptions(params, l));
    for (const char* key : {"epsilon", "eta_bound", "monotone", "assumption22_ok", "details"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["details"]["constraint_values"].size() == 3);
    CHECK(j["monotone"] == true);
}

TEST_CASE("boundary csv") {
    regions::BoundaryPoint bp{{0.25, 0.25}, Permutation::from_one_based(std::vector<std::size_t>{2, 1}), 2};
    std::ostringstream out;
    write_boundary_csv(out, {bp}, 2);
    CHECK(out.str() == "lambda_1,lambda_2,witness_eta,active_constraint_j\n0.25,0.25,2-1,2\n");
}

TEST_CASE("trace csv") {
    std::ostringstream out;
    write_trace_csv(out, {{0, {0, 0}}, {10, {3, 1}}}, 2);
    CHECK(out.str() == "slot,q_1,q_2\n0,0,0\n10,3,1\n");
}

TEST_CASE("pmf parsing") {
    std::istringstream ok("# batches\n0 0.5\n2 0.25 # pair\n\n5 0.25\n");
    const auto dist = read_pmf(ok);
    CHECK(dist.mean() == doctest::Approx(1.75));
    std::istringstream short_sum("0 0.5\n1 0.4\n");
    CHECK_THROWS_AS(read_pmf(short_sum), std::invalid_argument);
    std::istringstream junk("0 half\n");
    CHECK_THROWS_AS(read_pmf(junk), std::invalid_argument);
    std::istringstream negative("-1 1.0\n");
    CHECK_THROWS_AS(read_pmf(negative), std::invalid_argument);
    CHECK_THROWS_AS(read_pmf_file("/nonexistent/pmf.txt"), std::invalid_argument);
}

TEST_CASE("config parsing") {
    std::istringstream in("# run\np = 0.5,0.5\n--steps 1000\nseed=3\n");
    const auto cfg = read_config(in);
    CHECK(cfg.at("p") == "0.5,0.5");
    CHECK(cfg.at("steps") == "1000");
    CHECK(cfg.at("seed") == "3");
    std::istringstream bad("= 3\n");
    CHECK_THROWS_AS(read_config(bad), std::invalid_argument);
}

TEST_CASE("list parsing") {
    CHECK(parse_doubles("0.5, 0.25") == std::vector<double>{0.5, 0.25});
    CHECK(parse_counts("0,3,10") == std::vector<std::uint64_t>{0, 3, 10});
    CHECK_THROWS_AS(parse_doubles("0.5,x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_doubles("0.5abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_counts("1,-2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_counts(""), std::invalid_argument);
}
