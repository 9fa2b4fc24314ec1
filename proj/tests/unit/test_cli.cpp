#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
};

Run aloha(const std::string& args) {
    const std::string cmd = std::string(ALOHA_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string tmp(const std::string& name) { return std::string(ALOHA_TEST_TMP) + "/" + name; }

void write_file(const std::string& path, const std::string& body) {
    std::ofstream(path) << body;
}

}  // namespace

TEST_CASE("region check") {
    const auto r = aloha("region --p 0.5,0.5 --check-lambda 0.2,0.2");
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["result"]["status"] == "stable_sufficient");
    CHECK(j["result"]["witness"] == json::array({1, 2}));
    CHECK(j["manifest"]["command"] == "region");
    CHECK(j["manifest"].contains("tool_version"));
    CHECK(j["manifest"].contains("wall_clock_seconds"));

    const auto u = json::parse(aloha("region --p 0.5,0.5 --check-lambda 0.4,0 --mode dominant-only").out);
    CHECK(u["result"]["status"] == "stable_sufficient");
}

TEST_CASE("region boundary csv") {
    const auto r = aloha("region --p 0.5,0.5,0.5 --boundary --resolution 50 --slice l3=0");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "lambda_1,lambda_2,lambda_3,witness_eta,active_constraint_j");
    bool saw_a = false, saw_alpha = false;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string f;
        double v[3];
        for (double& x : v) {
            std::getline(row, f, ',');
            x = std::stod(f);
        }
        CHECK(v[2] == 0.0);
        if (std::abs(v[0] - 0.5) < 1e-6 && std::abs(v[1]) < 1e-6) saw_a = true;
        if (std::abs(v[0] - 0.25) < 1e-6 && std::abs(v[1] - 0.25) < 1e-6) saw_alpha = true;
    }
    CHECK(saw_a);
    CHECK(saw_alpha);
}

TEST_CASE("region symmetric sup") {
    const auto r = aloha("region --p 0.5 --symmetric-sup --J 3");
    CHECK(r.code == 0);
    CHECK(r.out == "0.125\n");
}

TEST_CASE("usage errors exit with 2") {
    CHECK(aloha("region --p 0.5,0.5").code == 2);
    CHECK(aloha("region --p 0.5,x --check-lambda 0.1,0.1").code == 2);
    CHECK(aloha("region --p 0.5,0.5 --check-lambda 0.1").code == 2);
    CHECK(aloha("frobnicate").code == 2);
    CHECK(aloha("simulate --p 0.5,0.5 --lambda 0.2,0.2 --steps 0").code == 2);
    CHECK(aloha("simulate --p 0.5,0.5 --lambda 0.2,0.2").code == 2);
    CHECK(aloha("order --p 0.5,0.5 --lambda 0.1,0.1 --q0 1,0 --q0prime 0,1").code == 2);
    CHECK(aloha("kernel-verify --p 0.5,0.5 --lambda 0.1,0.1 --cap 4 --suite nope").code == 2);
    CHECK(aloha("--help").code == 0);
}

TEST_CASE("kernel budget refusal") {
    const std::string cmd = std::string(ALOHA_CLI_PATH) +
                            " kernel-verify --p 0.3,0.3,0.3 --lambda 0.1,0.1,0.1 --cap 40 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) out += buf;
    const int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == 2);
    CHECK(out.find("68921") != std::string::npos);
}

TEST_CASE("simulate is reproducible") {
    const std::string args = "simulate --p 0.5,0.5 --lambda 0.2,0.2 --steps 20000 --seed 4";
    const auto a = json::parse(aloha(args).out);
    const auto b = json::parse(aloha(args).out);
    CHECK(a["result"] == b["result"]);
    CHECK(a["manifest"]["seeds"] == json::array({4}));
    CHECK(a["result"]["slots"] == 20000);

    const auto path = tmp("trace.csv");
    const auto t = aloha(args + " --trace " + path + " --stride 1000");
    CHECK(t.code == 0);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "slot,q_1,q_2");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 21);
}

TEST_CASE("simulate with pmf arrivals and config file") {
    const auto pmf = tmp("batch.pmf");
    write_file(pmf, "# two-packet batches\n0 0.9\n2 0.1\n");
    const auto r = aloha("simulate --p 0.5,0.5 --arrivals " + pmf + " --steps 1000");
    CHECK(r.code == 0);

    const auto cfg = tmp("run.cfg");
    write_file(cfg, "p = 0.5,0.5\nlambda = 0.2,0.2\nsteps = 500\nseed = 9\n");
    const auto from_file = json::parse(aloha("simulate --config " + cfg).out);
    const auto direct =
        json::parse(aloha("simulate --p 0.5,0.5 --lambda 0.2,0.2 --steps 500 --seed 9").out);
    CHECK(from_file["result"] == direct["result"]);
    // flags override the file
    const auto over = json::parse(aloha("simulate --config " + cfg + " --steps 300").out);
    CHECK(over["result"]["slots"] == 300);

    write_file(pmf, "0 0.5\n1 0.4\n");
    CHECK(aloha("simulate --p 0.5,0.5 --arrivals " + pmf + " --steps 10").code == 2);
}

TEST_CASE("dominance and order sweeps") {
    auto r = aloha("dominance --p 0.3,0.6,0.4,0.7 --lambda 0.05,0.1,0.02,0.08 --seeds 10 --steps 10000");
    CHECK(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["result"]["total_violations"] == 0);
    CHECK(j["result"]["per_seed"].size() == 10);
    CHECK(j["result"]["per_seed"][3]["seed"] == 4);

    r = aloha("dominance --p 0.4 --lambda 0.3 --seeds 3 --steps 1000");
    CHECK(r.code == 0);

    r = aloha("order --p 0.5,0.5 --lambda 0.1,0.1 --q0 0,1 --q0prime 2,3 --seeds 5 --steps 5000");
    CHECK(r.code == 0);
    j = json::parse(r.out);
    CHECK(j["result"]["total_violations"] == 0);
}

TEST_CASE("drift command") {
    const auto r = aloha("drift --p 0.5,0.5,0.5 --lambda 0.05,0.05,0.05");
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out)["result"];
    for (const auto& e : j["epsilon"]) CHECK(e.get<double>() == doctest::Approx(0.6));
    CHECK(j["monotone"] == true);
    CHECK(j["assumption22_ok"] == true);

    const auto t = json::parse(aloha("drift --p 0.5,0.5 --lambda 0.2,0.35 --theta auto").out)["result"];
    CHECK(t["transience"][1].is_object());
}

TEST_CASE("kernel-verify suites") {
    auto r = aloha("kernel-verify --p 0.5,0.5 --lambda 0.05,0.05 --cap 6 --suite all");
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("all checks passed") != std::string::npos);

    r = aloha("kernel-verify --p 0.5,0.5 --lambda 0.05,0.05 --cap 4 --suite lemma21 --format json");
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["result"]["pass"] == true);
    CHECK(j["result"]["checks"].size() == 2);
}
