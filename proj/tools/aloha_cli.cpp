#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "aloha/drift.hpp"
#include "aloha/io.hpp"
#include "aloha/kernel.hpp"
#include "aloha/regions.hpp"
#include "aloha/simulate.hpp"

using namespace aloha;
using io::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

// Thrown for flag combinations CLI11 cannot express on its own.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Common {
    std::string p;
    std::string lambda;
    std::vector<std::string> arrivals;
    std::string format;
};

struct Manifest {
    explicit Manifest(std::string name) : command(std::move(name)) {}

    std::string command;
    json params = json::object();
    std::vector<std::uint64_t> seeds;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    json finish() const {
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        return {{"command", command},
                {"params", params},
                {"seeds", seeds},
                {"tool_version", ALOHA_VERSION},
                {"wall_clock_seconds", took.count()}};
    }
};

void record_params(const CLI::App& sub, Manifest& m) {
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_name() == "--help" || opt->count() == 0) continue;
        const auto& res = opt->results();
        std::string name = opt->get_name();
        while (!name.empty() && name.front() == '-') name.erase(name.begin());
        if (res.empty()) {
            m.params[name] = true;
        } else if (res.size() == 1) {
            m.params[name] = res.front();
        } else {
            m.params[name] = res;
        }
    }
}

void emit(const json& result, const Manifest& m) {
    json out{{"result", result}, {"manifest", m.finish()}};
    std::cout << out.dump(2) << '\n';
}

std::vector<double> need_p(const Common& c) {
    if (c.p.empty()) throw UsageError("--p is required");
    return io::parse_doubles(c.p);
}

// Arrival laws from --lambda (Bernoulli) or --arrivals (pmf files: one shared or one per queue).
SystemParams load_params(const Common& c) {
    auto p = need_p(c);
    if (!c.lambda.empty() && !c.arrivals.empty()) {
        throw UsageError("give either --lambda or --arrivals, not both");
    }
    if (!c.arrivals.empty()) {
        std::vector<ArrivalDist> laws;
        if (c.arrivals.size() == 1) {
            laws.assign(p.size(), io::read_pmf_file(c.arrivals.front()));
        } else {
            require_same_size(p.size(), c.arrivals.size(), "--arrivals files");
            for (const auto& path : c.arrivals) laws.push_back(io::read_pmf_file(path));
        }
        return SystemParams(std::move(p), std::move(laws));
    }
    if (c.lambda.empty()) throw UsageError("one of --lambda or --arrivals is required");
    const auto rates = io::parse_doubles(c.lambda);
    require_same_size(p.size(), rates.size(), "--lambda");
    return SystemParams::bernoulli(std::move(p), rates);
}

QueueState start_state(const std::string& csv, std::size_t queues) {
    if (csv.empty()) return QueueState(queues, 0);
    auto q = io::parse_counts(csv);
    require_same_size(queues, q.size(), "start state");
    return q;
}

regions::Slice parse_slice(const std::string& text, std::size_t queues) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw UsageError("--slice expects l<k>=<value>");
    std::string key = text.substr(0, eq);
    if (key.rfind("lambda_", 0) == 0) {
        key = key.substr(7);
    } else if (!key.empty() && key.front() == 'l') {
        key = key.substr(1);
    }
    const auto idx = io::parse_counts(key);
    const auto val = io::parse_doubles(text.substr(eq + 1));
    if (idx.size() != 1 || val.size() != 1 || idx[0] == 0 || idx[0] > queues) {
        throw UsageError("--slice must name one coordinate between 1 and J");
    }
    return {static_cast<std::size_t>(idx[0] - 1), val[0]};
}

// Runs fn(seed) for each seed on a few worker threads; results come back in seed order.
template <typename Fn>
auto sweep(const std::vector<std::uint64_t>& seeds, Fn fn) {
    using R = decltype(fn(std::uint64_t{}));
    std::vector<std::optional<R>> out(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(seeds.size(), std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < seeds.size(); i += workers) {
                try {
                    out[i] = fn(seeds[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<R> flat;
    for (auto& r : out) flat.push_back(std::move(*r));
    return flat;
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, std::uint64_t count) {
    if (count == 0) throw UsageError("--seeds must be at least 1");
    std::vector<std::uint64_t> s(count);
    for (std::uint64_t i = 0; i < count; ++i) s[i] = first + i;
    return s;
}

void add_common(CLI::App& sub, Common& c, bool arrivals) {
    sub.add_option("--p", c.p, "attempt probabilities, comma separated");
    if (arrivals) {
        sub.add_option("--lambda", c.lambda, "Bernoulli arrival rates, comma separated");
        sub.add_option("--arrivals", c.arrivals,
                       "arrival pmf file (one shared, or one per queue)")
            ->delimiter(',');
    }
}

// Appends key/value pairs from --config for flags not already on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::vector<std::string> out;
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (!path) return out;
    std::ifstream in(*path);
    if (!in) throw UsageError("cannot open config file '" + *path + "'");
    for (const auto& [key, value] : io::read_config(in)) {
        const std::string flag = "--" + key;
        const bool given = std::any_of(out.begin(), out.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (given) continue;
        out.push_back(flag);
        if (!value.empty() && value != "true") out.push_back(value);
    }
    return out;
}

int run_region(CLI::App& sub, const Common& c, const std::string& check, bool boundary,
               std::size_t resolution, const std::string& slice, bool symmetric, std::size_t J,
               double tol, const std::string& mode_name) {
    Manifest m("region");
    record_params(sub, m);
    const int modes = !check.empty() + boundary + symmetric;
    if (modes != 1) throw UsageError("choose exactly one of --check-lambda, --boundary, --symmetric-sup");
    const std::string format = c.format.empty() ? (check.empty() ? "csv" : "json") : c.format;
    const auto p = need_p(c);

    if (symmetric) {
        if (p.size() != 1) throw UsageError("--symmetric-sup takes a single --p value");
        if (J == 0) throw UsageError("--J must be at least 1");
        const double sup = regions::symmetric_sup_lambda(p[0], J);
        if (format == "json") {
            emit(sup, m);
        } else {
            std::cout << io::format_double(sup) << '\n';
        }
        return kOk;
    }
    const auto params = SystemParams::bernoulli(p, std::vector<double>(p.size(), 0.0));
    if (boundary) {
        std::optional<regions::Slice> sl;
        if (!slice.empty()) sl = parse_slice(slice, p.size());
        const auto pts = regions::boundary_samples(params, resolution, sl);
        if (format == "csv") {
            io::write_boundary_csv(std::cout, pts, p.size());
        } else {
            json rows = json::array();
            for (const auto& bp : pts) {
                rows.push_back({{"lambda", bp.lambda},
                                {"witness", io::to_json(bp.witness)},
                                {"active_constraint", bp.active_constraint}});
            }
            emit(rows, m);
        }
        return kOk;
    }
    if (format != "json") throw UsageError("--check-lambda output is JSON only");
    const auto lambda = io::parse_doubles(check);
    require_same_size(p.size(), lambda.size(), "--check-lambda");
    regions::RegionOptions opts;
    opts.tol = tol;
    emit(io::to_json(regions::classify(params, lambda, regions::mode_from_string(mode_name), opts)), m);
    return kOk;
}

int run_simulate(CLI::App& sub, const Common& c, const std::string& system, std::uint64_t steps,
                 std::uint64_t seed, const std::string& q0, const std::string& trace,
                 std::uint64_t stride) {
    Manifest m("simulate");
    record_params(sub, m);
    m.seeds = {seed};
    const auto params = load_params(c);
    if (steps == 0) throw UsageError("--steps must be at least 1");
    sim::SimConfig cfg{steps, seed, sim::system_from_string(system), !trace.empty(), stride};
    const auto res = sim::run(params, start_state(q0, params.queues()), cfg);
    if (!trace.empty()) {
        std::ofstream out(trace);
        if (!out) throw std::runtime_error("cannot write trace file '" + trace + "'");
        io::write_trace_csv(out, *res.trace, params.queues());
    }
    emit(io::to_json(res), m);
    return kOk;
}

int run_coupling(CLI::App& sub, const Common& c, bool order, std::uint64_t steps,
                 std::uint64_t first_seed, std::uint64_t count, const std::string& q0,
                 const std::string& q0prime) {
    Manifest m(order ? "order" : "dominance");
    record_params(sub, m);
    const auto params = load_params(c);
    if (steps == 0) throw UsageError("--steps must be at least 1");
    m.seeds = seed_list(first_seed, count);
    const auto start = start_state(q0, params.queues());
    QueueState upper;
    if (order) {
        if (q0prime.empty()) throw UsageError("--q0prime is required");
        upper = start_state(q0prime, params.queues());
        if (!sim::componentwise_leq(start, upper)) {
            throw UsageError("--q0 must be componentwise below --q0prime");
        }
    }
    const auto reports = sweep(m.seeds, [&](std::uint64_t s) {
        const sim::SimConfig cfg{steps, s, sim::System::dominant, false, 1};
        return order ? sim::run_coupled_order(params, start, upper, cfg)
                     : sim::run_coupled_dominance(params, start, cfg);
    });
    json per_seed = json::array();
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        auto row = io::to_json(reports[i]);
        row["seed"] = m.seeds[i];
        per_seed.push_back(std::move(row));
        total += reports[i].violations;
    }
    emit({{"per_seed", per_seed}, {"total_violations", total}}, m);
    return total == 0 ? kOk : kFailed;
}

int run_drift(CLI::App& sub, const Common& c, std::uint64_t cross_cap,
              const std::optional<std::string>& theta, std::uint64_t sample_cap) {
    Manifest m("drift");
    record_params(sub, m);
    const auto params = load_params(c);
    const auto rates = params.rates();
    json result = io::to_json(drift::verify_theorem_assumptions(params, rates, cross_cap));
    if (theta) {
        const auto sample = drift::box_states(params.queues(), sample_cap);
        json per_queue = json::array();
        for (std::size_t j = 0; j < params.queues(); ++j) {
            if (*theta == "auto") {
                const auto cert = drift::find_theta_star(params, j, sample);
                per_queue.push_back(cert ? io::to_json(*cert) : json(nullptr));
            } else {
                const auto t = io::parse_doubles(*theta);
                if (t.size() != 1) throw UsageError("--theta takes one value or 'auto'");
                double lo = std::numeric_limits<double>::infinity();
                for (const auto& q : sample) lo = std::min(lo, drift::transience_drift(params, j, t[0], q));
                per_queue.push_back({{"theta", t[0]}, {"min_drift", lo}, {"states_checked", sample.size()}});
            }
        }
        result["transience"] = std::move(per_queue);
    }
    emit(result, m);
    return kOk;
}

struct SuiteLine {
    std::string name;
    double value;
    double tolerance;
    bool pass;
    std::string note;
};

int run_kernel_verify(CLI::App& sub, const Common& c, std::uint64_t cap, const std::string& suite,
                      std::size_t n, std::size_t k, std::size_t max_states, const std::string& system) {
    Manifest m("kernel-verify");
    record_params(sub, m);
    const std::vector<std::string> known{"lemma21", "cor21", "lemma23", "lemma24", "monotone", "all"};
    if (std::find(known.begin(), known.end(), suite) == known.end()) {
        throw UsageError("unknown --suite '" + suite + "'");
    }
    if (n == 0 || k == 0) throw UsageError("--n and --k must be at least 1");
    const auto params = load_params(c);
    const auto kern = kernel::FiniteKernel::build_truncated(params, cap, sim::system_from_string(system),
                                                            max_states);
    const auto wants = [&](const char* name) { return suite == "all" || suite == name; };
    std::uint64_t max_batch = 0;
    for (const auto& a : params.arrivals()) max_batch = std::max(max_batch, a.max_batch());

    std::vector<SuiteLine> lines;
    for (std::size_t j = 0; j < params.queues(); ++j) {
        const auto V = kernel::tabulate(kern, [&](const QueueState& x) {
            return drift::lyapunov_value(params, j, x);
        });
        const std::string tag = "[j=" + std::to_string(j + 1) + "]";
        if (wants("lemma21")) {
            double worst = 0;
            for (std::size_t x = 0; x < kern.size(); ++x) {
                for (std::size_t t1 = 1; t1 <= n; ++t1) {
                    for (std::size_t t2 = 1; t2 <= n; ++t2) {
                        worst = std::max(worst, kernel::verify_lemma21(kern, V, x, t1, t2));
                    }
                }
            }
            lines.push_back({"lemma21" + tag, worst, 1e-9, worst <= 1e-9, ""});
        }
        if (wants("cor21")) {
            const std::vector<std::vector<std::size_t>> lists{{1, 1, 1}, {2, 3}, {2, 3, 2}};
            double worst = 0;
            for (std::size_t x = 0; x < kern.size(); ++x) {
                for (const auto& t : lists) worst = std::max(worst, kernel::verify_corollary21(kern, V, x, t));
            }
            lines.push_back({"cor21" + tag, worst, 1e-9, worst <= 1e-9, ""});
        }
        if (wants("lemma24")) {
            const auto dec = kernel::level_decomposition(kern, kernel::drift_vector(kern, V));
            double worst = 0;
            for (std::size_t x = 0; x < kern.size(); ++x) {
                for (std::size_t steps = 1; steps <= n; ++steps) {
                    worst = std::max(worst, kernel::verify_lemma24(kern, V, dec, x, steps));
                }
            }
            lines.push_back({"lemma24" + tag, worst, 1e-9, worst <= 1e-9, ""});
        }
        if (wants("lemma23")) {
            for (std::size_t kk = 1; kk <= k; ++kk) {
                const auto rep = kernel::verify_lemma23(kern, params, j, kk);
                lines.push_back({"lemma23" + tag + "[k=" + std::to_string(kk) + "]",
                                 static_cast<double>(rep.violations), 0.0, rep.violations == 0,
                                 rep.inconclusive ? "inconclusive: no interior states" : ""});
            }
        }
        if (wants("monotone")) {
            for (std::size_t steps = 1; steps <= n; ++steps) {
                const auto rep = kernel::verify_nstep_monotone(kern, V, max_batch, steps);
                lines.push_back({"monotone" + tag + "[n=" + std::to_string(steps) + "]",
                                 static_cast<double>(rep.violations), 0.0, rep.violations == 0,
                                 rep.inconclusive ? "inconclusive: no interior states" : ""});
            }
        }
    }

    const bool ok = std::all_of(lines.begin(), lines.end(), [](const SuiteLine& l) { return l.pass; });
    if (c.format == "json") {
        json rows = json::array();
        for (const auto& l : lines) {
            rows.push_back({{"check", l.name}, {"value", l.value}, {"tolerance", l.tolerance},
                            {"pass", l.pass}, {"note", l.note}});
        }
        emit({{"checks", rows}, {"pass", ok}, {"states", kern.size()}}, m);
    } else {
        for (const auto& l : lines) {
            std::cout << l.name << " value=" << io::format_double(l.value)
                      << " tol=" << io::format_double(l.tolerance) << ' '
                      << (l.pass ? "PASS" : "FAIL");
            if (!l.note.empty()) std::cout << " (" << l.note << ')';
            std::cout << '\n';
        }
        std::cout << (ok ? "all checks passed" : "some checks failed") << '\n';
    }
    return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    CLI::App app{"Slotted Aloha stability toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ALOHA_VERSION);

    Common region_c, sim_c, dom_c, ord_c, drift_c, kern_c;

    auto* region = app.add_subcommand("region", "stability/instability region queries");
    add_common(*region, region_c, false);
    std::string check, slice, mode = "default";
    bool boundary = false, symmetric = false;
    std::size_t resolution = 50, J = 0;
    double tol = 0.0;
    region->add_option("--check-lambda", check, "rate vector to classify");
    region->add_flag("--boundary", boundary, "export boundary samples");
    region->add_option("--resolution", resolution, "ray grid resolution")->check(CLI::PositiveNumber);
    region->add_option("--slice", slice, "fix one coordinate, e.g. l3=0");
    region->add_flag("--symmetric-sup", symmetric, "largest stable symmetric rate");
    region->add_option("--J", J, "number of queues for --symmetric-sup");
    region->add_option("--tol", tol, "strictness margin")->check(CLI::NonNegativeNumber);
    region->add_option("--mode", mode, "instability test")->check(CLI::IsMember({"default", "dominant-only"}));
    region->add_option("--format", region_c.format)->check(CLI::IsMember({"json", "csv"}));

    auto* simulate = app.add_subcommand("simulate", "simulate one system");
    add_common(*simulate, sim_c, true);
    std::string system = "dominant", q0, trace;
    std::uint64_t steps = 0, seed = 1, stride = 1;
    simulate->add_option("--system", system)->check(CLI::IsMember({"original", "dominant"}));
    simulate->add_option("--steps", steps)->required();
    simulate->add_option("--seed", seed);
    simulate->add_option("--q0", q0, "start state, comma separated");
    simulate->add_option("--trace", trace, "CSV path for sampled states");
    simulate->add_option("--stride", stride)->check(CLI::PositiveNumber);

    std::uint64_t dom_steps = 100000, dom_seed = 1, dom_count = 1;
    std::string dom_q0;
    auto* dominance = app.add_subcommand("dominance", "coupled original vs dominant runs");
    add_common(*dominance, dom_c, true);
    dominance->add_option("--steps", dom_steps);
    dominance->add_option("--seed", dom_seed, "first seed");
    dominance->add_option("--seeds", dom_count, "number of consecutive seeds");
    dominance->add_option("--q0", dom_q0);

    std::uint64_t ord_steps = 100000, ord_seed = 1, ord_count = 1;
    std::string ord_q0, ord_q0prime;
    auto* order = app.add_subcommand("order", "coupled dominant runs from ordered starts");
    add_common(*order, ord_c, true);
    order->add_option("--steps", ord_steps);
    order->add_option("--seed", ord_seed, "first seed");
    order->add_option("--seeds", ord_count, "number of consecutive seeds");
    order->add_option("--q0", ord_q0);
    order->add_option("--q0prime", ord_q0prime);

    std::uint64_t cross_cap = 0, sample_cap = 2;
    std::optional<std::string> theta;
    auto* driftcmd = app.add_subcommand("drift", "drift criterion report");
    add_common(*driftcmd, drift_c, true);
    driftcmd->add_option("--cross-check-cap", cross_cap, "compare against enumeration on {0..B}^J");
    driftcmd->add_option("--theta", theta, "transience parameter in (0,1), or 'auto'");
    driftcmd->add_option("--sample-cap", sample_cap, "transience sample box {0..B}^J");

    std::uint64_t cap = 0;
    std::string suite = "all", kern_system = "dominant";
    std::size_t n = 5, k = 3, max_states = kernel::kDefaultMaxStates;
    auto* kv = app.add_subcommand("kernel-verify", "finite-chain identity checks");
    add_common(*kv, kern_c, true);
    kv->add_option("--cap", cap)->required();
    kv->add_option("--suite", suite);
    kv->add_option("--n", n, "largest step count for lemma21/lemma24/monotone");
    kv->add_option("--k", k, "largest k for lemma23");
    kv->add_option("--max-states", max_states);
    kv->add_option("--system", kern_system)->check(CLI::IsMember({"original", "dominant"}));
    kv->add_option("--format", kern_c.format)->check(CLI::IsMember({"json", "text"}));

    try {
        args = expand_config(std::move(args));
        // CLI11 consumes the vector from the back.
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (region->parsed()) {
            return run_region(*region, region_c, check, boundary, resolution, slice, symmetric, J, tol, mode);
        }
        if (simulate->parsed()) return run_simulate(*simulate, sim_c, system, steps, seed, q0, trace, stride);
        if (dominance->parsed()) {
            return run_coupling(*dominance, dom_c, false, dom_steps, dom_seed, dom_count, dom_q0, "");
        }
        if (order->parsed()) {
            return run_coupling(*order, ord_c, true, ord_steps, ord_seed, ord_count, ord_q0, ord_q0prime);
        }
        if (driftcmd->parsed()) return run_drift(*driftcmd, drift_c, cross_cap, theta, sample_cap);
        if (kv->parsed()) return run_kernel_verify(*kv, kern_c, cap, suite, n, k, max_states, kern_system);
    } catch (const BudgetError& e) {
        std::cerr << "error: budget exceeded: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kFailed;
    }
    return kUsage;
}
