#include "aloha/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace aloha::io {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
    const auto hash = line.find('#');
    return hash == std::string::npos ? line : line.substr(0, hash);
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

json to_json(const Permutation& eta) { return eta.one_based(); }

json to_json(const regions::ConstraintProfile& profile) {
    return {{"eta", to_json(profile.eta)}, {"values", profile.values}};
}

json to_json(const regions::MembershipVerdict& verdict) {
    json j;
    j["status"] = regions::to_string(verdict.status);
    j["witness"] = verdict.witness ? to_json(*verdict.witness) : json(nullptr);
    j["profile"] = verdict.profile ? to_json(*verdict.profile) : json(nullptr);
    j["mode"] = verdict.mode ? json(regions::to_string(*verdict.mode)) : json(nullptr);
    return j;
}

json to_json(const sim::SimResult& result, bool include_trace) {
    json j;
    j["final_state"] = result.final_state;
    j["time_avg_queue"] = result.time_avg_queue;
    j["max_queue"] = result.max_queue;
    j["departures"] = result.departures;
    j["slots"] = result.slots;
    if (include_trace && result.trace) {
        json rows = json::array();
        for (const auto& [slot, q] : *result.trace) rows.push_back({{"slot", slot}, {"q", q}});
        j["trace"] = std::move(rows);
    } else {
        j["trace"] = nullptr;
    }
    return j;
}

json to_json(const sim::CouplingReport& report) {
    json j{{"violations", report.violations}, {"slots", report.slots}};
    j["first_violation"] = report.first_violation ? json(*report.first_violation) : json(nullptr);
    return j;
}

json to_json(const drift::DriftReport& report) {
    json details;
    details["constraint_values"] = report.constraint_values;
    details["monotone_per_queue"] = report.monotone_per_queue;
    details["assumption21_ok"] = report.assumption21_ok;
    details["satisfied"] = report.satisfied;
    details["max_enumeration_gap"] =
        report.max_enumeration_gap ? json(*report.max_enumeration_gap) : json(nullptr);
    details["cross_check_states"] = report.cross_check_states;
    return {{"epsilon", report.epsilon},
            {"eta_bound", report.eta_bound},
            {"monotone", report.monotone},
            {"assumption22_ok", report.assumption22_ok},
            {"details", std::move(details)}};
}

json to_json(const drift::ThetaCertificate& cert) {
    return {{"theta", cert.theta},
            {"min_drift", cert.min_drift},
            {"states_checked", cert.states_checked},
            {"caveat", cert.caveat}};
}

json to_json(const kernel::DriftBoundReport& report) {
    return {{"checked", report.checked},
            {"violations", report.violations},
            {"max_excess", report.max_excess},
            {"epsilon", report.epsilon},
            {"inconclusive", report.inconclusive}};
}

json to_json(const kernel::MonotoneReport& report) {
    return {{"pairs_checked", report.pairs_checked},
            {"violations", report.violations},
            {"inconclusive", report.inconclusive}};
}

void write_boundary_csv(std::ostream& out, const std::vector<regions::BoundaryPoint>& points,
                        std::size_t queues) {
    for (std::size_t j = 0; j < queues; ++j) out << "lambda_" << j + 1 << ',';
    out << "witness_eta,active_constraint_j\n";
    for (const auto& bp : points) {
        for (double l : bp.lambda) out << format_double(l) << ',';
        const auto labels = bp.witness.one_based();
        for (std::size_t k = 0; k < labels.size(); ++k) out << (k ? "-" : "") << labels[k];
        out << ',' << bp.active_constraint << '\n';
    }
}

void write_trace_csv(std::ostream& out,
                     const std::vector<std::pair<std::uint64_t, QueueState>>& trace,
                     std::size_t queues) {
    out << "slot";
    for (std::size_t j = 0; j < queues; ++j) out << ",q_" << j + 1;
    out << '\n';
    for (const auto& [slot, q] : trace) {
        out << slot;
        for (auto c : q) out << ',' << c;
        out << '\n';
    }
}

ArrivalDist read_pmf(std::istream& in) {
    std::vector<ArrivalDist::Atom> atoms;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        std::istringstream fields(body);
        long long batch = -1;
        double prob = -1.0;
        std::string extra;
        if (!(fields >> batch >> prob) || (fields >> extra) || batch < 0) {
            throw std::invalid_argument("pmf line " + std::to_string(lineno) +
                                        ": expected '<batch> <prob>'");
        }
        atoms.emplace_back(static_cast<std::uint64_t>(batch), prob);
    }
    return ArrivalDist(std::move(atoms));
}

ArrivalDist read_pmf_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open pmf file '" + path + "'");
    return read_pmf(in);
}

std::map<std::string, std::string> read_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        std::string key, value;
        const auto eq = body.find('=');
        if (eq != std::string::npos) {
            key = trim(body.substr(0, eq));
            value = trim(body.substr(eq + 1));
        } else {
            const auto sp = body.find_first_of(" \t");
            key = trim(body.substr(0, sp));
            value = sp == std::string::npos ? "" : trim(body.substr(sp));
        }
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing key");
        }
        out[key] = value;
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    for (const auto& item : split_csv(csv)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw std::invalid_argument("not a number: '" + item + "'");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<std::uint64_t> parse_counts(const std::string& csv) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_csv(csv)) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("not a nonnegative integer: '" + item + "'");
        }
        out.push_back(std::stoull(item));
    }
    return out;
}

}  // namespace aloha::io
