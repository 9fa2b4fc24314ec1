#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aloha/drift.hpp"
#include "aloha/kernel.hpp"
#include "aloha/model.hpp"
#include "aloha/regions.hpp"
#include "aloha/simulate.hpp"

namespace aloha::io {

using nlohmann::json;

json to_json(const Permutation& eta);
json to_json(const regions::ConstraintProfile& profile);
json to_json(const regions::MembershipVerdict& verdict);
json to_json(const sim::SimResult& result, bool include_trace = false);
json to_json(const sim::CouplingReport& report);
json to_json(const drift::DriftReport& report);
json to_json(const drift::ThetaCertificate& cert);
json to_json(const kernel::DriftBoundReport& report);
json to_json(const kernel::MonotoneReport& report);

/// "%.17g" rendering.
std::string format_double(double value);

/// Header `lambda_1,...,lambda_J,witness_eta,active_constraint_j`; witness
/// written one-based and dash-separated.
void write_boundary_csv(std::ostream& out, const std::vector<regions::BoundaryPoint>& points,
                        std::size_t queues);

/// `slot,q_1,...,q_J` rows.
void write_trace_csv(std::ostream& out,
                     const std::vector<std::pair<std::uint64_t, QueueState>>& trace,
                     std::size_t queues);

/// Lines of `<batch> <prob>`; `#` starts a comment. Must sum to 1 within 1e-12.
ArrivalDist read_pmf(std::istream& in);
ArrivalDist read_pmf_file(const std::string& path);

/// Flat `key = value` (or `key value`) lines, `#` comments. Keys may carry a leading `--`.
std::map<std::string, std::string> read_config(std::istream& in);

std::vector<double> parse_doubles(const std::string& csv);
std::vector<std::uint64_t> parse_counts(const std::string& csv);

}  // namespace aloha::io
