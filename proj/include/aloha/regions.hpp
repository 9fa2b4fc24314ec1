#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aloha/model.hpp"

namespace aloha::regions {

/// Left-hand sides of the nested stability constraints under ordering `eta`:
/// values[pos] = λ_{η_pos}/(p_{η_pos} v_pos) + Σ_{k<pos} λ_{η_k}/v_k.
struct ConstraintProfile {
    Permutation eta;
    std::vector<double> values;
};

enum class Status { stable_sufficient, unstable_sufficient, inconclusive };

enum class InstabilityMode {
    /// Both clauses of the instability condition: S1 is unstable.
    original,
    /// Any single violated constraint: only the dominant system is known to be unstable.
    dominant_only,
};

const char* to_string(Status status) noexcept;
const char* to_string(InstabilityMode mode) noexcept;
InstabilityMode mode_from_string(const std::string& name);

struct MembershipVerdict {
    Status status = Status::inconclusive;
    std::optional<Permutation> witness;
    std::optional<ConstraintProfile> profile;
    /// Set for unstable verdicts: which instability test fired.
    std::optional<InstabilityMode> mode;
};

struct RegionOptions {
    /// Strictness margin: stable needs value < 1 - tol, unstable needs value > 1 + tol.
    double tol = 0.0;
    /// Above this many queues every ordering is not scanned; `candidates` must be given.
    std::size_t permutation_cap = 8;
    /// Explicit orderings to scan instead of all J! permutations.
    std::optional<std::vector<Permutation>> candidates;
};

ConstraintProfile constraint_profile(const SystemParams& params, const Permutation& eta,
                                     std::span<const double> lambda);

/// Orderings scanned for membership, lexicographic when enumerated.
std::vector<Permutation> candidate_orderings(std::size_t queues, const RegionOptions& opts);

MembershipVerdict in_C(const SystemParams& params, std::span<const double> lambda,
                       const RegionOptions& opts = {});

MembershipVerdict in_D(const SystemParams& params, std::span<const double> lambda,
                       InstabilityMode mode = InstabilityMode::original,
                       const RegionOptions& opts = {});

/// Stable if in C, else unstable if in D under `mode`, else inconclusive.
MembershipVerdict classify(const SystemParams& params, std::span<const double> lambda,
                           InstabilityMode mode = InstabilityMode::original,
                           const RegionOptions& opts = {});

using Point = std::vector<double>;

/// The thirteen named points of the three-queue region picture
/// (A, B, C, O, alpha, beta, gamma, P, Q, X, Y, E, F).
std::map<std::string, Point> figure1_vertices(const SystemParams& params);

struct BoundaryPoint {
    Point lambda;
    Permutation witness;
    /// One-based position within `witness` of the binding constraint.
    std::size_t active_constraint = 0;
};

/// Fix coordinate `index` (zero-based) at `value`.
struct Slice {
    std::size_t index = 0;
    double value = 0.0;
};

/// Points on the boundary of C along rays through a simplex grid of the
/// given resolution. J must be 2 or 3.
std::vector<BoundaryPoint> boundary_samples(const SystemParams& params, std::size_t resolution,
                                            std::optional<Slice> slice = std::nullopt);

/// sup{λ : (λ, …, λ) ∈ C} for J identical queues with attempt probability p.
double symmetric_sup_lambda(double p, std::size_t queues);

}  // namespace aloha::regions
