#ifndef MODEFLOW_VERIFY_SUITES_HPP
#define MODEFLOW_VERIFY_SUITES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "modeflow/serialization.hpp"

namespace modeflow {

/// Outcome of the exhaustive factorial-ratio enumeration: every admissible
/// tuple (α₁, α₂, β, γ, k) with dimension ≤ max_dim and entries ≤ max_entry,
/// evaluated in exact rational arithmetic.
struct Lemma33Census {
    long long admissible = 0;
    long long violations = 0;
    double max_ratio = 0.0;       ///< largest L found (1 would mean the bound is tight)
    std::string max_ratio_exact;  ///< the same L as an exact fraction "p/q"
    std::string first_violation;  ///< first tuple with L > 1 in scan order; "" if none
};

Lemma33Census lemma33_census(int max_dim, int max_entry);

/// Sizes, seed, and fault hooks for the named verification suites.
struct VerifyOptions {
    std::uint64_t seed = 2026;
    int lemma35_instances = 50;
    int closure_instances = 20;
    int lemma33_max_dim = 2;
    int lemma33_max_entry = 4;
    /// Fault-injection hook: evaluates the k = 0 even moment with the empty
    /// double factorial (−1)!! corrupted from 1 to 0, so the quadrature
    /// comparison must fail. Exists to prove the harness catches a broken
    /// empty-product convention rather than vacuously passing.
    bool override_neg1_double_factorial = false;
    /// Which suites run, in order: "lemma32" (closed-form moments, the
    /// multi-moment bound, and the sphere-area recursion), "lemma33"
    /// (exhaustive census), "lemma35" (bilinear bound on random instances),
    /// "class-closure" (torus product and derivative class membership).
    std::vector<std::string> suites = {"lemma32", "lemma33", "lemma35", "class-closure"};
};

/// Runs the selected suites and returns one record per check, in execution
/// order. A record's margin is its headline ratio: worst relative error for
/// oracle comparisons, worst bound ratio (≤ 1 passes) for memberships and
/// inequalities.
/// @throws std::invalid_argument on an unknown suite name or nonpositive sizes.
std::vector<CheckRecord> run_verify_suites(const VerifyOptions& options);

} // namespace modeflow

#endif // MODEFLOW_VERIFY_SUITES_HPP
