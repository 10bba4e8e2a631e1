#ifndef MODEFLOW_SERIALIZATION_HPP
#define MODEFLOW_SERIALIZATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modeflow/picard.hpp"

namespace modeflow {

/// Schema-versioned JSON documents. Writers emit the current schema strings
/// ("modeflow/field/v1", "modeflow/vector_field/v1", "modeflow/problem/v1",
/// "modeflow/report/v1"); readers reject any other schema, any unknown key at
/// any nesting level, and any structural inconsistency, all with
/// std::invalid_argument. Numbers round-trip bit-exactly; non-finite values
/// are written as JSON null and read back as +infinity (they only occur where
/// "no finite bound" is meaningful, e.g. condition margins).

std::string write_field(const Field& field);
Field read_field(const std::string& text);

std::string write_vector_field(const VectorField& field);
VectorField read_vector_field(const std::string& text);

/// Problem documents carry geometry, grid, box, physics, the four data
/// fields, the anchor, and the optional certification knobs. Reading re-runs
/// the full factory validation (shapes, solenoidal initial data, parameters).
std::string write_problem(const TorusProblem& problem);
TorusProblem read_problem(const std::string& text);

/// One named check inside a report: verdict, headline margin, and the numbers
/// behind it in human-readable form.
struct CheckRecord {
    std::string name;
    bool passed = false;
    double margin = 0.0;
    std::string details;
};

/// Solution payload of a solve run: the reconstruction at the final state
/// plus the residual forcing it was built from.
struct SolveSolution {
    VectorField u;
    AnchoredScalar p;
    std::optional<VectorField> rho;
    std::optional<VectorField> h;
    VectorField r;
};

/// Machine-readable run report. Every number is the producing operation's
/// return value verbatim; the report layer never re-rounds.
struct RunReport {
    std::string command;
    std::string input_digest; ///< "fnv1a:" + 16 hex digits over the input bytes
    double wall_ms = 0.0;
    std::vector<CheckRecord> checks;
    std::vector<IterationRecord> iterations; ///< solve runs; empty otherwise
    std::vector<std::string> warnings;
    std::string verdict; ///< "converged" / "max_iterations" / "diverged"; empty outside solves
    std::optional<double> final_residual;
    std::optional<double> condition_margin; ///< +inf = no finite bound required
    std::optional<SolveSolution> solution;
};

std::string write_report(const RunReport& report);
RunReport read_report(const std::string& text);

/// One iteration series as CSV: header row plus one row per recorded
/// iteration (iteration 0 included), LF line endings, RFC-style quoting, and
/// 17-significant-digit decimals so parsing reproduces the doubles exactly.
/// Selectors: "residuals", "update-norms", "condition-margins".
/// @throws std::invalid_argument on an unknown selector.
std::string emit_csv_series(const RunReport& report, const std::string& selector);

/// FNV-1a 64-bit digest of a byte string (input fingerprint for reports).
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace modeflow

#endif // MODEFLOW_SERIALIZATION_HPP
