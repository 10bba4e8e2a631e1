#ifndef MODEFLOW_PICARD_HPP
#define MODEFLOW_PICARD_HPP

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "modeflow/field_ops.hpp"
#include "modeflow/propagators.hpp"

namespace modeflow {

enum class ProblemKind { NavierStokes, Boussinesq };

/// One torus fixed-point problem: geometry, physics, data, and the pressure
/// anchor. The density-side data (η, g) are stored as zero fields for plain
/// Navier–Stokes and the coupling matrix is ignored there.
struct TorusProblem {
    TorusGeometry geometry;
    TimeGrid grid;
    ModeBox box;
    PhysicsParams physics;
    ProblemKind kind = ProblemKind::NavierStokes;
    VectorField phi; ///< spatial initial velocity, divergence-free
    VectorField eta; ///< spatial initial density
    VectorField f;   ///< time-sampled velocity forcing
    VectorField g;   ///< time-sampled density forcing
    std::vector<double> x0;
    std::vector<double> p0;
    /// Ball radius the problem wants certified; when absent, reports carry
    /// the best margin any radius could achieve.
    std::optional<double> condition_C;
    /// Envelope for the ball norm's time-tail correction. Applied only to
    /// ball norms (class membership radii), never to residuals or updates —
    /// the tail is a class bound, not a property of a particular field.
    std::optional<KParams> ball_tail;
};

/// Validated Navier–Stokes problem. Throws std::invalid_argument on shape
/// mismatches or when max |div φ^| exceeds 1e−10.
TorusProblem make_ns_problem(TorusGeometry geometry, PhysicsParams physics, VectorField phi,
                             VectorField f, std::vector<double> x0, std::vector<double> p0,
                             std::optional<double> condition_C = std::nullopt,
                             std::optional<KParams> ball_tail = std::nullopt);

/// Validated Boussinesq problem (adds density data and the coupling matrix
/// carried by `physics`).
TorusProblem make_boussinesq_problem(TorusGeometry geometry, PhysicsParams physics,
                                     VectorField phi, VectorField eta, VectorField f,
                                     VectorField g, std::vector<double> x0,
                                     std::vector<double> p0,
                                     std::optional<double> condition_C = std::nullopt,
                                     std::optional<KParams> ball_tail = std::nullopt);

/// One Picard iterate: the residual forcing r (and density analogue h for
/// Boussinesq) plus the reconstruction computed when the map was last applied
/// to this state's predecessor. A freshly built initial state has no cache.
struct IterationState {
    VectorField r;
    std::optional<VectorField> h;
    int iteration = 0;
    std::optional<VectorField> u;
    std::optional<VectorField> rho;
    std::optional<AnchoredScalar> p;
};

/// State at the center of the ball: r = 0 (h = 0 for Boussinesq), no cache.
IterationState initial_state(const TorusProblem& problem);

/// One application of T: reconstruct ρ and u from the state's (r, h), then
///   r'_k = −Σ_j u_j · ∂u_k/∂x_j,   h'_k = −Σ_j u_j · ∂ρ_k/∂x_j,
/// with products truncated to the problem's mode box. Returns the advanced
/// state carrying (r', h') and caching the u, ρ, p of this application.
/// @throws std::invalid_argument on an incompatible state
/// @throws std::runtime_error when the summed convolution truncation loss
///         exceeds `truncation_cap`
IterationState apply_T(const TorusProblem& problem, const IterationState& state,
                       double truncation_cap = std::numeric_limits<double>::infinity());

enum class Verdict { Converged, MaxIterations, Diverged };

/// Verbatim per-iterate measurements. For plain Picard the update Δr_i =
/// r_i − r_{i−1} equals the negated residual field of r_{i−1}, so
/// update_norm(i) == residual_norm(i−1) by construction.
struct IterationRecord {
    int iteration = 0;
    double update_norm = 0.0;      ///< max_k I(r_i − r_{i−1}); 0 at iteration 0
    double residual_norm = 0.0;    ///< max_k I(r_i + (u·∇u)_k), u built from r_i
    double ball_norm = 0.0;        ///< max_k I(r_k), tail-corrected when supplied
    double condition_margin = 0.0; ///< problem-level smallness margin (constant)
    double contraction = 0.0;      ///< update_i / update_{i−1}; 0 while undefined
    double max_divergence = 0.0;   ///< max mode magnitude of div u at this iterate

    bool operator==(const IterationRecord&) const = default;
};

struct FixedPointReport {
    Verdict verdict = Verdict::MaxIterations;
    std::vector<IterationRecord> records;
    IterationState final_state;
    double final_residual = 0.0;
};

/// Plain Picard loop: repeat r ← T(r) until max_k I(r − T(r)) < tol, at most
/// max_iter updates. Declares divergence when the update norm exceeds 10× its
/// running minimum. The residual sequence is recorded exactly as measured.
/// @throws std::invalid_argument unless max_iter ≥ 1 and tol > 0
FixedPointReport iterate(const TorusProblem& problem, const IterationState& initial, int max_iter,
                         double tol,
                         double truncation_cap = std::numeric_limits<double>::infinity());

struct ConditionCheck {
    bool holds = false;
    double margin = 0.0;      ///< C / (κ′(A + 2C)²); condition holds iff > 1
    double kappa_prime = 0.0; ///< n·max_p l_p / (2πν)
    double data_norm = 0.0;   ///< A = Ī(φ) + 2I(f), max over components
};

/// Smallness condition κ′[Ī(φ) + 2I(f) + 2C]² < C.
/// @throws std::invalid_argument unless C > 0
ConditionCheck check_condition_t42(const TorusProblem& problem, double C);

/// κ′ = n·max_p l_p / (2πν).
double t42_kappa_prime(const TorusGeometry& geometry, double nu);

/// A = Ī(φ) + 2I(f) with both norms taken as the max over components,
/// matching the ball norm ‖ζ‖ = max_k I(r_k).
double t42_data_norm(const TorusProblem& problem);

/// All C with κ′(A + 2C)² < C: the open interval between the roots of
/// 4κ′C² + (4κ′A − 1)C + κ′A² = 0, or EMPTY when the discriminant
/// 1 − 8κ′A is nonpositive (every radius fails).
std::optional<std::pair<double, double>> feasible_C_interval(const TorusProblem& problem);

/// Residual diagnostics at a state: per-component I(r_k + (u·∇u)_k) with u
/// rebuilt from the state's own r (and the density analogue for Boussinesq),
/// the largest divergence mode of that u, and the pressure anchor error.
struct ResidualReport {
    std::vector<double> velocity_residuals;
    std::vector<double> density_residuals;
    double max_divergence = 0.0;
    double anchor_error = 0.0;
};

ResidualReport residual_fields(const TorusProblem& problem, const IterationState& state);

} // namespace modeflow

#endif // MODEFLOW_PICARD_HPP
