#ifndef MODEFLOW_THEOREM_CONSTANTS_HPP
#define MODEFLOW_THEOREM_CONSTANTS_HPP

#include <limits>
#include <map>
#include <utility>

#include "modeflow/decay_classes.hpp"
#include "modeflow/mode.hpp"
#include "modeflow/propagators.hpp"

namespace modeflow {

/// Finite surrogate for whole-space data on the Fourier side:
///   f^(ω) = Σ_β a_β · ω^β · e^{−b|ω|²},
/// stored as the coefficient magnitudes |a_β| over nonnegative multi-indices.
/// Everything downstream consumes only the magnitudes, so the expansion
/// represents the worst field compatible with the bounds.
struct GaussianExpansion {
    double b = 1.0;              ///< Gaussian envelope rate, positive
    int n = 1;                   ///< ambient dimension
    std::map<Mode, double> terms; ///< multi-index β → |a_β| ≥ 0
};

/// @throws std::invalid_argument unless b > 0 is finite, n ≥ 1, and every
/// term has a nonnegative n-dimensional multi-index with a finite
/// nonnegative coefficient.
void validate(const GaussianExpansion& expansion);

/// Whether every coefficient magnitude obeys the declared class envelope
/// |a_β| ≤ d·r^{|β|}/(2β)!.
bool class_consistent(const GaussianExpansion& expansion, const GParams& params);

/// The twelve data constants of the whole-space existence conditions:
///   C_{·,j} = max_k ∫ |ω|^j sup_t |·^_k(ω,t)| dω,
///   D_{·,j} = max_k sup_{ξ,t} |ξ|^j |·_k(ξ,t)|,
/// evaluated (or bounded) for the initial data φ, η and the forcings f, g.
struct DataConstants {
    double C_phi0 = 0.0;
    double C_phi1 = 0.0;
    double C_eta0 = 0.0;
    double C_eta1 = 0.0;
    double C_f0 = 0.0;
    double C_g0 = 0.0;
    double D_phi0 = 0.0;
    double D_phi1 = 0.0;
    double D_eta0 = 0.0;
    double D_eta1 = 0.0;
    double D_f0 = 0.0;
    double D_g0 = 0.0;
};

/// @throws std::invalid_argument if any entry is negative or not finite.
void validate(const DataConstants& constants);

/// Certified upper bounds for one field's pair of constants at a given j.
struct ConstantBounds {
    double C = 0.0;
    double D = 0.0;
};

/// Upper bounds for ∫|ω|^j·|f^(ω)| dω and sup_ξ |ξ|^j·|f^(ξ)| when f^ is the
/// given expansion, j ∈ {0, 1}.
///
/// The D bound maximizes each term exactly: over directions the angular
/// factor Π|ω_k|^{β_k} peaks at ω_k² ∝ β_k, over the radius the remaining
/// one-dimensional profile ρ^{|β|+j} e^{−bρ²} peaks at ρ² = (|β|+j)/(2b),
/// giving Π_k (β_k/|β|)^{β_k/2} · ((|β|+j)/(2be))^{(|β|+j)/2} per term. For
/// j = 0 this collapses to the familiar Π_k (β_k/(2be))^{β_k/2}.
///
/// The C bound integrates term by term, bounding |ω| ≤ Σ_k|ω_k| for j = 1 so
/// every piece is a product of one-dimensional Gaussian moments in closed
/// form. Both are upper bounds by the triangle inequality, never estimates.
ConstantBounds data_constants(const GaussianExpansion& expansion, int j);

/// The constants of the whole-space existence condition for the coupled
/// system, M(C,D) < C and N(C,D) < D, together with their building blocks.
struct Theorem41Constants {
    double M0 = 0.0;
    double M1 = 0.0;
    double Mprime = 0.0;
    double M = 0.0;
    double N1 = 0.0;
    double N2 = 0.0;
    double N = 0.0;
};

/// Evaluates the constant displays term for term:
///   M_j = C_{φ,j} + (n+1)(D+D_{f,0}+nBD_{η,0})S_n/(ν(n−2+j))
///        + n(n+1)B(D+D_{g,0})S_n/(κν(n−4+j))
///        + ν⁻¹n(n+1)(C+C_{f,0}+nBC_{η,0}) + κ⁻¹ν⁻¹n(n+1)B(C+C_{g,0}),
///   M′  = C_{η,1} + (D_{g,0}+D)S_n/(κ(n−1)) + κ⁻¹(C_{g,0}+C),
///   M   = (2π)^{−n} n M_0 max{M_1, M′},   N = n(2π)^{−n} max{N_1, N_2},
/// with N_1, N_2 the two long advection bounds (including the 1/3–2/3 and
/// 1/5–4/5 interpolation products). Uses physics.nu, physics.kappa and the
/// coupling magnitude B = physics.B.
///
/// @throws std::invalid_argument for n < 9 (the N_2 display needs n−7 > 0),
/// nonpositive C or D, or invalid data/physics.
Theorem41Constants theorem41_constants(double C, double D, const DataConstants& data,
                                       const PhysicsParams& physics, int n);

/// Deterministic sweep parameters for feasibility_search.
struct FeasibilitySweep {
    double lo = 1e-8;          ///< smallest C and D probed
    double hi = 1e8;           ///< largest C and D probed
    int points_per_decade = 33;
    int bisection_steps = 20;  ///< local refinement rounds after the sweep
};

/// Outcome of the (C, D) search. When no witness exists on the grid the
/// reported point is the least-violating one and `found` is false.
struct FeasibilityResult {
    bool found = false;
    double C = 0.0;
    double D = 0.0;
    double margin = 0.0;    ///< min(C/M, D/N) at the reported point
    double violation = std::numeric_limits<double>::infinity(); ///< max(M/C, N/D)
    Theorem41Constants constants; ///< evaluation at the reported point
};

/// Scans a logarithmic (C, D) grid over [lo, hi]² for M(C,D) < C and
/// N(C,D) < D, then refines the best cell by repeated step-halving. The scan
/// order and strict-improvement rule make the result a pure function of the
/// inputs (ties keep the lexicographically earlier grid point).
///
/// @throws std::invalid_argument for n < 9, invalid inputs, or a degenerate
/// sweep specification.
FeasibilityResult feasibility_search(const DataConstants& data, const PhysicsParams& physics,
                                     int n, const FeasibilitySweep& sweep = {});

/// Verdicts for the two displayed inequalities of the velocity-only system
/// on R^n (n ≥ 5). Margins are rhs/lhs, so > 1 means the inequality holds.
struct NsConditionCheck {
    bool first_holds = false;   ///< the D-side inequality, rhs (2π)^n D / n
    bool second_holds = false;  ///< the C-side inequality, rhs (2π)^n C / n
    double first_margin = 0.0;
    double second_margin = 0.0;
};

/// @throws std::invalid_argument for n < 5, nonpositive C, D, or ν, or
/// invalid data constants. Only the φ and f entries of `data` participate.
NsConditionCheck ns_rn_condition(double C, double D, const DataConstants& data, double nu,
                                 int n);

} // namespace modeflow

#endif // MODEFLOW_THEOREM_CONSTANTS_HPP
