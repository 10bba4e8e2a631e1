#ifndef MODEFLOW_PROPAGATORS_HPP
#define MODEFLOW_PROPAGATORS_HPP

#include <optional>
#include <string>
#include <vector>

#include "modeflow/field_ops.hpp"

namespace modeflow {

/// Pressure fluctuation pinned to a reference value: the stored field
/// satisfies evaluate(field, x0, t_i) = p0[i] (the anchor condition
/// p(x_0, t) = p_0(t)) up to roundoff.
struct AnchoredScalar {
    Field field;
    std::vector<double> x0;
    std::vector<double> p0;
};

/// Physical constants of the coupled system: viscosity ν, diffusivity κ, the
/// density-coupling matrix A (empty for pure Navier-Stokes), and its derived
/// magnitude B = max |a_{ij}|.
struct PhysicsParams {
    double nu = 0.0;
    double kappa = 0.0;
    std::vector<std::vector<double>> A;
    double B = 0.0;
};

/// Build PhysicsParams with B derived from A.
/// @throws std::invalid_argument unless ν, κ > 0 and A is empty or square.
PhysicsParams make_physics_params(double nu, double kappa,
                                  std::vector<std::vector<double>> coupling = {});

/// Heat flow with forcing on the torus: per mode m with rate
/// λ_m = Σ_j (2 m_j π / l_j)² μ,
///   û(m, t) = e^{−λ_m t} [ φ̂(m) + ∫_0^t f̂(m, τ) e^{λ_m τ} dτ ].
/// The Duhamel integral is evaluated by an exponential integrator that is
/// exact for coefficient trajectories piecewise linear between grid samples;
/// weights switch to series form below |λΔ| < 1e−6 (covering λ = 0 exactly).
/// @throws std::invalid_argument on μ ≤ 0 or geometry/grid/box mismatch.
Field heat_propagate(const Field& initial, const Field& forcing, double mu,
                     const TorusGeometry& geometry, const TimeGrid& grid);

/// Solve Δp = g on the torus: p̂(m) = −ĝ(m) / (4π² Σ_j m_j²/l_j²) for m ≠ 0,
/// with the mean mode chosen so that p(x_0, t) = p_0(t) at every sample.
/// The problem is solvable only for mean-free g; |ĝ(0, t)| must stay within
/// 1e−9 · (1 + max |ĝ|) at every sample.
/// @throws std::invalid_argument on a mean-mode violation or shape mismatch.
AnchoredScalar poisson_solve(const Field& g, const std::vector<double>& x0,
                             const std::vector<double>& p0, const TorusGeometry& geometry);

/// Componentwise matrix action (A v)_i = Σ_j a_{ij} v_j.
VectorField matrix_apply(const std::vector<std::vector<double>>& coupling, const VectorField& v);

/// Gradient of the pressure determined by Δp = div r + div f (+ Σ a_{ij} ∂ρ_j/∂x_i):
///   (∂p/∂x_k)^(m) = −i m_k · source(m) / (2π l_k Σ_j m_j²/l_j²), zero at m = 0.
/// Supply ρ together with the coupling matrix for the Boussinesq variant.
/// @throws std::invalid_argument on shape mismatch or ρ without coupling.
VectorField pressure_gradient(const VectorField& r, const VectorField& f,
                              const std::optional<VectorField>& rho,
                              const std::vector<std::vector<double>>& coupling,
                              const TorusGeometry& geometry);

/// Density from iteration data: ρ_k = heat flow of η_k forced by g_k + h_k at
/// diffusivity κ.
VectorField reconstruct_density(const VectorField& eta, const VectorField& g,
                                const VectorField& h, double kappa,
                                const TorusGeometry& geometry, const TimeGrid& grid);

/// Velocity from iteration data:
///   u_k = heat flow of φ_k forced by r_k + f_k (+ (Aρ)_k) − ∂p/∂x_k at viscosity ν,
/// with the pressure gradient built from the same sources, so that div u
/// vanishes mode-for-mode whenever div φ = 0. A nonzero div φ is reported to
/// `warnings` (when given), not raised: the field is still well defined.
VectorField reconstruct_velocity(const VectorField& phi, const VectorField& r,
                                 const VectorField& f, const std::optional<VectorField>& rho,
                                 const PhysicsParams& physics, const TorusGeometry& geometry,
                                 const TimeGrid& grid, std::vector<std::string>* warnings = nullptr);

} // namespace modeflow

#endif // MODEFLOW_PROPAGATORS_HPP
