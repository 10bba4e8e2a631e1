#ifndef MODEFLOW_SAMPLING_HPP
#define MODEFLOW_SAMPLING_HPP

#include <cstdint>
#include <random>

#include "modeflow/decay_classes.hpp"
#include "modeflow/field.hpp"
#include "modeflow/picard.hpp"

namespace modeflow {

/// Deterministic variate stream for the randomized verification suites.
/// Results are a pure function of the seed on every platform (mt19937_64 has
/// a pinned sequence; the doubles are built from the top 53 bits directly).
class SampleStream {
public:
    explicit SampleStream(std::uint64_t seed) : rng_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform over {lo, …, hi} inclusive.
    int uniform_int(int lo, int hi);

    /// Point on the unit circle.
    Complex unit_phase();

private:
    std::mt19937_64 rng_;
};

/// Uniform mode inside the box (componentwise over [−radius_k, radius_k]).
Mode random_mode(SampleStream& stream, const ModeBox& box);

/// Spatial scalar field strictly inside J(r, d): up to `max_modes` stored
/// modes carrying |â(θ)| = u · d r^{|θ|} / Π_k|θ_k|! with u ∈ [0.3, 1) and a
/// random phase per mode. Real-valued output stores Hermitian pairs.
Field random_j_field(SampleStream& stream, const TorusGeometry& geometry, const ModeBox& box,
                     const JParams& params, int max_modes, bool real_valued = false);

/// Time-sampled scalar field strictly inside K(b, r, d): trajectories follow
/// the envelope u · d r^{|θ|} e^{−bt} / Π_k|θ_k|! with one phase per mode.
Field random_k_field(SampleStream& stream, const TorusGeometry& geometry, const TimeGrid& grid,
                     const ModeBox& box, const KParams& params, int max_modes,
                     bool real_valued = false);

/// Real spatial vector field with exactly zero divergence: every stored mode
/// θ carries a coefficient vector orthogonal to the scaled wavevector
/// (θ_1/l_1, …, θ_n/l_n), built from a random axis pair (a, b) as
/// û_a = c·θ_b/l_b, û_b = −c·θ_a/l_a. Requires n ≥ 2.
VectorField random_divergence_free(SampleStream& stream, const TorusGeometry& geometry,
                                   const ModeBox& box, double amplitude, int max_modes);

/// State strictly inside the ball {max_k I(r_k) ≤ C}: random trajectories
/// rescaled so the ball norm is tail + u·(C − tail) with u ∈ [0.3, 1), where
/// tail is the problem's class-tail constant (zero when none is configured).
/// The density half h is populated for Boussinesq problems and scaled jointly
/// with r.
/// @throws std::invalid_argument unless C > 0 and the tail fits inside C.
IterationState random_ball_state(SampleStream& stream, const TorusProblem& problem, double C);

} // namespace modeflow

#endif // MODEFLOW_SAMPLING_HPP
