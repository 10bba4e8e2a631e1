#ifndef MODEFLOW_FIELD_OPS_HPP
#define MODEFLOW_FIELD_OPS_HPP

#include <optional>

#include "modeflow/decay_classes.hpp"
#include "modeflow/field.hpp"

namespace modeflow {

/// Per-axis cap applied when a convolution derives its output box from the
/// inputs. Products double the supports, so an explicit ceiling keeps chained
/// products from growing without bound; callers with a configured limit pass
/// their own box instead.
inline constexpr int kDefaultModeBoxLimit = 48;

/// Spatial field copied onto a time grid with constant-in-time trajectories.
/// @throws std::invalid_argument if `a` is already time-sampled.
Field promote(const Field& a, const TimeGrid& grid);

struct ConvolveResult {
    Field field;
    /// Certified bound on the dropped coefficient mass: max over time samples
    /// of Σ |â(p)|·|b̂(q)| over all pairs whose sum p+q falls outside the
    /// output box. Zero when the box holds every pairwise sum.
    double truncation_loss = 0.0;
};

/// Truncated Cauchy product: result coefficient at mode m and sample s is
///   Σ_{p+q=m} â(p,s)·b̂(q,s),
/// accumulated in lexicographic order of the first operand's mode (fixing the
/// floating-point summation order). A spatial operand is promoted to the
/// other's time grid; two spatial operands give a spatial result. For
/// real-valued operands only canonical representatives are accumulated and
/// the Hermitian mirror is written exactly, so reality is preserved bitwise.
/// @throws std::invalid_argument on geometry or time-grid mismatch.
ConvolveResult convolve(const Field& a, const Field& b, const ModeBox& out_box);

/// Convolution with the default output box: componentwise sum of the input
/// boxes, clipped per axis to kDefaultModeBoxLimit.
ConvolveResult convolve(const Field& a, const Field& b);

/// ∂a/∂x_k (1-based axis): coefficient at θ multiplied by 2πiθ_k/l_k.
/// @throws std::invalid_argument if the axis is out of range.
Field partial_derivative(const Field& a, int axis);

/// Σ_k ∂v_k/∂x_k.
Field divergence(const VectorField& v);

/// Ī(a) = Σ_θ |â(θ)| over the stored support of a spatial field.
/// @throws std::invalid_argument on time-sampled input.
double norm_Ibar(const Field& a);

/// I(a) = Σ_θ ∫_0^∞ |â(θ,t)| dt, approximated by the trapezoidal rule on the
/// field's grid. When K-class envelope parameters are supplied the certified
/// tail (d/b)·e^{−b·T_max}·(2e^r − 1)^n is added, making the result an upper
/// estimate for fields inside that class.
/// @throws std::invalid_argument on spatial input.
double norm_I(const Field& a, const std::optional<KParams>& tail = std::nullopt);

/// Point evaluation Σ_θ â(θ)·exp(2πi Σ_j θ_j x_j / l_j) at the given sample
/// (pass 0 for spatial fields).
/// @throws std::invalid_argument on dimension mismatch or bad sample index.
Complex evaluate(const Field& a, const std::vector<double>& x, std::size_t t_index = 0);

/// Coefficientwise sum; operands must share geometry, sampling, and box.
Field add(const Field& a, const Field& b);

/// Field scaled by a real factor (reality preserved).
Field scale(const Field& a, double factor);

} // namespace modeflow

#endif // MODEFLOW_FIELD_OPS_HPP
