#ifndef MODEFLOW_FIELD_HPP
#define MODEFLOW_FIELD_HPP

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "modeflow/mode.hpp"

namespace modeflow {

using Complex = std::complex<double>;

/// One mode's complex coefficient trajectory: one value per time sample
/// (exactly one value for spatial-only fields).
using Trajectory = std::vector<Complex>;

/// Sparse truncated Fourier series on the torus.
///
/// A field is either spatial-only (no time grid; â(θ) a single complex value)
/// or time-sampled (â(θ, t_i) for every grid sample). Stored modes always lie
/// inside the field's mode box. When the reality flag is set the coefficient
/// map keeps Hermitian symmetry â(−θ) = conj(â(θ)) as a structural invariant:
/// every mutation writes the mode and its mirror together, and the θ = 0
/// coefficient is projected onto the real axis.
///
/// Fields are treated as immutable values once built; all operations in
/// field_ops.hpp are pure and return new fields.
class Field {
public:
    Field() = default;

    /// Spatial-only field.
    Field(TorusGeometry geometry, ModeBox box, bool real_valued = false);

    /// Time-sampled field.
    Field(TorusGeometry geometry, TimeGrid grid, ModeBox box, bool real_valued = false);

    const TorusGeometry& geometry() const { return geom_; }
    const ModeBox& mode_box() const { return box_; }
    bool real_valued() const { return real_; }

    bool is_spatial() const { return !grid_.has_value(); }
    bool is_time_sampled() const { return grid_.has_value(); }
    const std::optional<TimeGrid>& time_grid() const { return grid_; }

    /// Number of samples per trajectory (1 for spatial-only fields).
    std::size_t samples() const { return grid_ ? grid_->size() : 1; }

    /// Stored coefficients, lexicographically ordered by mode.
    const std::map<Mode, Trajectory>& coefficients() const { return coeff_; }
    std::size_t support_size() const { return coeff_.size(); }

    /// Trajectory at θ; an all-zero trajectory if the mode is not stored.
    Trajectory value(const Mode& m) const;

    /// Single coefficient â(θ, t_i) (sample must be 0 for spatial fields).
    Complex value_at(const Mode& m, std::size_t sample) const;

    /// Store a trajectory at θ. Enforces the mode box, the trajectory length,
    /// and (for real-valued fields) Hermitian symmetry: the mirror mode is
    /// written with the conjugate trajectory, and θ = 0 is projected real.
    /// All-zero trajectories erase the mode (sparse storage holds no zeros).
    ///
    /// @throws std::invalid_argument on box or length violations.
    void set(const Mode& m, Trajectory traj);

    /// Convenience for spatial-only fields.
    void set(const Mode& m, Complex value);

    /// Structural compatibility: same geometry and same time grid (or both spatial).
    bool compatible_with(const Field& o) const;

    bool operator==(const Field& o) const;

private:
    void store(const Mode& m, Trajectory traj);

    TorusGeometry geom_;
    std::optional<TimeGrid> grid_;
    ModeBox box_;
    bool real_ = false;
    std::map<Mode, Trajectory> coeff_;
};

/// n field components sharing one geometry, time grid, and mode box.
class VectorField {
public:
    VectorField() = default;

    /// @throws std::invalid_argument unless there are exactly n structurally
    /// compatible components.
    explicit VectorField(std::vector<Field> components);

    /// n zero components, all spatial or all time-sampled.
    static VectorField zeros(const TorusGeometry& geometry, const ModeBox& box, bool real_valued);
    static VectorField zeros(const TorusGeometry& geometry, const TimeGrid& grid, const ModeBox& box,
                             bool real_valued);

    int n() const { return static_cast<int>(comp_.size()); }
    /// Component for 1-based index k.
    const Field& component(int k) const { return comp_[static_cast<std::size_t>(k - 1)]; }
    Field& component(int k) { return comp_[static_cast<std::size_t>(k - 1)]; }
    const std::vector<Field>& components() const { return comp_; }

    const TorusGeometry& geometry() const { return comp_.front().geometry(); }
    bool is_spatial() const { return comp_.front().is_spatial(); }

    bool operator==(const VectorField&) const = default;

private:
    std::vector<Field> comp_;
};

} // namespace modeflow

#endif // MODEFLOW_FIELD_HPP
