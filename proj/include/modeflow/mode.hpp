#ifndef MODEFLOW_MODE_HPP
#define MODEFLOW_MODE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace modeflow {

/// Integer multi-index θ ∈ Z^n labeling one Fourier mode of the periodic box.
///
/// Comparison is lexicographic, which fixes every deterministic iteration and
/// summation order in the library.
class Mode {
public:
    Mode() = default;
    explicit Mode(std::vector<std::int32_t> entries) : e_(std::move(entries)) {}

    /// Zero mode in dimension n.
    static Mode zero(int n) { return Mode(std::vector<std::int32_t>(static_cast<std::size_t>(n), 0)); }

    /// Unit mode e_k (1-based axis) in dimension n.
    static Mode unit(int n, int axis, std::int32_t value = 1);

    int dim() const { return static_cast<int>(e_.size()); }
    std::int32_t operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
    const std::vector<std::int32_t>& entries() const { return e_; }

    /// |θ| = Σ_k |θ_k| (order of the mode).
    std::int64_t order() const;

    bool is_zero() const;

    Mode operator+(const Mode& o) const;
    Mode operator-() const;

    bool operator==(const Mode& o) const { return e_ == o.e_; }
    bool operator!=(const Mode& o) const { return e_ != o.e_; }
    bool operator<(const Mode& o) const { return e_ < o.e_; } // lexicographic

    std::string str() const;

private:
    std::vector<std::int32_t> e_;
};

/// The periodic box Π_j [0, l_j]: spatial dimension n and period vector.
class TorusGeometry {
public:
    TorusGeometry() = default;

    /// @throws std::invalid_argument unless n ≥ 1 and every period is > 0.
    TorusGeometry(int n, std::vector<double> periods);

    int n() const { return n_; }
    const std::vector<double>& periods() const { return periods_; }
    /// Period l_k for 1-based axis k.
    double period(int axis) const { return periods_[static_cast<std::size_t>(axis - 1)]; }
    double max_period() const;

    bool operator==(const TorusGeometry& o) const { return n_ == o.n_ && periods_ == o.periods_; }
    bool operator!=(const TorusGeometry& o) const { return !(*this == o); }

private:
    int n_ = 0;
    std::vector<double> periods_;
};

/// Strictly increasing sample times t_0 = 0 < t_1 < … < t_M.
class TimeGrid {
public:
    TimeGrid() = default;

    /// @throws std::invalid_argument unless samples start at exactly 0 and increase strictly.
    explicit TimeGrid(std::vector<double> samples);

    /// Uniform grid with `intervals` equal steps on [0, t_max].
    static TimeGrid uniform(double t_max, int intervals);

    std::size_t size() const { return t_.size(); }
    double operator[](std::size_t i) const { return t_[i]; }
    const std::vector<double>& samples() const { return t_; }
    double t_max() const { return t_.back(); }

    bool operator==(const TimeGrid& o) const { return t_ == o.t_; }
    bool operator!=(const TimeGrid& o) const { return t_ != o.t_; }

private:
    std::vector<double> t_;
};

/// Per-axis truncation radius: a mode θ is inside iff |θ_k| ≤ radius_k for all k.
class ModeBox {
public:
    ModeBox() = default;
    explicit ModeBox(std::vector<std::int32_t> radius);

    /// Cubic box |θ_k| ≤ r in dimension n.
    static ModeBox cube(int n, std::int32_t r);

    int dim() const { return static_cast<int>(radius_.size()); }
    std::int32_t radius(int i) const { return radius_[static_cast<std::size_t>(i)]; }
    const std::vector<std::int32_t>& radii() const { return radius_; }

    bool contains(const Mode& m) const;

    /// Componentwise sum of two boxes (support box of a Cauchy product),
    /// clipped to `limit`.
    static ModeBox sum_clipped(const ModeBox& a, const ModeBox& b, const ModeBox& limit);

    bool operator==(const ModeBox& o) const { return radius_ == o.radius_; }
    bool operator!=(const ModeBox& o) const { return radius_ != o.radius_; }

private:
    std::vector<std::int32_t> radius_;
};

} // namespace modeflow

#endif // MODEFLOW_MODE_HPP
