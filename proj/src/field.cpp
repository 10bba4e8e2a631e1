#include "modeflow/field.hpp"

#include <algorithm>
#include <stdexcept>

namespace modeflow {

namespace {

bool all_zero(const Trajectory& t) {
    return std::all_of(t.begin(), t.end(), [](Complex c) { return c == Complex(0.0, 0.0); });
}

Trajectory conjugated(const Trajectory& t) {
    Trajectory r(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = std::conj(t[i]);
    return r;
}

} // namespace

Field::Field(TorusGeometry geometry, ModeBox box, bool real_valued)
    : geom_(std::move(geometry)), grid_(std::nullopt), box_(std::move(box)), real_(real_valued) {
    if (box_.dim() != geom_.n()) throw std::invalid_argument("Field: mode box dimension must equal n");
}

Field::Field(TorusGeometry geometry, TimeGrid grid, ModeBox box, bool real_valued)
    : geom_(std::move(geometry)), grid_(std::move(grid)), box_(std::move(box)), real_(real_valued) {
    if (box_.dim() != geom_.n()) throw std::invalid_argument("Field: mode box dimension must equal n");
}

Trajectory Field::value(const Mode& m) const {
    auto it = coeff_.find(m);
    if (it != coeff_.end()) return it->second;
    return Trajectory(samples(), Complex(0.0, 0.0));
}

Complex Field::value_at(const Mode& m, std::size_t sample) const {
    if (sample >= samples()) throw std::out_of_range("Field::value_at: sample index out of range");
    auto it = coeff_.find(m);
    if (it == coeff_.end()) return Complex(0.0, 0.0);
    return it->second[sample];
}

void Field::store(const Mode& m, Trajectory traj) {
    if (all_zero(traj))
        coeff_.erase(m);
    else
        coeff_[m] = std::move(traj);
}

void Field::set(const Mode& m, Trajectory traj) {
    if (m.dim() != geom_.n()) throw std::invalid_argument("Field::set: mode dimension mismatch");
    if (!box_.contains(m)) throw std::invalid_argument("Field::set: mode " + m.str() + " outside mode box");
    if (traj.size() != samples())
        throw std::invalid_argument("Field::set: trajectory length does not match the time grid");

    if (!real_) {
        store(m, std::move(traj));
        return;
    }

    // Hermitian bookkeeping: project θ = 0 onto the real axis; otherwise write
    // the canonical representative (first nonzero entry positive) and its mirror.
    if (m.is_zero()) {
        for (Complex& c : traj) c = Complex(c.real(), 0.0);
        store(m, std::move(traj));
        return;
    }
    const bool canonical = !(m < -m); // canonical iff the first nonzero entry is positive
    Mode cm = canonical ? m : -m;
    Trajectory ct = canonical ? std::move(traj) : conjugated(traj);
    Trajectory mirror = conjugated(ct);
    store(cm, std::move(ct));
    store(-cm, std::move(mirror));
}

void Field::set(const Mode& m, Complex value) {
    set(m, Trajectory{value});
}

bool Field::compatible_with(const Field& o) const {
    if (geom_ != o.geom_) return false;
    if (grid_.has_value() != o.grid_.has_value()) return false;
    if (grid_ && *grid_ != *o.grid_) return false;
    return true;
}

bool Field::operator==(const Field& o) const {
    return geom_ == o.geom_ && grid_ == o.grid_ && box_ == o.box_ && real_ == o.real_ && coeff_ == o.coeff_;
}

VectorField::VectorField(std::vector<Field> components) : comp_(std::move(components)) {
    if (comp_.empty()) throw std::invalid_argument("VectorField: no components");
    const Field& first = comp_.front();
    if (static_cast<int>(comp_.size()) != first.geometry().n())
        throw std::invalid_argument("VectorField: component count must equal the spatial dimension n");
    for (const Field& f : comp_) {
        if (!f.compatible_with(first) || f.mode_box() != first.mode_box())
            throw std::invalid_argument("VectorField: components must share geometry, time grid, and mode box");
    }
}

VectorField VectorField::zeros(const TorusGeometry& geometry, const ModeBox& box, bool real_valued) {
    std::vector<Field> c(static_cast<std::size_t>(geometry.n()), Field(geometry, box, real_valued));
    return VectorField(std::move(c));
}

VectorField VectorField::zeros(const TorusGeometry& geometry, const TimeGrid& grid, const ModeBox& box,
                               bool real_valued) {
    std::vector<Field> c(static_cast<std::size_t>(geometry.n()), Field(geometry, grid, box, real_valued));
    return VectorField(std::move(c));
}

} // namespace modeflow
