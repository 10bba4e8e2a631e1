#include "modeflow/mode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace modeflow {

Mode Mode::unit(int n, int axis, std::int32_t value) {
    if (axis < 1 || axis > n) throw std::invalid_argument("Mode::unit: axis out of range");
    std::vector<std::int32_t> e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(axis - 1)] = value;
    return Mode(std::move(e));
}

std::int64_t Mode::order() const {
    std::int64_t s = 0;
    for (std::int32_t v : e_) s += std::llabs(static_cast<long long>(v));
    return s;
}

bool Mode::is_zero() const {
    return std::all_of(e_.begin(), e_.end(), [](std::int32_t v) { return v == 0; });
}

Mode Mode::operator+(const Mode& o) const {
    if (e_.size() != o.e_.size()) throw std::invalid_argument("Mode: dimension mismatch in +");
    std::vector<std::int32_t> r(e_.size());
    for (std::size_t i = 0; i < e_.size(); ++i) r[i] = e_[i] + o.e_[i];
    return Mode(std::move(r));
}

Mode Mode::operator-() const {
    std::vector<std::int32_t> r(e_.size());
    for (std::size_t i = 0; i < e_.size(); ++i) r[i] = -e_[i];
    return Mode(std::move(r));
}

std::string Mode::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < e_.size(); ++i) {
        if (i) os << ',';
        os << e_[i];
    }
    os << ')';
    return os.str();
}

TorusGeometry::TorusGeometry(int n, std::vector<double> periods) : n_(n), periods_(std::move(periods)) {
    if (n_ < 1) throw std::invalid_argument("TorusGeometry: n must be >= 1");
    if (static_cast<int>(periods_.size()) != n_)
        throw std::invalid_argument("TorusGeometry: periods size must equal n");
    for (double l : periods_)
        if (!(l > 0.0) || !std::isfinite(l))
            throw std::invalid_argument("TorusGeometry: all periods must be strictly positive");
}

double TorusGeometry::max_period() const {
    return *std::max_element(periods_.begin(), periods_.end());
}

TimeGrid::TimeGrid(std::vector<double> samples) : t_(std::move(samples)) {
    if (t_.empty()) throw std::invalid_argument("TimeGrid: empty sample list");
    if (t_.front() != 0.0) throw std::invalid_argument("TimeGrid: first sample must be exactly 0");
    for (std::size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1]) || !std::isfinite(t_[i]))
            throw std::invalid_argument("TimeGrid: samples must increase strictly");
}

TimeGrid TimeGrid::uniform(double t_max, int intervals) {
    if (!(t_max > 0.0)) throw std::invalid_argument("TimeGrid::uniform: t_max must be positive");
    if (intervals < 1) throw std::invalid_argument("TimeGrid::uniform: need at least one interval");
    std::vector<double> t(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i)
        t[static_cast<std::size_t>(i)] = t_max * static_cast<double>(i) / static_cast<double>(intervals);
    t[0] = 0.0;
    return TimeGrid(std::move(t));
}

ModeBox::ModeBox(std::vector<std::int32_t> radius) : radius_(std::move(radius)) {
    for (std::int32_t r : radius_)
        if (r < 0) throw std::invalid_argument("ModeBox: radii must be nonnegative");
}

ModeBox ModeBox::cube(int n, std::int32_t r) {
    if (n < 1) throw std::invalid_argument("ModeBox::cube: n must be >= 1");
    return ModeBox(std::vector<std::int32_t>(static_cast<std::size_t>(n), r));
}

bool ModeBox::contains(const Mode& m) const {
    if (m.dim() != dim()) return false;
    for (int i = 0; i < dim(); ++i)
        if (std::abs(m[i]) > radius_[static_cast<std::size_t>(i)]) return false;
    return true;
}

ModeBox ModeBox::sum_clipped(const ModeBox& a, const ModeBox& b, const ModeBox& limit) {
    if (a.dim() != b.dim() || a.dim() != limit.dim())
        throw std::invalid_argument("ModeBox::sum_clipped: dimension mismatch");
    std::vector<std::int32_t> r(static_cast<std::size_t>(a.dim()));
    for (int i = 0; i < a.dim(); ++i)
        r[static_cast<std::size_t>(i)] = std::min(a.radius(i) + b.radius(i), limit.radius(i));
    return ModeBox(std::move(r));
}

} // namespace modeflow
