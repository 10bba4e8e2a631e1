#include "modeflow/field_ops.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace modeflow {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

bool canonical_or_zero(const Mode& m) {
    return m.is_zero() || !(m < -m);
}

/// Write an accumulated coefficient map into `out`. For real-valued fields
/// only canonical representatives are written; Field::set mirrors them with
/// exact conjugates, keeping the Hermitian invariant bitwise.
void emit(Field& out, std::map<Mode, Trajectory>& acc) {
    for (auto& [mode, trajectory] : acc) {
        if (out.real_valued() && !canonical_or_zero(mode)) {
            continue;
        }
        out.set(mode, std::move(trajectory));
    }
}

} // namespace

Field promote(const Field& a, const TimeGrid& grid) {
    require(a.is_spatial(), "promote: field is already time-sampled");
    Field out(a.geometry(), grid, a.mode_box(), a.real_valued());
    for (const auto& [mode, trajectory] : a.coefficients()) {
        out.set(mode, Trajectory(grid.size(), trajectory.front()));
    }
    return out;
}

ConvolveResult convolve(const Field& a, const Field& b, const ModeBox& out_box) {
    require(a.geometry() == b.geometry(), "convolve: geometry mismatch");
    require(out_box.dim() == a.geometry().n(), "convolve: output box dimension mismatch");

    // Align sampling: a spatial operand is promoted to the other's grid.
    const Field* pa = &a;
    const Field* pb = &b;
    Field promoted;
    if (a.is_spatial() && b.is_time_sampled()) {
        promoted = promote(a, *b.time_grid());
        pa = &promoted;
    } else if (b.is_spatial() && a.is_time_sampled()) {
        promoted = promote(b, *a.time_grid());
        pb = &promoted;
    } else if (a.is_time_sampled() && b.is_time_sampled()) {
        require(*a.time_grid() == *b.time_grid(), "convolve: time-grid mismatch");
    }

    const std::size_t samples = pa->samples();
    const bool real = a.real_valued() && b.real_valued();

    std::map<Mode, Trajectory> acc;
    std::vector<double> dropped(samples, 0.0);
    for (const auto& [p, ta] : pa->coefficients()) {
        for (const auto& [q, tb] : pb->coefficients()) {
            const Mode m = p + q;
            if (out_box.contains(m)) {
                auto [it, inserted] = acc.try_emplace(m, Trajectory(samples, Complex(0.0, 0.0)));
                Trajectory& tm = it->second;
                for (std::size_t s = 0; s < samples; ++s) {
                    tm[s] += ta[s] * tb[s];
                }
            } else {
                for (std::size_t s = 0; s < samples; ++s) {
                    dropped[s] += std::abs(ta[s]) * std::abs(tb[s]);
                }
            }
        }
    }

    ConvolveResult result;
    result.field = pa->is_spatial() ? Field(a.geometry(), out_box, real)
                                    : Field(a.geometry(), *pa->time_grid(), out_box, real);
    emit(result.field, acc);
    for (double loss : dropped) {
        result.truncation_loss = std::max(result.truncation_loss, loss);
    }
    return result;
}

ConvolveResult convolve(const Field& a, const Field& b) {
    const ModeBox limit = ModeBox::cube(a.geometry().n(), kDefaultModeBoxLimit);
    return convolve(a, b, ModeBox::sum_clipped(a.mode_box(), b.mode_box(), limit));
}

Field partial_derivative(const Field& a, int axis) {
    require(axis >= 1 && axis <= a.geometry().n(), "partial_derivative: axis out of range");
    const double scale = 2.0 * M_PI / a.geometry().period(axis);

    Field out = a.is_spatial() ? Field(a.geometry(), a.mode_box(), a.real_valued())
                               : Field(a.geometry(), *a.time_grid(), a.mode_box(), a.real_valued());
    for (const auto& [mode, trajectory] : a.coefficients()) {
        if (out.real_valued() && !canonical_or_zero(mode)) {
            continue;
        }
        const Complex factor(0.0, scale * static_cast<double>(mode[axis - 1]));
        Trajectory t(trajectory.size());
        for (std::size_t s = 0; s < trajectory.size(); ++s) {
            t[s] = factor * trajectory[s];
        }
        out.set(mode, std::move(t));
    }
    return out;
}

Field divergence(const VectorField& v) {
    const int n = v.geometry().n();
    bool real = true;
    for (const Field& f : v.components()) {
        real = real && f.real_valued();
    }

    std::map<Mode, Trajectory> acc;
    std::size_t samples = v.component(1).samples();
    for (int k = 1; k <= n; ++k) {
        const Field d = partial_derivative(v.component(k), k);
        for (const auto& [mode, trajectory] : d.coefficients()) {
            auto [it, inserted] = acc.try_emplace(mode, Trajectory(samples, Complex(0.0, 0.0)));
            for (std::size_t s = 0; s < samples; ++s) {
                it->second[s] += trajectory[s];
            }
        }
    }

    const Field& first = v.component(1);
    Field out = first.is_spatial() ? Field(first.geometry(), first.mode_box(), real)
                                   : Field(first.geometry(), *first.time_grid(), first.mode_box(), real);
    emit(out, acc);
    return out;
}

double norm_Ibar(const Field& a) {
    require(a.is_spatial(), "norm_Ibar: defined for spatial fields only");
    double sum = 0.0;
    for (const auto& [mode, trajectory] : a.coefficients()) {
        sum += std::abs(trajectory.front());
    }
    return sum;
}

double norm_I(const Field& a, const std::optional<KParams>& tail) {
    require(a.is_time_sampled(), "norm_I: defined for time-sampled fields only");
    const TimeGrid& grid = *a.time_grid();

    double sum = 0.0;
    for (const auto& [mode, trajectory] : a.coefficients()) {
        double integral = 0.0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            integral += 0.5 * (std::abs(trajectory[i]) + std::abs(trajectory[i + 1])) *
                        (grid[i + 1] - grid[i]);
        }
        sum += integral;
    }

    if (tail) {
        validate(*tail);
        // Envelope tail: ∫_{T_max}^∞ d e^{−bt} dt · Σ_θ r^{|θ|}/Π|θ_k|!
        //              = (d/b) e^{−b T_max} (2e^r − 1)^n.
        const int n = a.geometry().n();
        sum += tail->d / tail->b * std::exp(-tail->b * grid.t_max()) *
               std::pow(2.0 * std::exp(tail->r) - 1.0, static_cast<double>(n));
    }
    return sum;
}

Complex evaluate(const Field& a, const std::vector<double>& x, std::size_t t_index) {
    const int n = a.geometry().n();
    require(static_cast<int>(x.size()) == n, "evaluate: point dimension mismatch");
    std::size_t sample = t_index;
    if (a.is_spatial()) {
        sample = 0;
    } else {
        require(t_index < a.samples(), "evaluate: sample index out of range");
    }

    Complex sum(0.0, 0.0);
    for (const auto& [mode, trajectory] : a.coefficients()) {
        double phase = 0.0;
        for (int j = 0; j < n; ++j) {
            phase += static_cast<double>(mode[j]) * x[static_cast<std::size_t>(j)] /
                     a.geometry().period(j + 1);
        }
        sum += trajectory[sample] * std::polar(1.0, 2.0 * M_PI * phase);
    }
    return sum;
}

Field add(const Field& a, const Field& b) {
    require(a.compatible_with(b), "add: fields are structurally incompatible");
    require(a.mode_box() == b.mode_box(), "add: mode boxes differ");
    const bool real = a.real_valued() && b.real_valued();
    const std::size_t samples = a.samples();

    std::map<Mode, Trajectory> acc;
    for (const auto& [mode, trajectory] : a.coefficients()) {
        acc.emplace(mode, trajectory);
    }
    for (const auto& [mode, trajectory] : b.coefficients()) {
        auto [it, inserted] = acc.try_emplace(mode, Trajectory(samples, Complex(0.0, 0.0)));
        for (std::size_t s = 0; s < samples; ++s) {
            it->second[s] += trajectory[s];
        }
    }

    Field out = a.is_spatial() ? Field(a.geometry(), a.mode_box(), real)
                               : Field(a.geometry(), *a.time_grid(), a.mode_box(), real);
    emit(out, acc);
    return out;
}

Field scale(const Field& a, double factor) {
    Field out = a.is_spatial() ? Field(a.geometry(), a.mode_box(), a.real_valued())
                               : Field(a.geometry(), *a.time_grid(), a.mode_box(), a.real_valued());
    for (const auto& [mode, trajectory] : a.coefficients()) {
        if (out.real_valued() && !canonical_or_zero(mode)) {
            continue;
        }
        Trajectory t(trajectory.size());
        for (std::size_t s = 0; s < trajectory.size(); ++s) {
            t[s] = factor * trajectory[s];
        }
        out.set(mode, std::move(t));
    }
    return out;
}

} // namespace modeflow
