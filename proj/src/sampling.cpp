#include "modeflow/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "modeflow/field_ops.hpp"
#include "modeflow/special_functions.hpp"

namespace modeflow {

namespace {

/// Class envelope d·r^{|θ|}/Π_k |θ_k|! shared by J and K sampling.
double torus_envelope(const Mode& mode, double r, double d) {
    double bound = d * std::pow(r, static_cast<double>(mode.order()));
    for (std::int32_t e : mode.entries()) {
        bound /= factorial_double(std::abs(e));
    }
    return bound;
}

} // namespace

int SampleStream::uniform_int(int lo, int hi) {
    if (hi < lo) {
        throw std::invalid_argument("SampleStream::uniform_int: empty range");
    }
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    return lo + static_cast<int>(rng_() % span);
}

Complex SampleStream::unit_phase() {
    const double angle = 2.0 * M_PI * uniform();
    return Complex(std::cos(angle), std::sin(angle));
}

Mode random_mode(SampleStream& stream, const ModeBox& box) {
    std::vector<std::int32_t> entries(static_cast<std::size_t>(box.dim()));
    for (int i = 0; i < box.dim(); ++i) {
        entries[static_cast<std::size_t>(i)] =
            static_cast<std::int32_t>(stream.uniform_int(-box.radius(i), box.radius(i)));
    }
    return Mode(std::move(entries));
}

Field random_j_field(SampleStream& stream, const TorusGeometry& geometry, const ModeBox& box,
                     const JParams& params, int max_modes, bool real_valued) {
    validate(params);
    Field field(geometry, box, real_valued);
    for (int i = 0; i < max_modes; ++i) {
        const Mode mode = random_mode(stream, box);
        const double magnitude =
            stream.uniform(0.3, 1.0) * torus_envelope(mode, params.r, params.d);
        field.set(mode, magnitude * stream.unit_phase());
    }
    return field;
}

Field random_k_field(SampleStream& stream, const TorusGeometry& geometry, const TimeGrid& grid,
                     const ModeBox& box, const KParams& params, int max_modes, bool real_valued) {
    validate(params);
    Field field(geometry, grid, box, real_valued);
    for (int i = 0; i < max_modes; ++i) {
        const Mode mode = random_mode(stream, box);
        const Complex peak = stream.uniform(0.3, 1.0) *
                             torus_envelope(mode, params.r, params.d) * stream.unit_phase();
        Trajectory traj(grid.size());
        for (std::size_t s = 0; s < grid.size(); ++s) {
            traj[s] = peak * std::exp(-params.b * grid[s]);
        }
        field.set(mode, std::move(traj));
    }
    return field;
}

VectorField random_divergence_free(SampleStream& stream, const TorusGeometry& geometry,
                                   const ModeBox& box, double amplitude, int max_modes) {
    const int n = geometry.n();
    if (n < 2) {
        throw std::invalid_argument("random_divergence_free: needs n >= 2");
    }
    std::vector<Field> components(static_cast<std::size_t>(n), Field(geometry, box, true));
    for (int i = 0; i < max_modes; ++i) {
        const Mode mode = random_mode(stream, box);
        if (mode.is_zero()) {
            continue; // a constant vector is divergence-free but uninteresting
        }
        const int a = stream.uniform_int(1, n);
        int b = stream.uniform_int(1, n - 1);
        if (b >= a) {
            ++b; // distinct axes
        }
        const Complex c = amplitude * stream.uniform(0.3, 1.0) * stream.unit_phase();
        // û_a·θ_a/l_a + û_b·θ_b/l_b = c(θ_b θ_a − θ_a θ_b)/(l_a l_b) = 0.
        components[static_cast<std::size_t>(a - 1)]
            .set(mode, c * (static_cast<double>(mode[b - 1]) / geometry.period(b)));
        components[static_cast<std::size_t>(b - 1)]
            .set(mode, -c * (static_cast<double>(mode[a - 1]) / geometry.period(a)));
    }
    return VectorField(std::move(components));
}

IterationState random_ball_state(SampleStream& stream, const TorusProblem& problem, double C) {
    if (!(C > 0.0)) {
        throw std::invalid_argument("random_ball_state: C must be positive");
    }
    const KParams shape{1.0, 1.0, 1.0};
    const auto draw = [&] {
        std::vector<Field> components;
        components.reserve(static_cast<std::size_t>(problem.geometry.n()));
        for (int k = 1; k <= problem.geometry.n(); ++k) {
            components.push_back(
                random_k_field(stream, problem.geometry, problem.grid, problem.box, shape, 4));
        }
        return VectorField(std::move(components));
    };

    IterationState state = initial_state(problem);
    state.r = draw();
    if (problem.kind == ProblemKind::Boussinesq) {
        state.h = draw();
    }

    // The tail correction is a constant offset (the norm of an empty field),
    // so the grid part is scaled into the budget left once the tail is paid.
    const double tail =
        problem.ball_tail ? norm_I(Field(problem.geometry, problem.grid, problem.box),
                                   problem.ball_tail)
                          : 0.0;
    if (tail >= C) {
        throw std::invalid_argument("random_ball_state: class tail exceeds the ball radius");
    }

    double norm = 0.0;
    for (const Field& component : state.r.components()) {
        norm = std::max(norm, norm_I(component));
    }
    if (state.h) {
        for (const Field& component : state.h->components()) {
            norm = std::max(norm, norm_I(component));
        }
    }
    if (norm == 0.0) {
        return state; // all draws landed on zero: the center is in every ball
    }

    const double factor = (C - tail) * stream.uniform(0.3, 1.0) / norm;
    for (int k = 1; k <= state.r.n(); ++k) {
        state.r.component(k) = scale(state.r.component(k), factor);
    }
    if (state.h) {
        for (int k = 1; k <= state.h->n(); ++k) {
            state.h->component(k) = scale(state.h->component(k), factor);
        }
    }
    return state;
}

} // namespace modeflow
