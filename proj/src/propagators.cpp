#include "modeflow/propagators.hpp"

#include <cmath>
#include <set>
#include <sstream>
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

double sq(double x) {
    return x * x;
}

/// λ_m = Σ_j (2 m_j π / l_j)² μ.
double heat_rate(const Mode& m, double mu, const TorusGeometry& geometry) {
    double s = 0.0;
    for (int j = 0; j < geometry.n(); ++j) {
        s += sq(2.0 * M_PI * static_cast<double>(m[j]) / geometry.period(j + 1));
    }
    return mu * s;
}

/// Σ_j m_j² / l_j² (the Poisson symbol without its 4π²).
double laplace_symbol(const Mode& m, const TorusGeometry& geometry) {
    double s = 0.0;
    for (int j = 0; j < geometry.n(); ++j) {
        const double mj = static_cast<double>(m[j]);
        s += mj * mj / sq(geometry.period(j + 1));
    }
    return s;
}

/// Duhamel weights over one step: W0 = ∫_0^Δ e^{−λ(Δ−s)} ds and
/// W1 = ∫_0^Δ s e^{−λ(Δ−s)} ds. Below |λΔ| < 1e−6 the closed forms lose all
/// their leading digits to cancellation, so a four-term series (error O(x⁴),
/// far below double precision at the threshold) takes over; it also covers
/// λ = 0 exactly with W0 = Δ, W1 = Δ²/2.
struct StepWeights {
    double decay;
    double w0;
    double w1;
};

StepWeights duhamel_weights(double lambda, double dt) {
    const double x = lambda * dt;
    StepWeights w{};
    w.decay = std::exp(-x);
    if (std::abs(x) < 1e-6) {
        w.w0 = dt * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
        w.w1 = dt * dt * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0);
    } else {
        w.w0 = (1.0 - w.decay) / lambda;
        w.w1 = dt / lambda - (1.0 - w.decay) / (lambda * lambda);
    }
    return w;
}

Complex unit_phase(const Mode& m, const std::vector<double>& x, const TorusGeometry& geometry) {
    double phase = 0.0;
    for (int j = 0; j < geometry.n(); ++j) {
        phase += static_cast<double>(m[j]) * x[static_cast<std::size_t>(j)] /
                 geometry.period(j + 1);
    }
    return std::polar(1.0, 2.0 * M_PI * phase);
}

double max_magnitude(const Field& f) {
    double m = 0.0;
    for (const auto& [mode, trajectory] : f.coefficients()) {
        for (Complex c : trajectory) {
            m = std::max(m, std::abs(c));
        }
    }
    return m;
}

void check_vector_shape(const VectorField& v, const TorusGeometry& geometry, const char* name) {
    if (v.geometry() != geometry) {
        throw std::invalid_argument(std::string(name) + ": geometry mismatch");
    }
}

} // namespace

PhysicsParams make_physics_params(double nu, double kappa,
                                  std::vector<std::vector<double>> coupling) {
    require(nu > 0.0 && std::isfinite(nu), "PhysicsParams: nu must be positive");
    require(kappa > 0.0 && std::isfinite(kappa), "PhysicsParams: kappa must be positive");
    PhysicsParams p;
    p.nu = nu;
    p.kappa = kappa;
    for (const auto& row : coupling) {
        require(row.size() == coupling.size(), "PhysicsParams: coupling matrix must be square");
        for (double a : row) {
            p.B = std::max(p.B, std::abs(a));
        }
    }
    p.A = std::move(coupling);
    return p;
}

Field heat_propagate(const Field& initial, const Field& forcing, double mu,
                     const TorusGeometry& geometry, const TimeGrid& grid) {
    require(mu > 0.0 && std::isfinite(mu), "heat_propagate: mu must be positive");
    require(initial.is_spatial(), "heat_propagate: initial data must be spatial");
    require(forcing.is_time_sampled(), "heat_propagate: forcing must be time-sampled");
    require(initial.geometry() == geometry && forcing.geometry() == geometry,
            "heat_propagate: geometry mismatch");
    require(*forcing.time_grid() == grid, "heat_propagate: forcing grid mismatch");
    require(initial.mode_box() == forcing.mode_box(), "heat_propagate: mode boxes differ");

    const bool real = initial.real_valued() && forcing.real_valued();
    Field out(geometry, grid, initial.mode_box(), real);

    std::set<Mode> modes;
    for (const auto& [mode, trajectory] : initial.coefficients()) modes.insert(mode);
    for (const auto& [mode, trajectory] : forcing.coefficients()) modes.insert(mode);

    for (const Mode& m : modes) {
        if (real && !canonical_or_zero(m)) continue;

        const double lambda = heat_rate(m, mu, geometry);
        const Trajectory f = forcing.value(m);
        Trajectory u(grid.size());
        u[0] = initial.value_at(m, 0);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double dt = grid[i + 1] - grid[i];
            const StepWeights w = duhamel_weights(lambda, dt);
            u[i + 1] = w.decay * u[i] + f[i] * w.w0 + (f[i + 1] - f[i]) * (w.w1 / dt);
        }
        out.set(m, std::move(u));
    }
    return out;
}

AnchoredScalar poisson_solve(const Field& g, const std::vector<double>& x0,
                             const std::vector<double>& p0, const TorusGeometry& geometry) {
    require(g.geometry() == geometry, "poisson_solve: geometry mismatch");
    require(static_cast<int>(x0.size()) == geometry.n(),
            "poisson_solve: anchor point dimension mismatch");
    require(p0.size() == g.samples(), "poisson_solve: anchor trajectory length mismatch");

    // Solvability: the torus Poisson problem has no response to a mean source.
    const double tol = 1e-9 * (1.0 + max_magnitude(g));
    const Trajectory mean = g.value(Mode::zero(geometry.n()));
    for (std::size_t s = 0; s < mean.size(); ++s) {
        if (std::abs(mean[s]) > tol) {
            std::ostringstream msg;
            msg << "poisson_solve: mean mode |g^(0)| = " << std::abs(mean[s]) << " at sample " << s
                << " exceeds the solvability tolerance " << tol
                << "; the torus Poisson problem requires a mean-free source";
            throw std::invalid_argument(msg.str());
        }
    }

    Field p = g.is_spatial() ? Field(geometry, g.mode_box(), g.real_valued())
                             : Field(geometry, *g.time_grid(), g.mode_box(), g.real_valued());
    for (const auto& [mode, trajectory] : g.coefficients()) {
        if (mode.is_zero()) continue;
        if (p.real_valued() && !canonical_or_zero(mode)) continue;
        const double denom = 4.0 * M_PI * M_PI * laplace_symbol(mode, geometry);
        Trajectory t(trajectory.size());
        for (std::size_t s = 0; s < trajectory.size(); ++s) {
            t[s] = -trajectory[s] / denom;
        }
        p.set(mode, std::move(t));
    }

    // Mean mode: shift so the series evaluates to p0 at the anchor point.
    Trajectory shift(p.samples());
    for (std::size_t s = 0; s < shift.size(); ++s) {
        shift[s] = Complex(p0[s], 0.0);
    }
    for (const auto& [mode, trajectory] : p.coefficients()) {
        const Complex phase = unit_phase(mode, x0, geometry);
        for (std::size_t s = 0; s < trajectory.size(); ++s) {
            shift[s] -= trajectory[s] * phase;
        }
    }
    p.set(Mode::zero(geometry.n()), std::move(shift));

    return AnchoredScalar{std::move(p), x0, p0};
}

VectorField matrix_apply(const std::vector<std::vector<double>>& coupling, const VectorField& v) {
    const std::size_t n = static_cast<std::size_t>(v.n());
    require(coupling.size() == n, "matrix_apply: matrix row count must equal n");
    std::vector<Field> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        require(coupling[i].size() == n, "matrix_apply: matrix must be square");
        Field acc = scale(v.component(1), coupling[i][0]);
        for (std::size_t j = 1; j < n; ++j) {
            acc = add(acc, scale(v.component(static_cast<int>(j) + 1), coupling[i][j]));
        }
        out.push_back(std::move(acc));
    }
    return VectorField(std::move(out));
}

VectorField pressure_gradient(const VectorField& r, const VectorField& f,
                              const std::optional<VectorField>& rho,
                              const std::vector<std::vector<double>>& coupling,
                              const TorusGeometry& geometry) {
    check_vector_shape(r, geometry, "pressure_gradient");
    check_vector_shape(f, geometry, "pressure_gradient");
    require(!rho || !coupling.empty(),
            "pressure_gradient: density supplied without a coupling matrix");

    Field source = add(divergence(r), divergence(f));
    if (rho) {
        check_vector_shape(*rho, geometry, "pressure_gradient");
        source = add(source, divergence(matrix_apply(coupling, *rho)));
    }

    const int n = geometry.n();
    std::vector<Field> grad;
    grad.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        Field comp = source.is_spatial()
                         ? Field(geometry, source.mode_box(), source.real_valued())
                         : Field(geometry, *source.time_grid(), source.mode_box(),
                                 source.real_valued());
        for (const auto& [mode, trajectory] : source.coefficients()) {
            if (mode.is_zero()) continue;
            if (comp.real_valued() && !canonical_or_zero(mode)) continue;
            const double symbol = laplace_symbol(mode, geometry);
            const Complex mult(0.0, -static_cast<double>(mode[k - 1]) /
                                        (2.0 * M_PI * geometry.period(k) * symbol));
            Trajectory t(trajectory.size());
            for (std::size_t s = 0; s < trajectory.size(); ++s) {
                t[s] = mult * trajectory[s];
            }
            comp.set(mode, std::move(t));
        }
        grad.push_back(std::move(comp));
    }
    return VectorField(std::move(grad));
}

VectorField reconstruct_density(const VectorField& eta, const VectorField& g,
                                const VectorField& h, double kappa,
                                const TorusGeometry& geometry, const TimeGrid& grid) {
    check_vector_shape(eta, geometry, "reconstruct_density");
    std::vector<Field> rho;
    rho.reserve(static_cast<std::size_t>(eta.n()));
    for (int k = 1; k <= eta.n(); ++k) {
        rho.push_back(heat_propagate(eta.component(k), add(g.component(k), h.component(k)), kappa,
                                     geometry, grid));
    }
    return VectorField(std::move(rho));
}

VectorField reconstruct_velocity(const VectorField& phi, const VectorField& r,
                                 const VectorField& f, const std::optional<VectorField>& rho,
                                 const PhysicsParams& physics, const TorusGeometry& geometry,
                                 const TimeGrid& grid, std::vector<std::string>* warnings) {
    check_vector_shape(phi, geometry, "reconstruct_velocity");
    require(phi.is_spatial(), "reconstruct_velocity: initial velocity must be spatial");

    const double divergence_level = max_magnitude(divergence(phi));
    double phi_scale = 0.0;
    for (const Field& c : phi.components()) {
        phi_scale = std::max(phi_scale, max_magnitude(c));
    }
    if (divergence_level > 1e-10 * (1.0 + phi_scale) && warnings != nullptr) {
        std::ostringstream msg;
        msg << "reconstruct_velocity: initial velocity is not divergence-free (max |div phi^| = "
            << divergence_level << "); the reconstructed field will not stay solenoidal";
        warnings->push_back(msg.str());
    }

    const VectorField grad = pressure_gradient(r, f, rho, physics.A, geometry);
    std::optional<VectorField> coupled;
    if (rho) {
        coupled = matrix_apply(physics.A, *rho);
    }

    std::vector<Field> u;
    u.reserve(static_cast<std::size_t>(phi.n()));
    for (int k = 1; k <= phi.n(); ++k) {
        Field forcing = add(r.component(k), f.component(k));
        if (coupled) {
            forcing = add(forcing, coupled->component(k));
        }
        forcing = add(forcing, scale(grad.component(k), -1.0));
        u.push_back(heat_propagate(phi.component(k), forcing, physics.nu, geometry, grid));
    }
    return VectorField(std::move(u));
}

} // namespace modeflow
