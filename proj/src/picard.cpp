#include "modeflow/picard.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace modeflow {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

double sq(double x) {
    return x * x;
}

double max_mode_magnitude(const Field& f) {
    double m = 0.0;
    for (const auto& [mode, trajectory] : f.coefficients()) {
        for (Complex c : trajectory) {
            m = std::max(m, std::abs(c));
        }
    }
    return m;
}

void check_data_vector(const VectorField& v, const TorusProblem& p, bool spatial,
                       const char* name) {
    std::ostringstream msg;
    msg << "TorusProblem: " << name;
    if (v.n() != p.geometry.n()) {
        throw std::invalid_argument(msg.str() + " must have one component per dimension");
    }
    if (v.geometry() != p.geometry) {
        throw std::invalid_argument(msg.str() + " has mismatched geometry");
    }
    if (v.component(1).mode_box() != p.box) {
        throw std::invalid_argument(msg.str() + " has a mismatched mode box");
    }
    if (spatial != v.is_spatial() ||
        (!spatial && *v.component(1).time_grid() != p.grid)) {
        throw std::invalid_argument(msg.str() + (spatial ? " must be spatial"
                                                         : " must live on the problem grid"));
    }
}

TorusProblem finish_problem(TorusProblem p) {
    const int n = p.geometry.n();
    check_data_vector(p.phi, p, true, "phi");
    check_data_vector(p.eta, p, true, "eta");
    check_data_vector(p.f, p, false, "f");
    check_data_vector(p.g, p, false, "g");
    require(static_cast<int>(p.x0.size()) == n, "TorusProblem: anchor point dimension mismatch");
    require(p.p0.size() == p.grid.size(), "TorusProblem: anchor trajectory length mismatch");
    if (p.condition_C) {
        require(*p.condition_C > 0.0, "TorusProblem: condition_C must be positive");
    }
    if (p.ball_tail) {
        validate(*p.ball_tail);
    }

    const double divergence_level = max_mode_magnitude(divergence(p.phi));
    if (divergence_level > 1e-10) {
        std::ostringstream msg;
        msg << "TorusProblem: initial velocity is not divergence-free (max |div phi^| = "
            << divergence_level << " exceeds 1e-10)";
        throw std::invalid_argument(msg.str());
    }
    return p;
}

void check_state(const TorusProblem& problem, const IterationState& state) {
    if (state.r.n() != problem.geometry.n() || state.r.geometry() != problem.geometry ||
        state.r.is_spatial() || *state.r.component(1).time_grid() != problem.grid ||
        state.r.component(1).mode_box() != problem.box) {
        throw std::invalid_argument("IterationState: r does not match the problem's shape");
    }
    if (problem.kind == ProblemKind::Boussinesq) {
        require(state.h.has_value(), "IterationState: Boussinesq state needs a density residual");
        if (state.h->n() != problem.geometry.n() || state.h->geometry() != problem.geometry ||
            state.h->is_spatial() || state.h->component(1).mode_box() != problem.box) {
            throw std::invalid_argument("IterationState: h does not match the problem's shape");
        }
    } else {
        require(!state.h.has_value(),
                "IterationState: a Navier-Stokes state carries no density residual");
    }
}

/// Everything one application of T produces: the image (r', h'), the
/// reconstruction it was built from, and the convolution mass dropped at the
/// mode-box boundary.
struct Application {
    VectorField r;
    std::optional<VectorField> h;
    VectorField u;
    std::optional<VectorField> rho;
    AnchoredScalar p;
    double truncation_loss = 0.0;
};

Application apply_step(const TorusProblem& problem, const VectorField& r,
                       const std::optional<VectorField>& h) {
    const int n = problem.geometry.n();

    std::optional<VectorField> rho;
    if (problem.kind == ProblemKind::Boussinesq) {
        rho = reconstruct_density(problem.eta, problem.g, *h, problem.physics.kappa,
                                  problem.geometry, problem.grid);
    }
    VectorField u = reconstruct_velocity(problem.phi, r, problem.f, rho, problem.physics,
                                         problem.geometry, problem.grid, nullptr);

    Field source = add(divergence(r), divergence(problem.f));
    if (rho) {
        source = add(source, divergence(matrix_apply(problem.physics.A, *rho)));
    }
    AnchoredScalar p = poisson_solve(source, problem.x0, problem.p0, problem.geometry);

    double loss = 0.0;
    const auto advection = [&](const VectorField& target) {
        std::vector<Field> out;
        out.reserve(static_cast<std::size_t>(n));
        for (int k = 1; k <= n; ++k) {
            Field acc(problem.geometry, problem.grid, problem.box);
            for (int j = 1; j <= n; ++j) {
                ConvolveResult c = convolve(u.component(j),
                                            partial_derivative(target.component(k), j),
                                            problem.box);
                loss += c.truncation_loss;
                acc = (j == 1) ? std::move(c.field) : add(acc, c.field);
            }
            out.push_back(scale(acc, -1.0));
        }
        return VectorField(std::move(out));
    };

    VectorField r_image = advection(u);
    std::optional<VectorField> h_image;
    if (rho) {
        h_image = advection(*rho);
    }
    return Application{std::move(r_image), std::move(h_image), std::move(u), std::move(rho),
                       std::move(p), loss};
}

void enforce_truncation_cap(double loss, double cap) {
    if (loss > cap) {
        std::ostringstream msg;
        msg << "apply_T: convolution truncation loss " << loss << " exceeds the configured cap "
            << cap << "; enlarge the mode box or raise the cap";
        throw std::runtime_error(msg.str());
    }
}

/// Norm used for updates, residuals, and balls: max over every component of
/// the state (velocity and, for Boussinesq, density).
double state_norm(const VectorField& r, const std::optional<VectorField>& h,
                  const std::optional<KParams>& tail) {
    double norm = 0.0;
    for (const Field& c : r.components()) {
        norm = std::max(norm, norm_I(c, tail));
    }
    if (h) {
        for (const Field& c : h->components()) {
            norm = std::max(norm, norm_I(c, tail));
        }
    }
    return norm;
}

VectorField component_difference(const VectorField& a, const VectorField& b) {
    std::vector<Field> out;
    out.reserve(a.components().size());
    for (int k = 1; k <= a.n(); ++k) {
        out.push_back(add(a.component(k), scale(b.component(k), -1.0)));
    }
    return VectorField(std::move(out));
}

/// The margin recorded in reports: the configured radius's margin when the
/// problem names one, otherwise the best margin any radius achieves, which
/// the quadratic attains at C = A/2 with value 1/(8κ′A) (unbounded for zero
/// data, where every small radius works).
double report_condition_margin(const TorusProblem& problem) {
    if (problem.condition_C) {
        return check_condition_t42(problem, *problem.condition_C).margin;
    }
    const double kp = t42_kappa_prime(problem.geometry, problem.physics.nu);
    const double a = t42_data_norm(problem);
    if (a == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 / (8.0 * kp * a);
}

} // namespace

TorusProblem make_ns_problem(TorusGeometry geometry, PhysicsParams physics, VectorField phi,
                             VectorField f, std::vector<double> x0, std::vector<double> p0,
                             std::optional<double> condition_C,
                             std::optional<KParams> ball_tail) {
    require(!f.is_spatial(), "TorusProblem: forcing must be time-sampled");
    const TimeGrid grid = *f.component(1).time_grid();
    const ModeBox box = phi.component(1).mode_box();
    TorusProblem p{geometry,
                   grid,
                   box,
                   std::move(physics),
                   ProblemKind::NavierStokes,
                   std::move(phi),
                   VectorField::zeros(geometry, box, true),
                   std::move(f),
                   VectorField::zeros(geometry, grid, box, true),
                   std::move(x0),
                   std::move(p0),
                   condition_C,
                   ball_tail};
    return finish_problem(std::move(p));
}

TorusProblem make_boussinesq_problem(TorusGeometry geometry, PhysicsParams physics,
                                     VectorField phi, VectorField eta, VectorField f,
                                     VectorField g, std::vector<double> x0,
                                     std::vector<double> p0, std::optional<double> condition_C,
                                     std::optional<KParams> ball_tail) {
    require(!f.is_spatial(), "TorusProblem: forcing must be time-sampled");
    require(!physics.A.empty(), "TorusProblem: Boussinesq coupling matrix is missing");
    const TimeGrid grid = *f.component(1).time_grid();
    const ModeBox box = phi.component(1).mode_box();
    TorusProblem p{geometry,
                   grid,
                   box,
                   std::move(physics),
                   ProblemKind::Boussinesq,
                   std::move(phi),
                   std::move(eta),
                   std::move(f),
                   std::move(g),
                   std::move(x0),
                   std::move(p0),
                   condition_C,
                   ball_tail};
    return finish_problem(std::move(p));
}

IterationState initial_state(const TorusProblem& problem) {
    IterationState s;
    s.r = VectorField::zeros(problem.geometry, problem.grid, problem.box, true);
    if (problem.kind == ProblemKind::Boussinesq) {
        s.h = VectorField::zeros(problem.geometry, problem.grid, problem.box, true);
    }
    return s;
}

IterationState apply_T(const TorusProblem& problem, const IterationState& state,
                       double truncation_cap) {
    check_state(problem, state);
    Application a = apply_step(problem, state.r, state.h);
    enforce_truncation_cap(a.truncation_loss, truncation_cap);
    IterationState next;
    next.r = std::move(a.r);
    next.h = std::move(a.h);
    next.iteration = state.iteration + 1;
    next.u = std::move(a.u);
    next.rho = std::move(a.rho);
    next.p = std::move(a.p);
    return next;
}

FixedPointReport iterate(const TorusProblem& problem, const IterationState& initial, int max_iter,
                         double tol, double truncation_cap) {
    require(max_iter >= 1, "iterate: max_iter must be at least 1");
    require(tol > 0.0, "iterate: tol must be positive");
    check_state(problem, initial);

    const double margin = report_condition_margin(problem);
    FixedPointReport report;

    VectorField r = initial.r;
    std::optional<VectorField> h = initial.h;
    double previous_residual = 0.0;
    double previous_update = 0.0;
    double min_update = std::numeric_limits<double>::infinity();

    for (int i = 0; i <= max_iter; ++i) {
        Application a = apply_step(problem, r, h);
        enforce_truncation_cap(a.truncation_loss, truncation_cap);

        // Residual field r − T(r) = r + u·∇u; its norm doubles as the next
        // update norm, since the Picard update is exactly the negated
        // residual field.
        double residual = 0.0;
        {
            VectorField dr = component_difference(r, a.r);
            std::optional<VectorField> dh;
            if (h) dh = component_difference(*h, *a.h);
            residual = state_norm(dr, dh, std::nullopt);
        }
        IterationRecord record;
        record.iteration = i;
        record.update_norm = (i == 0) ? 0.0 : previous_residual;
        record.residual_norm = residual;
        record.ball_norm = state_norm(r, h, problem.ball_tail);
        record.condition_margin = margin;
        record.contraction = (i >= 2 && previous_update > 0.0)
                                 ? record.update_norm / previous_update
                                 : 0.0;
        record.max_divergence = max_mode_magnitude(divergence(a.u));
        report.records.push_back(record);

        const auto finish = [&](Verdict verdict) {
            report.verdict = verdict;
            report.final_residual = residual;
            report.final_state.r = std::move(r);
            report.final_state.h = std::move(h);
            report.final_state.iteration = i;
            report.final_state.u = std::move(a.u);
            report.final_state.rho = std::move(a.rho);
            report.final_state.p = std::move(a.p);
        };

        if (residual < tol) {
            finish(Verdict::Converged);
            return report;
        }
        if (i >= 1) {
            min_update = std::min(min_update, record.update_norm);
            if (record.update_norm > 10.0 * min_update) {
                finish(Verdict::Diverged);
                return report;
            }
        }
        if (i == max_iter) {
            finish(Verdict::MaxIterations);
            return report;
        }

        previous_residual = residual;
        previous_update = record.update_norm;
        r = std::move(a.r);
        h = std::move(a.h);
    }
    return report; // unreachable
}

ConditionCheck check_condition_t42(const TorusProblem& problem, double C) {
    require(C > 0.0, "check_condition_t42: C must be positive");
    ConditionCheck c;
    c.kappa_prime = t42_kappa_prime(problem.geometry, problem.physics.nu);
    c.data_norm = t42_data_norm(problem);
    c.margin = C / (c.kappa_prime * sq(c.data_norm + 2.0 * C));
    c.holds = c.margin > 1.0;
    return c;
}

double t42_kappa_prime(const TorusGeometry& geometry, double nu) {
    require(nu > 0.0, "t42_kappa_prime: nu must be positive");
    return static_cast<double>(geometry.n()) * geometry.max_period() / (2.0 * M_PI * nu);
}

double t42_data_norm(const TorusProblem& problem) {
    double ibar = 0.0;
    for (const Field& c : problem.phi.components()) {
        ibar = std::max(ibar, norm_Ibar(c));
    }
    double i_f = 0.0;
    for (const Field& c : problem.f.components()) {
        i_f = std::max(i_f, norm_I(c));
    }
    return ibar + 2.0 * i_f;
}

std::optional<std::pair<double, double>> feasible_C_interval(const TorusProblem& problem) {
    const double kp = t42_kappa_prime(problem.geometry, problem.physics.nu);
    const double a = t42_data_norm(problem);
    const double disc = 1.0 - 8.0 * kp * a;
    if (disc <= 0.0) {
        return std::nullopt;
    }
    // Stable quadratic solve for 4κ′C² + (4κ′A − 1)C + κ′A² = 0: the linear
    // coefficient is negative here, so q carries no cancellation and the
    // small root comes from the product of roots A²/4.
    const double q = (1.0 - 4.0 * kp * a + std::sqrt(disc)) / 2.0;
    const double upper = q / (4.0 * kp);
    const double lower = (kp * a * a) / q;
    return std::make_pair(lower, upper);
}

ResidualReport residual_fields(const TorusProblem& problem, const IterationState& state) {
    check_state(problem, state);
    Application a = apply_step(problem, state.r, state.h);

    ResidualReport report;
    for (int k = 1; k <= problem.geometry.n(); ++k) {
        report.velocity_residuals.push_back(
            norm_I(add(state.r.component(k), scale(a.r.component(k), -1.0))));
    }
    if (a.h) {
        for (int k = 1; k <= problem.geometry.n(); ++k) {
            report.density_residuals.push_back(
                norm_I(add(state.h->component(k), scale(a.h->component(k), -1.0))));
        }
    }
    report.max_divergence = max_mode_magnitude(divergence(a.u));
    for (std::size_t s = 0; s < problem.p0.size(); ++s) {
        report.anchor_error = std::max(
            report.anchor_error,
            std::abs(evaluate(a.p.field, problem.x0, s) - Complex(problem.p0[s], 0.0)));
    }
    return report;
}

} // namespace modeflow
