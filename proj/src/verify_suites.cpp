#include "modeflow/verify_suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "modeflow/decay_classes.hpp"
#include "modeflow/field_ops.hpp"
#include "modeflow/propagators.hpp"
#include "modeflow/sampling.hpp"
#include "modeflow/special_functions.hpp"

namespace modeflow {
namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Quadrature oracle for the closed-form radial moments. Adaptive Simpson with
// a tolerance far below the 1e-10 acceptance line; the truncation radius R is
// chosen so the discarded Gaussian tail is below 1e-16 of the integral.
// ---------------------------------------------------------------------------

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double eps,
                        int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = simpson(a, b, fa, fm, fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 48);
}

/// integral_0^inf r^power e^(-b r^2) dr by adaptive quadrature.
double moment_oracle(int power, double b) {
    // At r = R the integrand is r^power e^(-bR^2); bR^2 = 60 + 8*power keeps
    // the tail contribution under 1e-16 of the total for power <= 13.
    const double R = std::sqrt((60.0 + 8.0 * power) / b);
    auto f = [power, b](double r) { return std::pow(r, power) * std::exp(-b * r * r); };
    // Scale the absolute tolerance to a cheap upper estimate of the integral.
    const double scale = std::max(f(std::sqrt(0.5 * power / b + 1e-30)), 1e-300) * R;
    return integrate(f, 0.0, R, 1e-15 * scale);
}

void push(std::vector<CheckRecord>& out, std::string name, bool passed, double margin,
          std::string details) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.passed = passed;
    rec.margin = margin;
    rec.details = std::move(details);
    out.push_back(std::move(rec));
}

// ---------------------------------------------------------------------------
// Suite: closed-form Gaussian moments and the sphere-area recursion.
// ---------------------------------------------------------------------------

void run_lemma32(const VerifyOptions& options, std::vector<CheckRecord>& out) {
    const double rates[] = {0.5, 1.0, 2.0, 5.0};

    for (int parity = 0; parity < 2; ++parity) {
        double worst = 0.0;
        std::string worst_at;
        for (int k = 0; k <= 6; ++k) {
            for (double b : rates) {
                double closed = parity == 0 ? gaussian_moment_even(k, b)
                                            : gaussian_moment_odd(k, b);
                if (parity == 0 && k == 0 && options.override_neg1_double_factorial) {
                    closed = 0.0; // (-1)!! corrupted from 1 to 0
                }
                const int power = parity == 0 ? 2 * k : 2 * k + 1;
                const double reference = moment_oracle(power, b);
                const double rel = std::abs(closed - reference) / reference;
                if (rel > worst) {
                    worst = rel;
                    std::ostringstream tag;
                    tag << "k=" << k << " b=" << b;
                    worst_at = tag.str();
                }
            }
        }
        std::ostringstream details;
        details << "28 closed forms vs adaptive quadrature; worst rel error " << fmt(worst)
                << " at " << worst_at;
        push(out, parity == 0 ? "lemma32/even-moments" : "lemma32/odd-moments",
             worst <= 1e-10, worst, details.str());
    }

    {
        // exact <= bound for every mixed moment with n <= 4 and |alpha| <= 8.
        double worst = 0.0;
        long long checked = 0;
        for (int n = 1; n <= 4; ++n) {
            std::vector<int32_t> alpha(static_cast<std::size_t>(n), 0);
            for (;;) {
                int64_t total = 0;
                for (int32_t e : alpha) total += e;
                if (total <= 8) {
                    for (double b : rates) {
                        const GaussianMomentResult m = gaussian_moment_multi(Mode(alpha), b);
                        worst = std::max(worst, m.exact / m.bound);
                        ++checked;
                    }
                }
                int axis = 0;
                while (axis < n && alpha[static_cast<std::size_t>(axis)] == 8) {
                    alpha[static_cast<std::size_t>(axis)] = 0;
                    ++axis;
                }
                if (axis == n) break;
                ++alpha[static_cast<std::size_t>(axis)];
            }
        }
        std::ostringstream details;
        details << checked << " moments; worst exact/bound " << fmt(worst);
        push(out, "lemma32/moment-bound", worst <= 1.0, worst, details.str());
    }

    {
        double worst = 0.0;
        for (int n = 1; n <= 30; ++n) {
            const double lhs = sphere_area(n + 2);
            const double rhs = 2.0 * M_PI * sphere_area(n) / n;
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
        std::ostringstream details;
        details << "S_{n+2} = 2*pi*S_n/n for n <= 30; worst rel error " << fmt(worst);
        push(out, "lemma32/sphere-recursion", worst <= 1e-12, worst, details.str());
    }
}

// ---------------------------------------------------------------------------
// Suite: exhaustive rational census of the factorial-ratio bound.
// ---------------------------------------------------------------------------

/// Advances a multi-index odometer with per-axis caps; lowest axis fastest.
/// Returns false when the odometer wraps back to all zeros.
bool advance(std::vector<int32_t>& idx, const std::vector<int32_t>& cap) {
    for (std::size_t j = idx.size(); j-- > 0;) {
        if (idx[j] < cap[j]) {
            ++idx[j];
            std::fill(idx.begin() + static_cast<std::ptrdiff_t>(j) + 1, idx.end(), 0);
            return true;
        }
    }
    return false;
}

std::string tuple_string(int n, int k, const Mode& beta, const Mode& gamma, const Mode& a1,
                         const Mode& a2, const Rational& value) {
    std::ostringstream os;
    os << "n=" << n << " k=" << k << " beta=" << beta.str() << " gamma=" << gamma.str()
       << " alpha1=" << a1.str() << " alpha2=" << a2.str() << " L=" << value;
    return os.str();
}

} // namespace

Lemma33Census lemma33_census(int max_dim, int max_entry) {
    if (max_dim < 1) throw std::invalid_argument("lemma33_census: max_dim must be >= 1");
    if (max_entry < 0) throw std::invalid_argument("lemma33_census: max_entry must be >= 0");

    Lemma33Census census;
    Rational max_value = 0;

    for (int n = 1; n <= max_dim; ++n) {
        const std::size_t dim = static_cast<std::size_t>(n);
        const std::vector<int32_t> box_cap(dim, max_entry);
        std::vector<int32_t> beta(dim, 0);
        do {
            std::vector<int32_t> gamma(dim, 0);
            do {
                for (int k = 1; k <= n; ++k) {
                    // alpha1 <= beta; alpha2 <= gamma + e_k, both capped at max_entry.
                    std::vector<int32_t> a2_cap = gamma;
                    a2_cap[static_cast<std::size_t>(k - 1)] += 1;
                    for (auto& e : a2_cap) e = std::min(e, max_entry);

                    std::vector<int32_t> a1(dim, 0);
                    do {
                        std::vector<int32_t> a2(dim, 0);
                        do {
                            const Mode mb(beta), mg(gamma), m1(a1), m2(a2);
                            const Lemma33Result res = lemma33_check(m1, m2, mb, mg, k);
                            ++census.admissible;
                            if (!res.holds) {
                                ++census.violations;
                                if (census.first_violation.empty()) {
                                    census.first_violation =
                                        tuple_string(n, k, mb, mg, m1, m2, res.value);
                                }
                            }
                            if (res.value > max_value) max_value = res.value;
                        } while (advance(a2, a2_cap));
                    } while (advance(a1, beta));
                }
            } while (advance(gamma, box_cap));
        } while (advance(beta, box_cap));
    }

    census.max_ratio = max_value.convert_to<double>();
    std::ostringstream exact;
    exact << max_value;
    census.max_ratio_exact = exact.str();
    return census;
}

namespace {

void run_lemma33(const VerifyOptions& options, std::vector<CheckRecord>& out) {
    const Lemma33Census census = lemma33_census(options.lemma33_max_dim, options.lemma33_max_entry);
    std::ostringstream details;
    details << census.admissible << " admissible tuples (n <= " << options.lemma33_max_dim
            << ", entries <= " << options.lemma33_max_entry << "); " << census.violations
            << " with L > 1; max L = " << census.max_ratio_exact;
    if (!census.first_violation.empty()) {
        details << "; first violation: " << census.first_violation;
    }
    push(out, "lemma33/census", census.violations == 0, census.max_ratio, details.str());
}

// ---------------------------------------------------------------------------
// Suite: the bilinear product bound on randomized heat-flow instances.
// ---------------------------------------------------------------------------

void run_lemma35(const VerifyOptions& options, std::vector<CheckRecord>& out) {
    SampleStream stream(options.seed);
    double worst = 0.0;
    long long violations = 0;

    for (int i = 0; i < options.lemma35_instances; ++i) {
        const int n = 1 + i % 3;
        std::vector<double> periods;
        for (int j = 0; j < n; ++j) periods.push_back(stream.uniform(1.0, 2.0));
        const TorusGeometry geometry(n, periods);
        const TimeGrid grid = TimeGrid::uniform(1.2, 96);
        const ModeBox data_box = ModeBox::cube(n, 1);
        const ModeBox out_box = ModeBox::cube(n, 2);

        const JParams j_phi{stream.uniform(0.3, 0.8), stream.uniform(0.5, 2.0)};
        const JParams j_eta{stream.uniform(0.3, 0.8), stream.uniform(0.5, 2.0)};
        const KParams k_h{stream.uniform(0.6, 1.8), stream.uniform(0.3, 0.8),
                          stream.uniform(0.5, 2.0)};
        const KParams k_g{stream.uniform(0.6, 1.8), stream.uniform(0.3, 0.8),
                          stream.uniform(0.5, 2.0)};

        Field phi = random_j_field(stream, geometry, data_box, j_phi, 5);
        Field eta = random_j_field(stream, geometry, data_box, j_eta, 5);
        Field h = random_k_field(stream, geometry, grid, data_box, k_h, 5);
        Field g = random_k_field(stream, geometry, grid, data_box, k_g, 5);
        // The bound has no slack for mass sitting at theta = 0 (the mean mode
        // neither decays nor differentiates away), and the trapezoid rule the
        // norms use overestimates I(.) slightly. Dropping the mean keeps the
        // comparison a test of the inequality rather than of quadrature bias.
        phi.set(Mode::zero(n), Complex(0.0, 0.0));
        eta.set(Mode::zero(n), Complex(0.0, 0.0));
        h.set(Mode::zero(n), std::vector<Complex>(grid.size(), Complex(0.0, 0.0)));
        g.set(Mode::zero(n), std::vector<Complex>(grid.size(), Complex(0.0, 0.0)));

        const double nu = stream.uniform(0.4, 1.2);
        const double kappa = stream.uniform(0.4, 1.2);
        const int axis = 1 + i % n;

        const Field u = heat_propagate(phi, h, nu, geometry, grid);
        const Field rho = heat_propagate(eta, g, kappa, geometry, grid);
        const ConvolveResult product = convolve(u, partial_derivative(rho, axis), out_box);
        if (product.truncation_loss != 0.0) {
            throw std::logic_error("lemma35 suite: product support escaped the output box");
        }

        const double lhs = norm_I(product.field);
        const double rhs = lemma35_bound(phi, eta, h, g, axis, kappa, geometry);
        const double ratio = lhs == 0.0 ? 0.0 : lhs / rhs;
        if (lhs > rhs) ++violations;
        worst = std::max(worst, ratio);
    }

    std::ostringstream details;
    details << options.lemma35_instances << " random instances (n <= 3); worst I(u d_k rho)/bound "
            << fmt(worst) << "; " << violations << " violations";
    push(out, "lemma35/bilinear-bound", violations == 0, worst, details.str());
}

// ---------------------------------------------------------------------------
// Suite: product and derivative closure of the torus decay classes.
// ---------------------------------------------------------------------------

struct ClosureTally {
    double worst = 0.0;
    long long violations = 0;

    void add(const MembershipResult& res) {
        worst = std::max(worst, res.margin);
        if (!res.member) ++violations;
    }
};

void run_class_closure(const VerifyOptions& options, std::vector<CheckRecord>& out) {
    SampleStream stream(options.seed + 1);
    const TorusProductCase cases[] = {TorusProductCase::PdP, TorusProductCase::PdQ,
                                      TorusProductCase::QdP, TorusProductCase::QdQ};

    for (TorusProductCase pcase : cases) {
        ClosureTally tally;
        for (int i = 0; i < options.closure_instances; ++i) {
            const int n = 1 + i % 2;
            std::vector<double> periods;
            for (int j = 0; j < n; ++j) periods.push_back(stream.uniform(0.8, 2.0));
            const TorusGeometry geometry(n, periods);
            const TimeGrid grid = TimeGrid::uniform(1.2, 24);
            const ModeBox data_box = ModeBox::cube(n, 2);
            const ModeBox out_box = ModeBox::cube(n, 4);
            const int axis = 1 + i % n;

            const bool first_is_q = pcase == TorusProductCase::QdP || pcase == TorusProductCase::QdQ;
            const bool second_is_q = pcase == TorusProductCase::PdQ || pcase == TorusProductCase::QdQ;

            // A p-factor flows a J seed through the heat semigroup with no
            // forcing; a q-factor flows zero data under K-class forcing.
            auto make_factor = [&](bool is_q, double& rate_out) -> std::pair<Field, TorusFactor> {
                rate_out = stream.uniform(0.5, 2.0);
                if (is_q) {
                    const KParams seed{stream.uniform(0.6, 1.6), stream.uniform(0.3, 0.7),
                                       stream.uniform(0.5, 2.0)};
                    const Field forcing = random_k_field(stream, geometry, grid, data_box, seed, 4);
                    const Field zero(geometry, data_box);
                    return {heat_propagate(zero, forcing, rate_out, geometry, grid),
                            TorusFactor::from(seed)};
                }
                const JParams seed{stream.uniform(0.3, 0.7), stream.uniform(0.5, 2.0)};
                const Field initial = random_j_field(stream, geometry, data_box, seed, 4);
                const Field no_forcing(geometry, grid, data_box);
                return {heat_propagate(initial, no_forcing, rate_out, geometry, grid),
                        TorusFactor::from(seed)};
            };

            double rate1 = 0.0, rate2 = 0.0;
            const auto [field1, factor1] = make_factor(first_is_q, rate1);
            const auto [field2, factor2] = make_factor(second_is_q, rate2);

            const ConvolveResult product = convolve(field1, partial_derivative(field2, axis), out_box);
            if (product.truncation_loss != 0.0) {
                throw std::logic_error("closure suite: product support escaped the output box");
            }
            const KParams predicted = product_class_torus(pcase, factor1, factor2, axis,
                                                          geometry, rate2);
            tally.add(check_membership_K(product.field, predicted));
        }

        std::ostringstream details;
        details << options.closure_instances << " instances; worst membership margin "
                << fmt(tally.worst) << "; " << tally.violations << " violations";
        push(out, "class-closure/" + to_string(pcase), tally.violations == 0, tally.worst,
             details.str());
    }

    {
        ClosureTally tally;
        for (int i = 0; i < options.closure_instances; ++i) {
            const int n = 1 + i % 2;
            std::vector<double> periods;
            for (int j = 0; j < n; ++j) periods.push_back(stream.uniform(0.8, 2.0));
            const TorusGeometry geometry(n, periods);
            const int axis = 1 + i % n;
            const JParams params{stream.uniform(0.3, 0.8), stream.uniform(0.5, 2.0)};
            const Field field = random_j_field(stream, geometry, ModeBox::cube(n, 3), params, 6);
            tally.add(check_membership_J(partial_derivative(field, axis),
                                         derivative_class(params, axis, geometry)));
        }
        std::ostringstream details;
        details << options.closure_instances << " instances; worst membership margin "
                << fmt(tally.worst) << "; " << tally.violations << " violations";
        push(out, "class-closure/derivative-j", tally.violations == 0, tally.worst, details.str());
    }

    {
        ClosureTally tally;
        for (int i = 0; i < options.closure_instances; ++i) {
            const int n = 1 + i % 2;
            std::vector<double> periods;
            for (int j = 0; j < n; ++j) periods.push_back(stream.uniform(0.8, 2.0));
            const TorusGeometry geometry(n, periods);
            const TimeGrid grid = TimeGrid::uniform(1.5, 24);
            const int axis = 1 + i % n;
            const KParams params{stream.uniform(0.5, 1.5), stream.uniform(0.3, 0.8),
                                 stream.uniform(0.5, 2.0)};
            const Field field = random_k_field(stream, geometry, grid, ModeBox::cube(n, 3),
                                               params, 6);
            tally.add(check_membership_K(partial_derivative(field, axis),
                                         derivative_class(params, axis, geometry)));
        }
        std::ostringstream details;
        details << options.closure_instances << " instances; worst membership margin "
                << fmt(tally.worst) << "; " << tally.violations << " violations";
        push(out, "class-closure/derivative-k", tally.violations == 0, tally.worst, details.str());
    }
}

} // namespace

std::vector<CheckRecord> run_verify_suites(const VerifyOptions& options) {
    if (options.lemma35_instances <= 0 || options.closure_instances <= 0) {
        throw std::invalid_argument("run_verify_suites: instance counts must be positive");
    }
    const std::set<std::string> known = {"lemma32", "lemma33", "lemma35", "class-closure"};
    for (const std::string& suite : options.suites) {
        if (known.find(suite) == known.end()) {
            throw std::invalid_argument("run_verify_suites: unknown suite '" + suite + "'");
        }
    }

    std::vector<CheckRecord> records;
    for (const std::string& suite : options.suites) {
        if (suite == "lemma32") run_lemma32(options, records);
        else if (suite == "lemma33") run_lemma33(options, records);
        else if (suite == "lemma35") run_lemma35(options, records);
        else run_class_closure(options, records);
    }
    return records;
}

} // namespace modeflow
