#include "modeflow/theorem_constants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "modeflow/special_functions.hpp"

namespace modeflow {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

bool finite_nonneg(double x) {
    return std::isfinite(x) && x >= 0.0;
}

int order(const Mode& beta) {
    int total = 0;
    for (std::int32_t e : beta.entries()) {
        total += e;
    }
    return total;
}

/// Full-line Gaussian moment ∫_R |x|^m e^{−bx²} dx via the half-line closed
/// forms.
double line_moment(int m, double b) {
    if (m % 2 == 0) {
        return 2.0 * gaussian_moment_even(m / 2, b);
    }
    return 2.0 * gaussian_moment_odd((m - 1) / 2, b);
}

/// (2β_k)! with a log-domain fallback past the exact table.
double two_beta_factorial(int beta_k) {
    if (2 * beta_k <= DoubleFactorialTable::kMaxArgument) {
        return factorial_double(2 * beta_k);
    }
    return std::exp(std::lgamma(2.0 * beta_k + 1.0));
}

void check_physics(const PhysicsParams& physics) {
    require(std::isfinite(physics.nu) && physics.nu > 0.0,
            "theorem constants: nu must be positive");
    require(std::isfinite(physics.kappa) && physics.kappa > 0.0,
            "theorem constants: kappa must be positive");
    require(finite_nonneg(physics.B), "theorem constants: coupling magnitude B must be >= 0");
}

} // namespace

void validate(const GaussianExpansion& expansion) {
    require(std::isfinite(expansion.b) && expansion.b > 0.0,
            "GaussianExpansion: rate b must be positive");
    require(expansion.n >= 1, "GaussianExpansion: dimension must be at least 1");
    for (const auto& [beta, coefficient] : expansion.terms) {
        require(static_cast<int>(beta.entries().size()) == expansion.n,
                "GaussianExpansion: multi-index dimension mismatch");
        for (std::int32_t e : beta.entries()) {
            require(e >= 0, "GaussianExpansion: multi-indices must be nonnegative");
        }
        require(finite_nonneg(coefficient),
                "GaussianExpansion: coefficient bounds must be finite and nonnegative");
    }
}

bool class_consistent(const GaussianExpansion& expansion, const GParams& params) {
    validate(expansion);
    validate(params);
    for (const auto& [beta, coefficient] : expansion.terms) {
        double bound = params.d * std::pow(params.r, order(beta));
        for (std::int32_t e : beta.entries()) {
            bound /= two_beta_factorial(e);
        }
        if (coefficient > bound) {
            return false;
        }
    }
    return true;
}

void validate(const DataConstants& constants) {
    const double values[] = {constants.C_phi0, constants.C_phi1, constants.C_eta0,
                             constants.C_eta1, constants.C_f0,   constants.C_g0,
                             constants.D_phi0, constants.D_phi1, constants.D_eta0,
                             constants.D_eta1, constants.D_f0,   constants.D_g0};
    for (double v : values) {
        require(finite_nonneg(v), "DataConstants: entries must be finite and nonnegative");
    }
}

ConstantBounds data_constants(const GaussianExpansion& expansion, int j) {
    validate(expansion);
    require(j == 0 || j == 1, "data_constants: j must be 0 or 1");

    ConstantBounds bounds;
    for (const auto& [beta, coefficient] : expansion.terms) {
        const int total = order(beta);

        // sup bound: optimize direction and radius separately (both exact).
        double direction = 1.0;
        if (total > 0) {
            for (std::int32_t e : beta.entries()) {
                if (e > 0) {
                    direction *= std::pow(static_cast<double>(e) / total, e / 2.0);
                }
            }
        }
        const int radial_power = total + j;
        const double radius =
            radial_power == 0
                ? 1.0
                : std::pow(radial_power / (2.0 * expansion.b * M_E), radial_power / 2.0);
        bounds.D += coefficient * direction * radius;

        // integral bound: |ω| ≤ Σ_k |ω_k| splits the j = 1 case into per-axis
        // products of one-dimensional moments.
        if (j == 0) {
            double product = 1.0;
            for (std::int32_t e : beta.entries()) {
                product *= line_moment(e, expansion.b);
            }
            bounds.C += coefficient * product;
        } else {
            const auto& entries = beta.entries();
            for (std::size_t k = 0; k < entries.size(); ++k) {
                double product = 1.0;
                for (std::size_t m = 0; m < entries.size(); ++m) {
                    product *= line_moment(entries[m] + (m == k ? 1 : 0), expansion.b);
                }
                bounds.C += coefficient * product;
            }
        }
    }
    return bounds;
}

Theorem41Constants theorem41_constants(double C, double D, const DataConstants& data,
                                       const PhysicsParams& physics, int n) {
    require(n >= 9, "theorem41_constants: requires n >= 9");
    require(std::isfinite(C) && C > 0.0 && std::isfinite(D) && D > 0.0,
            "theorem41_constants: C and D must be positive");
    validate(data);
    check_physics(physics);

    const double nn = n;
    const double nu = physics.nu;
    const double kappa = physics.kappa;
    const double B = physics.B;
    const double Sn = sphere_area(n);

    Theorem41Constants out;

    const auto M_j = [&](int j) {
        return (j == 0 ? data.C_phi0 : data.C_phi1)
               + (nn + 1) * (D + data.D_f0 + nn * B * data.D_eta0) * Sn / (nu * (nn - 2 + j))
               + nn * (nn + 1) * B * (D + data.D_g0) * Sn / (kappa * nu * (nn - 4 + j))
               + nn * (nn + 1) * (C + data.C_f0 + nn * B * data.C_eta0) / nu
               + nn * (nn + 1) * B * (C + data.C_g0) / (kappa * nu);
    };
    out.M0 = M_j(0);
    out.M1 = M_j(1);
    out.Mprime = data.C_eta1 + (data.D_g0 + D) * Sn / (kappa * (nn - 1))
                 + (data.C_g0 + C) / kappa;
    out.M = std::pow(2.0 * M_PI, -nn) * nn * out.M0 * std::max(out.M1, out.Mprime);

    out.N1 =
        data.D_eta1
            * (data.C_phi0
               + (nn + 1) * (D + data.D_f0 + nn * B * data.D_eta0) * Sn / ((nn - 2) * nu)
               + (nn + 1) * (C + data.C_f0 + nn * B * data.C_eta0) / nu
               + (nn + 1) * nn * B / (nu * kappa)
                     * ((D + data.D_g0) * Sn / (nn - 4) + data.C_g0 + C))
        + data.C_phi0 / kappa * ((D + data.D_g0) * Sn / (nn - 1) + data.C_g0 + C)
        + (nn + 1) / (kappa * nu)
              * std::pow(D + data.D_f0 + nn * B * data.D_eta0, 1.0 / 3.0)
              * std::pow((D + data.D_g0) * Sn / (nn - 3) + data.C_g0 + C, 1.0 / 3.0)
              * std::pow((D + data.D_f0 + nn * B * data.D_eta0) * Sn / (nn - 3) + C
                             + data.C_f0 + nn * B * data.C_eta0,
                         2.0 / 3.0)
              * std::pow(data.D_g0 + D, 2.0 / 3.0)
        + nn * (nn + 1) * B / (kappa * kappa * nu) * (data.D_g0 + D)
              * ((data.D_g0 + D) * Sn / (nn - 5) + data.C_g0 + C);

    out.N2 =
        data.D_phi1 * data.C_phi0
        + (nn + 1) * data.D_phi0
              * ((D + data.D_f0 + nn * B * data.D_eta0) * Sn / (nu * (nn - 1))
                 + (C + data.C_f0 + nn * B * data.C_eta0) / nu
                 + nn * B / (nu * kappa)
                       * ((D + data.D_g0) * Sn / (nn - 3) + data.C_g0 + C))
        + (nn + 1) * data.D_phi1
              * ((D + data.D_f0 + nn * B * data.D_eta0) * Sn / (nu * (nn - 2))
                 + (C + data.C_f0 + nn * B * data.C_eta0) / nu
                 + nn * B / (nu * kappa)
                       * ((D + data.D_g0) * Sn / (nn - 4) + data.C_g0 + C))
        + nn * (nn + 1) * (nn + 1) * B / (nu * nu * kappa)
              * std::pow(D + data.D_f0 + nn * B * data.D_eta0, 3.0 / 5.0)
              * std::pow(D + data.D_g0, 2.0 / 5.0)
              * std::pow((data.D_f0 + D + nn * B * data.D_eta0) * Sn / (nn - 5) + data.C_f0
                             + C + nn * B * data.C_eta0,
                         2.0 / 5.0)
              * std::pow((data.D_g0 + D) * Sn / (nn - 5) + data.C_g0 + C, 3.0 / 5.0)
        + nn * (nn + 1) * (nn + 1) * B / (nu * nu * kappa)
              * std::pow(D + data.D_f0 + nn * B * data.D_eta0, 4.0 / 5.0)
              * std::pow(D + data.D_g0, 1.0 / 5.0)
              * std::pow((data.D_f0 + D + nn * B * data.D_eta0) * Sn / (nn - 5) + data.C_f0
                             + C + nn * B * data.C_eta0,
                         1.0 / 5.0)
              * std::pow((data.D_g0 + D) * Sn / (nn - 5) + data.C_g0 + C, 4.0 / 5.0)
        + nn * nn * (nn + 1) * (nn + 1) * B * B / (nu * nu * kappa * kappa)
              * (data.D_g0 + D) * ((data.D_g0 + D) * Sn / (nn - 7) + data.C_g0 + C)
        + (nn + 1) * (nn + 1) / (nu * nu)
              * ((data.D_f0 + D + nn * B * data.D_eta0) * Sn / (nn - 3) + data.C_f0 + C
                 + nn * B * data.C_eta0)
              * (data.D_f0 + D + nn * B * data.D_eta0);

    out.N = nn * std::pow(2.0 * M_PI, -nn) * std::max(out.N1, out.N2);
    return out;
}

FeasibilityResult feasibility_search(const DataConstants& data, const PhysicsParams& physics,
                                     int n, const FeasibilitySweep& sweep) {
    require(n >= 9, "feasibility_search: requires n >= 9");
    validate(data);
    check_physics(physics);
    require(std::isfinite(sweep.lo) && std::isfinite(sweep.hi) && 0.0 < sweep.lo &&
                sweep.lo < sweep.hi,
            "feasibility_search: sweep bounds must satisfy 0 < lo < hi");
    require(sweep.points_per_decade >= 1,
            "feasibility_search: points_per_decade must be at least 1");
    require(sweep.bisection_steps >= 0,
            "feasibility_search: bisection_steps must be nonnegative");

    const auto violation_at = [&](double C, double D) {
        const Theorem41Constants t = theorem41_constants(C, D, data, physics, n);
        return std::max(t.M / C, t.N / D);
    };

    const double log_lo = std::log10(sweep.lo);
    const double log_hi = std::log10(sweep.hi);
    const int segments = std::max(
        1, static_cast<int>(std::lround((log_hi - log_lo) * sweep.points_per_decade)));
    std::vector<double> axis(static_cast<std::size_t>(segments) + 1);
    for (int i = 0; i <= segments; ++i) {
        axis[static_cast<std::size_t>(i)] =
            std::pow(10.0, log_lo + (log_hi - log_lo) * i / segments);
    }

    double best_c = axis.front();
    double best_d = axis.front();
    double best_v = violation_at(best_c, best_d);
    for (double c : axis) {
        for (double d : axis) {
            const double v = violation_at(c, d);
            if (v < best_v) {
                best_v = v;
                best_c = c;
                best_d = d;
            }
        }
    }

    // Step-halving descent around the best grid point, in log coordinates.
    double log_c = std::log(best_c);
    double log_d = std::log(best_d);
    double step = std::log(10.0) / sweep.points_per_decade;
    const double clamp_lo = std::log(sweep.lo);
    const double clamp_hi = std::log(sweep.hi);
    for (int round = 0; round < sweep.bisection_steps; ++round) {
        for (int dc = -1; dc <= 1; ++dc) {
            for (int dd = -1; dd <= 1; ++dd) {
                const double lc = std::clamp(log_c + dc * step, clamp_lo, clamp_hi);
                const double ld = std::clamp(log_d + dd * step, clamp_lo, clamp_hi);
                const double v = violation_at(std::exp(lc), std::exp(ld));
                if (v < best_v) {
                    best_v = v;
                    log_c = lc;
                    log_d = ld;
                }
            }
        }
        step /= 2.0;
    }
    best_c = std::exp(log_c);
    best_d = std::exp(log_d);

    FeasibilityResult result;
    result.C = best_c;
    result.D = best_d;
    result.constants = theorem41_constants(best_c, best_d, data, physics, n);
    result.violation = std::max(result.constants.M / best_c, result.constants.N / best_d);
    result.found = result.constants.M < best_c && result.constants.N < best_d;
    const double margin_m =
        result.constants.M > 0.0 ? best_c / result.constants.M
                                 : std::numeric_limits<double>::infinity();
    const double margin_n =
        result.constants.N > 0.0 ? best_d / result.constants.N
                                 : std::numeric_limits<double>::infinity();
    result.margin = std::min(margin_m, margin_n);
    return result;
}

NsConditionCheck ns_rn_condition(double C, double D, const DataConstants& data, double nu,
                                 int n) {
    require(n >= 5, "ns_rn_condition: requires n >= 5");
    require(std::isfinite(C) && C > 0.0 && std::isfinite(D) && D > 0.0,
            "ns_rn_condition: C and D must be positive");
    require(std::isfinite(nu) && nu > 0.0, "ns_rn_condition: nu must be positive");
    validate(data);

    const double nn = n;
    const double Sn = sphere_area(n);

    const double lhs_first =
        data.D_phi1 / nu * ((D + data.D_f0) * Sn / (nn - 2) + C + data.C_f0)
        + data.D_phi0 / nu * ((D + data.D_f0) * Sn / (nn - 1) + C + data.C_f0)
        + data.D_phi1 * data.C_phi0
        + ((data.D_f0 + D) * Sn / (nn - 3) + data.C_f0 + C) * (data.D_f0 + D) / (nu * nu);
    const double rhs_first = std::pow(2.0 * M_PI, nn) * D / nn;

    const double lhs_second =
        (data.C_phi0 + (D + data.D_f0) * Sn / (nu * (nn - 2)) + (C + data.C_f0) / nu)
        * (data.C_phi1 + (D + data.D_f0) * Sn / (nu * (nn - 1)) + (C + data.C_f0) / nu);
    const double rhs_second = std::pow(2.0 * M_PI, nn) * C / nn;

    NsConditionCheck check;
    check.first_holds = lhs_first < rhs_first;
    check.second_holds = lhs_second < rhs_second;
    check.first_margin = lhs_first > 0.0 ? rhs_first / lhs_first
                                         : std::numeric_limits<double>::infinity();
    check.second_margin = lhs_second > 0.0 ? rhs_second / lhs_second
                                           : std::numeric_limits<double>::infinity();
    return check;
}

} // namespace modeflow
