#include "modeflow/decay_classes.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "modeflow/special_functions.hpp"

namespace modeflow {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

/// Π_k |θ_k|! in double precision; arguments beyond the exact table fall back
/// to exp(lgamma), which only matters far outside any configured mode box.
double factorial_mass(const Mode& m) {
    double out = 1.0;
    for (int k = 0; k < m.dim(); ++k) {
        const int a = std::abs(m[k]);
        out *= (a <= DoubleFactorialTable::kMaxArgument)
                   ? factorial_double(a)
                   : std::exp(std::lgamma(a + 1.0));
    }
    return out;
}

void check_axis(int axis, const TorusGeometry& geometry, const char* who) {
    if (axis < 1 || axis > geometry.n()) {
        std::ostringstream msg;
        msg << who << ": axis " << axis << " out of range for dimension " << geometry.n();
        throw std::invalid_argument(msg.str());
    }
}

void check_factor_kind(bool expect_k, const TorusFactor& f, const char* slot,
                       TorusProductCase pcase) {
    if (f.is_k != expect_k) {
        std::ostringstream msg;
        msg << "product_class_torus(" << to_string(pcase) << "): " << slot
            << " factor must be " << (expect_k ? "a K-class forcing term" : "a J-class seed term");
        throw std::invalid_argument(msg.str());
    }
    require(f.r > 0.0 && f.d > 0.0, "product_class_torus: factor needs r > 0, d > 0");
    if (expect_k) {
        require(f.b > 0.0, "product_class_torus: K-class factor needs b > 0");
    }
}

void check_rn_factor(bool expect_h, const RnFactor& f, const char* slot, RnProductCase pcase,
                     int n) {
    if (f.is_h != expect_h) {
        std::ostringstream msg;
        msg << "product_class_rn(" << to_string(pcase) << "): " << slot << " factor must be "
            << (expect_h ? "H-class" : "G-class");
        throw std::invalid_argument(msg.str());
    }
    require(f.b > 0.0 && f.r > 0.0 && f.d > 0.0,
            "product_class_rn: factor needs b, r, d > 0");
    if (expect_h) {
        require(f.c > 1.0 && 2.0 * f.c <= static_cast<double>(n),
                "product_class_rn: H-class factor needs 1 < c <= n/2");
    }
}

/// Guard against formula factors that are zero or negative at the gated
/// dimension (the g∂g-shaped denominators vanish below n = 5 even though the
/// case gate admits n = 3; a nonpositive amplitude is never a usable class).
double positive_denominator(double value, RnProductCase pcase) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "product_class_rn(" << to_string(pcase)
            << "): case-table denominator evaluates to " << value
            << " at this dimension; the printed tuple yields no positive amplitude here";
        throw std::invalid_argument(msg.str());
    }
    return value;
}

} // namespace

void validate(const JParams& p) {
    require(p.r > 0.0 && p.d > 0.0, "JParams requires r > 0 and d > 0");
}

void validate(const KParams& p) {
    require(p.b > 0.0 && p.r > 0.0 && p.d > 0.0, "KParams requires b, r, d > 0");
}

void validate(const GParams& p) {
    require(p.b > 0.0 && p.r > 0.0 && p.d > 0.0, "GParams requires b, r, d > 0");
}

void validate(const HParams& p, int n) {
    require(p.b > 0.0 && p.r > 0.0 && p.d > 0.0, "HParams requires b, r, d > 0");
    if (!(p.c > 1.0 && 2.0 * p.c <= static_cast<double>(n))) {
        std::ostringstream msg;
        msg << "HParams requires 1 < c <= n/2 (c = " << p.c << ", n = " << n << ")";
        throw std::invalid_argument(msg.str());
    }
}

MembershipResult check_membership_K(const Field& field, const KParams& params,
                                    const std::vector<std::size_t>& sample_indices) {
    validate(params);
    require(field.is_time_sampled(), "check_membership_K requires a time-sampled field");
    const TimeGrid& grid = *field.time_grid();

    std::vector<std::size_t> samples = sample_indices;
    if (samples.empty()) {
        samples.resize(grid.size());
        std::iota(samples.begin(), samples.end(), std::size_t{0});
    } else {
        for (std::size_t s : samples) {
            require(s < grid.size(), "check_membership_K: sample index out of range");
        }
    }

    MembershipResult result;
    result.worst_mode = Mode::zero(field.geometry().n());
    for (const auto& [mode, trajectory] : field.coefficients()) {
        const double mass = factorial_mass(mode);
        const double radial = std::pow(params.r, static_cast<double>(mode.order()));
        for (std::size_t s : samples) {
            const double bound = params.d * radial * std::exp(-params.b * grid[s]);
            const double ratio = std::abs(trajectory[s]) * mass / bound;
            if (ratio > result.margin) {
                result.margin = ratio;
                result.worst_mode = mode;
                result.worst_sample = s;
            }
        }
    }
    result.member = result.margin <= 1.0;
    return result;
}

MembershipResult check_membership_J(const Field& field, const JParams& params) {
    validate(params);
    require(field.is_spatial(), "check_membership_J requires a spatial field");

    MembershipResult result;
    result.worst_mode = Mode::zero(field.geometry().n());
    for (const auto& [mode, trajectory] : field.coefficients()) {
        const double bound = params.d * std::pow(params.r, static_cast<double>(mode.order()));
        const double ratio = std::abs(trajectory.front()) * factorial_mass(mode) / bound;
        if (ratio > result.margin) {
            result.margin = ratio;
            result.worst_mode = mode;
        }
    }
    result.member = result.margin <= 1.0;
    return result;
}

JParams derivative_class(const JParams& p, int axis, const TorusGeometry& geometry) {
    validate(p);
    check_axis(axis, geometry, "derivative_class");
    return JParams{2.0 * p.r, M_PI * p.d / geometry.period(axis)};
}

KParams derivative_class(const KParams& p, int axis, const TorusGeometry& geometry) {
    validate(p);
    check_axis(axis, geometry, "derivative_class");
    return KParams{p.b, 2.0 * p.r, M_PI * p.d / geometry.period(axis)};
}

GParams derivative_class(const GParams& p) {
    validate(p);
    return GParams{p.b, 2.0 * p.r, p.d / (p.r * p.r)};
}

HParams derivative_class(const HParams& p, int n) {
    validate(p, n);
    return HParams{p.b, 2.0 * p.r, p.c, p.d / (p.r * p.r)};
}

std::string to_string(TorusProductCase c) {
    switch (c) {
        case TorusProductCase::PdP: return "p.dp";
        case TorusProductCase::PdQ: return "p.dq";
        case TorusProductCase::QdP: return "q.dp";
        case TorusProductCase::QdQ: return "q.dq";
    }
    std::abort();
}

KParams product_class_torus(TorusProductCase pcase, const TorusFactor& f1, const TorusFactor& f2,
                            int axis, const TorusGeometry& geometry, double rate2) {
    check_axis(axis, geometry, "product_class_torus");
    require(rate2 > 0.0, "product_class_torus: propagation rate must be positive");

    const bool left_is_k = (pcase == TorusProductCase::QdP || pcase == TorusProductCase::QdQ);
    const bool right_is_k = (pcase == TorusProductCase::PdQ || pcase == TorusProductCase::QdQ);
    check_factor_kind(left_is_k, f1, "left", pcase);
    check_factor_kind(right_is_k, f2, "right", pcase);

    const int n = geometry.n();
    const double lk = geometry.period(axis);
    const double r_out = 2.0 * (f1.r + f2.r);
    const double amplitude =
        M_PI * std::pow(1.0 + std::exp(2.0 * f1.r + 2.0 * f2.r), static_cast<double>(n)) *
        f1.d * f2.d / lk;

    // Decay of the differentiated factor: the derivative removes the
    // m_k = 0 modes, so heat flow contributes at least rate2·(2π/l_k)², and a
    // Duhamel term decays at the slower of b₂/2 and half that spectral gap.
    const double heat_rate = 4.0 * M_PI * M_PI * rate2 / (lk * lk);

    switch (pcase) {
        case TorusProductCase::PdP:
            return KParams{heat_rate, r_out, amplitude};
        case TorusProductCase::QdP:
            return KParams{heat_rate, r_out, amplitude / f1.b};
        case TorusProductCase::PdQ: {
            const double rate = std::min(0.5 * f2.b, 0.5 * heat_rate);
            return KParams{rate, r_out, amplitude / (M_E * rate)};
        }
        case TorusProductCase::QdQ: {
            const double rate = std::min(0.5 * f2.b, 0.5 * heat_rate);
            return KParams{rate, r_out, amplitude / (f1.b * M_E * rate)};
        }
    }
    std::abort();
}

std::string to_string(RnProductCase c) {
    switch (c) {
        case RnProductCase::FdF: return "f.df";
        case RnProductCase::FdG: return "f.dg";
        case RnProductCase::GdF: return "g.df";
        case RnProductCase::GdG: return "g.dg";
        case RnProductCase::FdH: return "f.dh";
        case RnProductCase::HdF: return "h.df";
        case RnProductCase::GdH: return "g.dh";
        case RnProductCase::HdG: return "h.dg";
        case RnProductCase::HdH: return "h.dh";
    }
    std::abort();
}

HParams product_class_rn(RnProductCase pcase, const RnFactor& f1, const RnFactor& f2,
                         const RnRates& rates, int n, double c_out_hint) {
    require(rates.kappa1 > 0.0 && rates.kappa2 > 0.0 && rates.nu1 > 0.0 && rates.nu2 > 0.0 &&
                rates.sigma1 > 0.0 && rates.sigma2 > 0.0,
            "product_class_rn: all propagation rates must be positive");

    int min_n = 3;
    bool left_is_h = false, right_is_h = false;
    switch (pcase) {
        case RnProductCase::FdF:
        case RnProductCase::FdG:
        case RnProductCase::GdF:
        case RnProductCase::GdG:
            min_n = 3;
            break;
        case RnProductCase::FdH:
            min_n = 5;
            right_is_h = true;
            break;
        case RnProductCase::HdF:
            min_n = 5;
            left_is_h = true;
            break;
        case RnProductCase::GdH:
            min_n = 7;
            right_is_h = true;
            break;
        case RnProductCase::HdG:
            min_n = 7;
            left_is_h = true;
            break;
        case RnProductCase::HdH:
            min_n = 9;
            left_is_h = right_is_h = true;
            break;
    }
    if (n < min_n) {
        std::ostringstream msg;
        msg << "product_class_rn(" << to_string(pcase) << "): requires n >= " << min_n
            << " (got n = " << n << ")";
        throw std::invalid_argument(msg.str());
    }
    check_rn_factor(left_is_h, f1, "left", pcase, n);
    check_rn_factor(right_is_h, f2, "right", pcase, n);

    double c_out = 0.0;
    if (left_is_h && right_is_h) {
        if (f1.c != f2.c) {
            throw std::invalid_argument(
                "product_class_rn(h.dh): the case table assumes one shared temporal "
                "exponent; supply H factors with equal c");
        }
        c_out = f1.c;
    } else if (left_is_h) {
        c_out = f1.c;
    } else if (right_is_h) {
        c_out = f2.c;
    } else {
        require(c_out_hint > 1.0 && 2.0 * c_out_hint <= static_cast<double>(n),
                "product_class_rn: all-G cases need c_out_hint with 1 < c <= n/2");
        c_out = c_out_hint;
    }

    const double b1 = f1.b, b2 = f2.b;
    const double rr = f1.r * f1.r + f2.r * f2.r;
    const double b_sum = b1 + b2;
    const double numerator = std::pow(1.0 + rr / std::sqrt(2.0 * b_sum), static_cast<double>(n)) *
                             std::exp(static_cast<double>(n) * rr * rr / (4.0 * b_sum)) *
                             f1.d * f2.d;

    const double half_n = 0.5 * static_cast<double>(n);
    const double pi_pow = std::pow(2.0 * M_PI, half_n); // 2^{n/2} π^{n/2}
    const double r2sq = f2.r * f2.r;

    // Case-table denominators, transcribed term for term. Two source quirks
    // are preserved rather than harmonized: the f.df exponent on the min{}
    // factor is c (not n/2), and the polynomial (n/2 − j) prefactors vanish
    // for small gated dimensions; the guard below rejects those evaluations.
    double denominator = 0.0;
    switch (pcase) {
        case RnProductCase::FdF:
            denominator = pi_pow * std::pow(std::min(b_sum, rates.kappa1 + rates.kappa2), c_out) * r2sq;
            break;
        case RnProductCase::FdG:
            denominator = (c_out - 1.0) * pi_pow * std::pow(std::min(b_sum, rates.kappa1), half_n) * r2sq;
            break;
        case RnProductCase::GdF:
            denominator = (c_out - 1.0) * pi_pow * std::pow(std::min(b_sum, rates.kappa2), half_n) * r2sq;
            break;
        case RnProductCase::GdG:
            denominator = pi_pow * rates.nu1 * rates.nu2 * (half_n - 1.0) * (half_n - 2.0) *
                          std::pow(b_sum, half_n - 2.0) * r2sq;
            break;
        case RnProductCase::FdH:
            denominator = pi_pow * rates.nu2 * rates.sigma2 * (half_n - 1.0) * (half_n - 2.0) *
                          std::pow(b_sum, half_n - 2.0) * r2sq;
            break;
        case RnProductCase::HdF:
            denominator = pi_pow * rates.nu1 * rates.sigma1 * (half_n - 1.0) * (half_n - 2.0) *
                          std::pow(b_sum, half_n - 2.0) * r2sq;
            break;
        case RnProductCase::GdH:
            denominator = pi_pow * rates.nu1 * rates.nu2 * rates.sigma2 * (half_n - 1.0) *
                          (half_n - 2.0) * (half_n - 3.0) * std::pow(b_sum, half_n - 3.0) * r2sq;
            break;
        case RnProductCase::HdG:
            denominator = pi_pow * rates.sigma1 * rates.nu1 * rates.nu2 * (half_n - 1.0) *
                          (half_n - 2.0) * (half_n - 3.0) * std::pow(b_sum, half_n - 3.0) * r2sq;
            break;
        case RnProductCase::HdH:
            denominator = pi_pow * rates.nu1 * rates.nu2 * rates.sigma1 * rates.sigma2 *
                          (half_n - 1.0) * (half_n - 2.0) * (half_n - 3.0) * (half_n - 4.0) *
                          std::pow(b_sum, half_n - 4.0) * r2sq;
            break;
    }

    HParams out;
    out.b = b1 * b2 / b_sum;
    out.r = 2.0 * std::max(f1.r, f2.r);
    out.c = c_out;
    out.d = numerator / positive_denominator(denominator, pcase);
    validate(out, n);
    return out;
}

} // namespace modeflow
