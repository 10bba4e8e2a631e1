#include "modeflow/special_functions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "modeflow/field_ops.hpp"

namespace modeflow {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

/// Componentwise factorial product  prod_k (m_k)!  as an exact integer.
BigInt multi_factorial(const Mode& m, const DoubleFactorialTable& table) {
    BigInt out = 1;
    for (int k = 0; k < m.dim(); ++k) {
        require(m[k] >= 0, "multi-index factorial requires nonnegative entries");
        out *= table.factorial(m[k]);
    }
    return out;
}

Mode component_difference(const Mode& a, const Mode& b, const char* label) {
    require(a.dim() == b.dim(), "multi-index dimensions disagree");
    std::vector<std::int32_t> entries(static_cast<std::size_t>(a.dim()));
    for (int k = 0; k < a.dim(); ++k) {
        const int d = a[k] - b[k];
        if (d < 0) {
            std::ostringstream msg;
            msg << "lemma33_check: " << label << " must be dominated componentwise (axis "
                << (k + 1) << ": " << b[k] << " > " << a[k] << ")";
            throw std::invalid_argument(msg.str());
        }
        entries[static_cast<std::size_t>(k)] = d;
    }
    return Mode(entries);
}

Mode doubled(const Mode& m) {
    std::vector<std::int32_t> entries(static_cast<std::size_t>(m.dim()));
    for (int k = 0; k < m.dim(); ++k) {
        entries[static_cast<std::size_t>(k)] = 2 * m[k];
    }
    return Mode(entries);
}

} // namespace

DoubleFactorialTable::DoubleFactorialTable() {
    factorial_.resize(kMaxArgument + 1);
    factorial_[0] = 1;
    for (int k = 1; k <= kMaxArgument; ++k) {
        factorial_[static_cast<std::size_t>(k)] =
            factorial_[static_cast<std::size_t>(k - 1)] * k;
    }
    // Index shift: double_factorial_[k + 1] holds k!!, with (-1)!! = 0!! = 1.
    double_factorial_.resize(kMaxArgument + 2);
    double_factorial_[0] = 1;
    double_factorial_[1] = 1;
    for (int k = 1; k <= kMaxArgument; ++k) {
        double_factorial_[static_cast<std::size_t>(k + 1)] =
            double_factorial_[static_cast<std::size_t>(k - 1)] * k;
    }
}

const BigInt& DoubleFactorialTable::factorial(int k) const {
    if (k < 0 || k > kMaxArgument) {
        std::ostringstream msg;
        msg << "factorial argument " << k << " outside [0, " << kMaxArgument << "]";
        throw std::invalid_argument(msg.str());
    }
    return factorial_[static_cast<std::size_t>(k)];
}

const BigInt& DoubleFactorialTable::double_factorial(int k) const {
    if (k < -1 || k > kMaxArgument) {
        std::ostringstream msg;
        msg << "double factorial argument " << k << " outside [-1, " << kMaxArgument << "]";
        throw std::invalid_argument(msg.str());
    }
    return double_factorial_[static_cast<std::size_t>(k + 1)];
}

double DoubleFactorialTable::factorial_as_double(int k) const {
    return factorial(k).convert_to<double>();
}

double DoubleFactorialTable::double_factorial_as_double(int k) const {
    return double_factorial(k).convert_to<double>();
}

const DoubleFactorialTable& factorial_table() {
    static const DoubleFactorialTable table;
    return table;
}

double factorial_double(int k) {
    return factorial_table().factorial_as_double(k);
}

double double_factorial_double(int k) {
    return factorial_table().double_factorial_as_double(k);
}

double gaussian_moment_even(int k, double b) {
    require(k >= 0, "gaussian_moment_even requires k >= 0");
    require(b > 0.0, "gaussian_moment_even requires b > 0");
    const double num = double_factorial_double(2 * k - 1) * std::sqrt(M_PI);
    return num / (std::pow(2.0, k + 1) * std::pow(b, k + 0.5));
}

double gaussian_moment_odd(int k, double b) {
    require(k >= 0, "gaussian_moment_odd requires k >= 0");
    require(b > 0.0, "gaussian_moment_odd requires b > 0");
    const double num = double_factorial_double(2 * k);
    return num / (std::pow(2.0, k + 1) * std::pow(b, k + 1));
}

GaussianMomentResult gaussian_moment_multi(const Mode& alpha, double b) {
    require(b > 0.0, "gaussian_moment_multi requires b > 0");
    const int n = alpha.dim();
    double exact = 1.0;
    double odd_bound_product = 1.0;
    for (int k = 0; k < n; ++k) {
        const int a = alpha[k];
        require(a >= 0, "gaussian_moment_multi requires a nonnegative multi-index");
        if (a % 2 == 0) {
            exact *= gaussian_moment_even(a / 2, b);
        } else {
            exact *= gaussian_moment_odd((a - 1) / 2, b);
        }
        odd_bound_product *= double_factorial_double(a - 1);
    }
    const double bound = odd_bound_product * std::pow(M_PI, 0.5 * n) /
                         std::pow(2.0 * b, 0.5 * (alpha.order() + n));
    return GaussianMomentResult{exact, bound};
}

Lemma33Result lemma33_check(const Mode& a1,
                            const Mode& a2,
                            const Mode& beta,
                            const Mode& gamma,
                            int axis) {
    const int n = beta.dim();
    require(gamma.dim() == n && a1.dim() == n && a2.dim() == n,
            "lemma33_check: all multi-indices must share one dimension");
    require(axis >= 1 && axis <= n, "lemma33_check: axis out of range");
    for (int k = 0; k < n; ++k) {
        require(beta[k] >= 0 && gamma[k] >= 0 && a1[k] >= 0 && a2[k] >= 0,
                "lemma33_check: multi-indices must be nonnegative");
    }

    const Mode gamma_k = gamma + Mode::unit(n, axis);
    const Mode beta_rem = component_difference(beta, a1, "alpha1 <= beta");
    const Mode gamma_rem = component_difference(gamma_k, a2, "alpha2 <= gamma + e_k");

    const DoubleFactorialTable& table = factorial_table();
    BigInt numerator = multi_factorial(beta, table);
    numerator *= multi_factorial(gamma_k, table);
    numerator *= multi_factorial(doubled(beta_rem), table);
    numerator *= multi_factorial(doubled(gamma_rem), table);

    BigInt denominator = BigInt(1) << (beta_rem.order() + gamma_rem.order());
    denominator *= multi_factorial(beta_rem, table);
    denominator *= multi_factorial(gamma_rem, table);
    denominator *= multi_factorial(doubled(beta), table);
    denominator *= multi_factorial(doubled(gamma), table);

    Lemma33Result result;
    result.value = Rational(numerator, denominator);
    result.holds = result.value <= 1;
    return result;
}

double sphere_area(int n) {
    require(n >= 1, "sphere_area requires n >= 1");
    return std::pow(M_PI, 0.5 * n) * n / std::tgamma(0.5 * n + 1.0);
}

double lemma35_bound(const Field& phi,
                     const Field& eta,
                     const Field& h,
                     const Field& g,
                     int axis,
                     double kappa,
                     const TorusGeometry& geometry) {
    require(kappa > 0.0, "lemma35_bound requires kappa > 0");
    require(axis >= 1 && axis <= geometry.n(), "lemma35_bound: axis out of range");
    require(phi.is_spatial() && eta.is_spatial(),
            "lemma35_bound: initial data must be spatial fields");
    require(h.is_time_sampled() && g.is_time_sampled(),
            "lemma35_bound: forcings must be time-sampled fields");

    const double lk = geometry.period(axis);
    const double velocity_mass = norm_Ibar(phi) + norm_I(h);
    const double density_mass = norm_Ibar(eta) + norm_I(g);
    return lk / (2.0 * M_PI * kappa) * velocity_mass * density_mass;
}

} // namespace modeflow
