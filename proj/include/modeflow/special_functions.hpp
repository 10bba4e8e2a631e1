#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "modeflow/field.hpp"
#include "modeflow/mode.hpp"

namespace modeflow {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Exact factorial / double-factorial values for small arguments.
///
/// Both sequences use the empty-product convention at the bottom:
/// (-1)!! = 1 and 0!! = 1, matching 0! = 1.  Values are held as exact
/// integers; `*_as_double` converts on demand (exact up to 2^53, correctly
/// rounded beyond).
class DoubleFactorialTable {
public:
    static constexpr int kMaxArgument = 128;

    DoubleFactorialTable();

    /// k! for 0 <= k <= kMaxArgument.
    const BigInt& factorial(int k) const;

    /// k!! for -1 <= k <= kMaxArgument.
    const BigInt& double_factorial(int k) const;

    double factorial_as_double(int k) const;
    double double_factorial_as_double(int k) const;

private:
    std::vector<BigInt> factorial_;        // index k
    std::vector<BigInt> double_factorial_; // index k + 1
};

/// Shared immutable table instance.
const DoubleFactorialTable& factorial_table();

/// k! as a double, for 0 <= k <= 128.
double factorial_double(int k);

/// k!! as a double, for -1 <= k <= 128.
double double_factorial_double(int k);

/// Exact value of the radial Gaussian moment  integral_0^inf r^(2k) e^(-b r^2) dr
///   = (2k-1)!! sqrt(pi) / (2^(k+1) b^(k+1/2)).
double gaussian_moment_even(int k, double b);

/// Exact value of  integral_0^inf r^(2k+1) e^(-b r^2) dr
///   = (2k)!! / (2^(k+1) b^(k+1)).
double gaussian_moment_odd(int k, double b);

struct GaussianMomentResult {
    double exact; ///< product of one-dimensional closed forms over the axes
    double bound; ///< (alpha - theta)!! pi^(n/2) / (2b)^((|alpha|+n)/2)
};

/// First-orthant mixed moment
///   integral_{[0,inf)^n} omega^alpha e^(-b |omega|^2) d omega
/// together with the factored upper bound it is dominated by.  The exact
/// value never exceeds the bound (each axis loses a factor of 2^(-1/2) or
/// 1/sqrt(pi) relative to its bound term).  Integrals of |omega^alpha| over
/// all of R^n are 2^n times this value.
GaussianMomentResult gaussian_moment_multi(const Mode& alpha, double b);

struct Lemma33Result {
    Rational value; ///< the exact combinatorial ratio L
    bool holds;     ///< L <= 1
};

/// Exact evaluation of the factorial ratio
///   L = beta! (gamma+e_k)! [2(beta-a1)]! [2(gamma+e_k-a2)]!
///       / ( 2^|beta+gamma+e_k-a1-a2| (beta-a1)! (gamma+e_k-a2)! (2beta)! (2gamma)! )
/// for multi-indices a1 <= beta, a2 <= gamma+e_k; `axis` is 1-based.
/// All factorials are taken componentwise.
Lemma33Result lemma33_check(const Mode& a1,
                            const Mode& a2,
                            const Mode& beta,
                            const Mode& gamma,
                            int axis);

/// Surface area of the unit sphere in R^n:  S_n = pi^(n/2) n / Gamma(n/2 + 1).
double sphere_area(int n);

/// Right-hand side of the bilinear estimate
///   I(u dρ/dx_k) <= l_k/(2 pi kappa) [Ibar(phi)+I(h)] [Ibar(eta)+I(g)],
/// where u solves the nu-heat equation from (phi, h) and rho the kappa-heat
/// equation from (eta, g).  `phi`/`eta` are spatial scalar fields, `h`/`g`
/// time-sampled scalar fields on the same geometry; `axis` is 1-based.
double lemma35_bound(const Field& phi,
                     const Field& eta,
                     const Field& h,
                     const Field& g,
                     int axis,
                     double kappa,
                     const TorusGeometry& geometry);

} // namespace modeflow
