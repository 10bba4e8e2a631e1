#include "doctest.h"

#include "modeflow/theorem_constants.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "modeflow/special_functions.hpp"

using namespace modeflow;

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo * std::pow(hi / lo, uniform01(rng));
}

bool close_rel(double a, double b, double eps) {
    return std::abs(a - b) <= eps * std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Independent second transcription of the constant displays, written with
/// shared subexpressions and different groupings so a copying mistake in the
/// library would not be reproduced here.
Theorem41Constants reference_constants(double C, double D, const DataConstants& d,
                                       const PhysicsParams& ph, int n) {
    const double nn = n;
    const double nu = ph.nu;
    const double ka = ph.kappa;
    const double B = ph.B;
    const double Sn = sphere_area(n);

    const double P = D + d.D_f0 + nn * B * d.D_eta0; // sup bundle of Q_k
    const double Q = C + d.C_f0 + nn * B * d.C_eta0; // integral bundle of Q_k
    const double G = D + d.D_g0;
    const double H = C + d.C_g0;

    const auto mj = [&](double c_phi, int j) {
        return c_phi + (nn + 1) * P * Sn / (nu * (nn - 2 + j))
               + nn * (nn + 1) * B * G * Sn / (ka * nu * (nn - 4 + j))
               + nn * (nn + 1) * (Q + B * H / ka) / nu;
    };

    Theorem41Constants t;
    t.M0 = mj(d.C_phi0, 0);
    t.M1 = mj(d.C_phi1, 1);
    t.Mprime = d.C_eta1 + G * Sn / (ka * (nn - 1)) + H / ka;
    t.M = nn * t.M0 * std::max(t.M1, t.Mprime) / std::pow(2.0 * M_PI, nn);

    t.N1 = d.D_eta1
               * (d.C_phi0 + (nn + 1) * P * Sn / (nu * (nn - 2)) + (nn + 1) * Q / nu
                  + nn * (nn + 1) * B * (G * Sn / (nn - 4) + H) / (nu * ka))
           + d.C_phi0 * (G * Sn / (nn - 1) + H) / ka
           + (nn + 1) / (ka * nu) * std::cbrt(P * (G * Sn / (nn - 3) + H))
                 * std::cbrt(std::pow((P * Sn / (nn - 3) + Q) * G, 2))
           + nn * (nn + 1) * B * G * (G * Sn / (nn - 5) + H) / (ka * ka * nu);

    const double Ff = P * Sn / (nn - 5) + Q;
    const double Gg = G * Sn / (nn - 5) + H;
    t.N2 = d.D_phi1 * d.C_phi0
           + (nn + 1) * d.D_phi0
                 * (P * Sn / (nu * (nn - 1)) + Q / nu + nn * B * (G * Sn / (nn - 3) + H) / (nu * ka))
           + (nn + 1) * d.D_phi1
                 * (P * Sn / (nu * (nn - 2)) + Q / nu + nn * B * (G * Sn / (nn - 4) + H) / (nu * ka))
           + nn * (nn + 1) * (nn + 1) * B / (nu * nu * ka)
                 * (std::pow(P, 0.6) * std::pow(G, 0.4) * std::pow(Ff, 0.4) * std::pow(Gg, 0.6)
                    + std::pow(P, 0.8) * std::pow(G, 0.2) * std::pow(Ff, 0.2)
                          * std::pow(Gg, 0.8))
           + std::pow(nn * (nn + 1) * B / (nu * ka), 2) * G * (G * Sn / (nn - 7) + H)
           + std::pow((nn + 1) / nu, 2) * (P * Sn / (nn - 3) + Q) * P;

    t.N = nn * std::max(t.N1, t.N2) / std::pow(2.0 * M_PI, nn);
    return t;
}

DataConstants uniform_constants(double value) {
    DataConstants d;
    d.C_phi0 = d.C_phi1 = d.C_eta0 = d.C_eta1 = d.C_f0 = d.C_g0 = value;
    d.D_phi0 = d.D_phi1 = d.D_eta0 = d.D_eta1 = d.D_f0 = d.D_g0 = value;
    return d;
}

DataConstants random_constants(std::mt19937_64& rng, double scale) {
    DataConstants d;
    d.C_phi0 = scale * uniform01(rng);
    d.C_phi1 = scale * uniform01(rng);
    d.C_eta0 = scale * uniform01(rng);
    d.C_eta1 = scale * uniform01(rng);
    d.C_f0 = scale * uniform01(rng);
    d.C_g0 = scale * uniform01(rng);
    d.D_phi0 = scale * uniform01(rng);
    d.D_phi1 = scale * uniform01(rng);
    d.D_eta0 = scale * uniform01(rng);
    d.D_eta1 = scale * uniform01(rng);
    d.D_f0 = scale * uniform01(rng);
    d.D_g0 = scale * uniform01(rng);
    return d;
}

} // namespace

TEST_CASE("expansion bounds: closed-form singles") {
    GaussianExpansion e;
    e.b = 1.0;
    e.n = 1;
    e.terms[Mode::zero(1)] = 1.0;

    ConstantBounds b0 = data_constants(e, 0);
    CHECK(b0.D == 1.0);
    CHECK(b0.C == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-15));

    // With the |ω| weight: sup |ω|e^{−ω²} = (2e)^{−1/2}, ∫|ω|e^{−ω²} = 1.
    ConstantBounds b1 = data_constants(e, 1);
    CHECK(b1.D == doctest::Approx(1.0 / std::sqrt(2.0 * M_E)).epsilon(1e-15));
    CHECK(b1.C == doctest::Approx(1.0).epsilon(1e-15));

    GaussianExpansion empty;
    empty.n = 3;
    ConstantBounds be = data_constants(empty, 0);
    CHECK(be.C == 0.0);
    CHECK(be.D == 0.0);

    // A pure monomial term in one dimension: sup ω²e^{−2ω²} = (1/(2e))
    // at ω² = 1/2, and ∫ ω²e^{−2ω²} dω = 2·(1!!√π / (2²·2^{3/2})).
    GaussianExpansion mono;
    mono.b = 2.0;
    mono.n = 1;
    mono.terms[Mode({2})] = 3.0;
    ConstantBounds bm = data_constants(mono, 0);
    CHECK(bm.D == doctest::Approx(3.0 / (2.0 * M_E)).epsilon(1e-15));
    CHECK(bm.C == doctest::Approx(3.0 * 2.0 * gaussian_moment_even(1, 2.0)).epsilon(1e-15));

    CHECK_THROWS_AS(data_constants(e, 2), std::invalid_argument);
    GaussianExpansion bad = e;
    bad.b = 0.0;
    CHECK_THROWS_AS(data_constants(bad, 0), std::invalid_argument);
    GaussianExpansion negative = e;
    negative.terms[Mode({1})] = -0.5;
    CHECK_THROWS_AS(data_constants(negative, 0), std::invalid_argument);
    GaussianExpansion signed_index = e;
    signed_index.terms[Mode({-1})] = 0.5;
    CHECK_THROWS_AS(data_constants(signed_index, 0), std::invalid_argument);
}

TEST_CASE("expansion bounds dominate grid quadrature and grid maxima") {
    std::mt19937_64 rng(46116);
    for (int trial = 0; trial < 10; ++trial) {
        GaussianExpansion e;
        e.n = 1 + static_cast<int>(rng() % 3);
        e.b = 0.5 + 1.5 * uniform01(rng);
        const int terms = 1 + static_cast<int>(rng() % 3);
        for (int t = 0; t < terms; ++t) {
            std::vector<std::int32_t> beta(static_cast<std::size_t>(e.n));
            for (auto& x : beta) {
                x = static_cast<std::int32_t>(rng() % 3);
            }
            e.terms[Mode(beta)] = 0.1 + uniform01(rng);
        }
        const int j = static_cast<int>(rng() % 2);
        const ConstantBounds bounds = data_constants(e, j);

        const double L = 6.0 / std::sqrt(e.b);
        const int half = 60;
        const double h = L / half;
        const auto integrand = [&](const std::vector<double>& w) {
            double radius2 = 0.0;
            for (double x : w) {
                radius2 += x * x;
            }
            double sum = 0.0;
            for (const auto& [beta, a] : e.terms) {
                double term = a;
                for (std::size_t k = 0; k < w.size(); ++k) {
                    for (std::int32_t p = 0; p < beta.entries()[k]; ++p) {
                        term *= std::abs(w[k]);
                    }
                }
                sum += term;
            }
            return sum * (j == 1 ? std::sqrt(radius2) : 1.0) * std::exp(-e.b * radius2);
        };

        // Midpoint rule over [−L, L]^n plus the running grid maximum.
        double quad = 0.0;
        double grid_max = 0.0;
        std::vector<double> w(static_cast<std::size_t>(e.n));
        std::vector<int> index(static_cast<std::size_t>(e.n), -half);
        const int total_axis = 2 * half;
        bool done = false;
        while (!done) {
            for (std::size_t k = 0; k < w.size(); ++k) {
                w[k] = (index[k] + 0.5) * h;
            }
            const double value = integrand(w);
            quad += value;
            grid_max = std::max(grid_max, value);
            std::size_t axis = 0;
            while (axis < index.size()) {
                if (++index[axis] < half) {
                    break;
                }
                index[axis] = -half;
                ++axis;
            }
            done = axis == index.size();
            (void)total_axis;
        }
        quad *= std::pow(h, e.n);

        CHECK(bounds.C >= quad * (1.0 - 5e-3));
        CHECK(bounds.D >= grid_max * (1.0 - 1e-12));
        // Not vacuous: the integral bound is exact for j = 0 and within the
        // Σ|ω_k| ≥ |ω| slack for j = 1.
        const double slack = j == 0 ? 1.02 : 1.02 * std::sqrt(static_cast<double>(e.n));
        CHECK(quad * slack >= bounds.C);
    }

    // Single-term sup bounds are attained (up to grid resolution).
    std::mt19937_64 rng2(5150);
    for (int trial = 0; trial < 10; ++trial) {
        GaussianExpansion e;
        e.n = 1 + static_cast<int>(rng2() % 2);
        e.b = 0.5 + uniform01(rng2);
        std::vector<std::int32_t> beta(static_cast<std::size_t>(e.n));
        for (auto& x : beta) {
            x = static_cast<std::int32_t>(rng2() % 4);
        }
        e.terms[Mode(beta)] = 1.0;
        const int j = static_cast<int>(rng2() % 2);
        const ConstantBounds bounds = data_constants(e, j);

        double grid_max = 0.0;
        const double L = 4.0 / std::sqrt(e.b);
        const int steps = 400;
        std::vector<double> w(static_cast<std::size_t>(e.n), 0.0);
        if (e.n == 1) {
            for (int i = 0; i <= steps; ++i) {
                w[0] = -L + 2.0 * L * i / steps;
                double v = std::exp(-e.b * w[0] * w[0]);
                for (std::int32_t p = 0; p < beta[0]; ++p) v *= std::abs(w[0]);
                if (j == 1) v *= std::abs(w[0]);
                grid_max = std::max(grid_max, v);
            }
        } else {
            for (int i = 0; i <= steps; ++i) {
                for (int k = 0; k <= steps; ++k) {
                    w[0] = -L + 2.0 * L * i / steps;
                    w[1] = -L + 2.0 * L * k / steps;
                    double v = std::exp(-e.b * (w[0] * w[0] + w[1] * w[1]));
                    for (std::int32_t p = 0; p < beta[0]; ++p) v *= std::abs(w[0]);
                    for (std::int32_t p = 0; p < beta[1]; ++p) v *= std::abs(w[1]);
                    if (j == 1) v *= std::hypot(w[0], w[1]);
                    grid_max = std::max(grid_max, v);
                }
            }
        }
        CHECK(bounds.D >= grid_max * (1.0 - 1e-12));
        CHECK(grid_max >= bounds.D * 0.995);
    }
}

TEST_CASE("class consistency of expansions") {
    GParams params{1.0, 0.5, 2.0};
    GaussianExpansion e;
    e.b = 1.0;
    e.n = 2;
    // Exactly on the envelope: |a_β| = d·r^{|β|}/(2β)!.
    e.terms[Mode({0, 0})] = 2.0;
    e.terms[Mode({1, 0})] = 2.0 * 0.5 / 2.0;
    e.terms[Mode({1, 2})] = 2.0 * std::pow(0.5, 3) / (2.0 * 24.0);
    CHECK(class_consistent(e, params));

    GaussianExpansion over = e;
    over.terms[Mode({1, 0})] *= 1.0 + 1e-9;
    CHECK(!class_consistent(over, params));

    GaussianExpansion under = e;
    under.terms[Mode({1, 2})] *= 0.5;
    CHECK(class_consistent(under, params));
}

TEST_CASE("constant displays: gates, zero limit, and frozen evaluation") {
    PhysicsParams unit = make_physics_params(1.0, 1.0, {{1.0}});
    DataConstants zero;

    CHECK_THROWS_AS(theorem41_constants(0.1, 0.1, zero, unit, 8), std::invalid_argument);
    CHECK_THROWS_AS(theorem41_constants(0.0, 0.1, zero, unit, 9), std::invalid_argument);
    CHECK_THROWS_AS(theorem41_constants(0.1, -1.0, zero, unit, 9), std::invalid_argument);
    DataConstants bad;
    bad.C_f0 = -0.25;
    CHECK_THROWS_AS(theorem41_constants(0.1, 0.1, bad, unit, 9), std::invalid_argument);

    // Zero data and no coupling: M and N are homogeneous of degree 2 in
    // (C, D), so they vanish in the small-radius limit.
    PhysicsParams uncoupled = make_physics_params(1.0, 1.0);
    Theorem41Constants small = theorem41_constants(1e-6, 1e-6, zero, uncoupled, 9);
    Theorem41Constants twice = theorem41_constants(2e-6, 2e-6, zero, uncoupled, 9);
    CHECK(twice.M == doctest::Approx(4.0 * small.M).epsilon(1e-12));
    CHECK(twice.N == doctest::Approx(4.0 * small.N).epsilon(1e-12));
    CHECK(small.M < 1e-8);
    CHECK(small.N < 1e-8);

    // Frozen full evaluation, pinned by two independent transcriptions.
    DataConstants centi = uniform_constants(0.01);
    Theorem41Constants t = theorem41_constants(0.1, 0.1, centi, unit, 9);
    CHECK(t.M0 == doctest::Approx(95.171308682417575).epsilon(1e-12));
    CHECK(t.M1 == doctest::Approx(84.314502236831885).epsilon(1e-12));
    CHECK(t.Mprime == doctest::Approx(0.52819047671391495).epsilon(1e-12));
    CHECK(t.M == doctest::Approx(0.0047318614064647668).epsilon(1e-12));
    CHECK(t.N1 == doctest::Approx(11.276574368430605).epsilon(1e-12));
    CHECK(t.N2 == doctest::Approx(1911.5638137680364).epsilon(1e-12));
    CHECK(t.N == doctest::Approx(0.001127229886687308).epsilon(1e-12));
}

TEST_CASE("double-entry transcription agreement on a random sweep") {
    std::mt19937_64 rng(90210);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 9 + trial % 4;
        const double C = log_uniform(rng, 1e-4, 1e3);
        const double D = log_uniform(rng, 1e-4, 1e3);
        DataConstants d = random_constants(rng, 2.0);
        PhysicsParams ph = make_physics_params(log_uniform(rng, 0.1, 10.0),
                                               log_uniform(rng, 0.1, 10.0),
                                               {{3.0 * uniform01(rng)}});

        const Theorem41Constants got = theorem41_constants(C, D, d, ph, n);
        const Theorem41Constants want = reference_constants(C, D, d, ph, n);
        CHECK(close_rel(got.M0, want.M0, 1e-12));
        CHECK(close_rel(got.M1, want.M1, 1e-12));
        CHECK(close_rel(got.Mprime, want.Mprime, 1e-12));
        CHECK(close_rel(got.M, want.M, 1e-12));
        CHECK(close_rel(got.N1, want.N1, 1e-12));
        CHECK(close_rel(got.N2, want.N2, 1e-12));
        CHECK(close_rel(got.N, want.N, 1e-12));
    }
}

TEST_CASE("constants grow with D and move continuously in (C, D)") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 9 + trial % 4;
        const double C = log_uniform(rng, 1e-3, 1e2);
        const double D = log_uniform(rng, 1e-3, 1e2);
        DataConstants d = random_constants(rng, 1.0);
        PhysicsParams ph = make_physics_params(log_uniform(rng, 0.2, 5.0),
                                               log_uniform(rng, 0.2, 5.0),
                                               {{2.0 * uniform01(rng)}});

        const Theorem41Constants base = theorem41_constants(C, D, d, ph, n);
        const Theorem41Constants more_d = theorem41_constants(C, 2.0 * D, d, ph, n);
        const Theorem41Constants more_c = theorem41_constants(2.0 * C, D, d, ph, n);
        CHECK(more_d.M >= base.M);
        CHECK(more_d.N >= base.N);
        CHECK(more_c.M >= base.M);
        CHECK(more_c.N >= base.N);

        const Theorem41Constants nudged =
            theorem41_constants(C * (1.0 + 1e-9), D * (1.0 + 1e-9), d, ph, n);
        CHECK(close_rel(nudged.M, base.M, 1e-6));
        CHECK(close_rel(nudged.N, base.N, 1e-6));
    }
}

TEST_CASE("feasibility search finds the small-data corner and rejects huge data") {
    PhysicsParams uncoupled = make_physics_params(1.0, 1.0);
    DataConstants zero;

    FeasibilityResult r = feasibility_search(zero, uncoupled, 9);
    CHECK(r.found);
    CHECK(r.margin > 1.0);
    CHECK(r.violation < 1.0);
    // Definitional re-evaluation: the witness satisfies both inequalities.
    Theorem41Constants at = theorem41_constants(r.C, r.D, zero, uncoupled, 9);
    CHECK(at.M < r.C);
    CHECK(at.N < r.D);
    // Quadratic smallness drives the sweep into the low corner.
    CHECK(r.C == doctest::Approx(1e-8).epsilon(1e-12));
    CHECK(r.D == doctest::Approx(1e-8).epsilon(1e-12));

    FeasibilityResult again = feasibility_search(zero, uncoupled, 9);
    CHECK(again.C == r.C);
    CHECK(again.D == r.D);
    CHECK(again.violation == r.violation);

    DataConstants huge = uniform_constants(1e6);
    FeasibilityResult empty =
        feasibility_search(huge, make_physics_params(1.0, 1.0, {{1.0}}), 9);
    CHECK(!empty.found);
    CHECK(empty.violation > 1.0);

    CHECK_THROWS_AS(feasibility_search(zero, uncoupled, 8), std::invalid_argument);
    FeasibilitySweep degenerate;
    degenerate.lo = 1.0;
    degenerate.hi = 0.5;
    CHECK_THROWS_AS(feasibility_search(zero, uncoupled, 9, degenerate),
                    std::invalid_argument);
    FeasibilitySweep sparse;
    sparse.points_per_decade = 0;
    CHECK_THROWS_AS(feasibility_search(zero, uncoupled, 9, sparse), std::invalid_argument);

    // A coarser grid still finds the corner witness, deterministically.
    FeasibilitySweep coarse;
    coarse.points_per_decade = 5;
    coarse.bisection_steps = 8;
    FeasibilityResult rc = feasibility_search(zero, uncoupled, 9, coarse);
    CHECK(rc.found);
    CHECK(rc.margin > 1.0);
}

TEST_CASE("velocity-only conditions on R^n") {
    DataConstants zero;
    NsConditionCheck small = ns_rn_condition(1e-4, 1e-4, zero, 1.0, 5);
    CHECK(small.first_holds);
    CHECK(small.second_holds);
    CHECK(small.first_margin > 1.0);
    CHECK(small.second_margin > 1.0);

    // Zero data collapses the displays to closed forms.
    const double Sn = sphere_area(5);
    const double C = 1e-4;
    const double D = 1e-4;
    const double lhs1 = (D * Sn / 2.0 + C) * D;
    const double lhs2 = (D * Sn / 3.0 + C) * (D * Sn / 4.0 + C);
    CHECK(small.first_margin ==
          doctest::Approx(std::pow(2.0 * M_PI, 5) * D / 5.0 / lhs1).epsilon(1e-13));
    CHECK(small.second_margin ==
          doctest::Approx(std::pow(2.0 * M_PI, 5) * C / 5.0 / lhs2).epsilon(1e-13));

    CHECK_THROWS_AS(ns_rn_condition(0.0, 1e-4, zero, 1.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(ns_rn_condition(1e-4, 0.0, zero, 1.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(ns_rn_condition(1e-4, 1e-4, zero, 0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(ns_rn_condition(1e-4, 1e-4, zero, 1.0, 4), std::invalid_argument);

    // Larger viscosity enlarges both margins: every data term in the
    // left-hand sides carries 1/ν or 1/ν².
    DataConstants d = uniform_constants(0.01);
    NsConditionCheck base = ns_rn_condition(1e-3, 1e-3, d, 1.0, 5);
    NsConditionCheck thick = ns_rn_condition(1e-3, 1e-3, d, 10.0, 5);
    CHECK(thick.first_margin > base.first_margin);
    CHECK(thick.second_margin > base.second_margin);

    // Oversized data breaks both inequalities.
    DataConstants big = uniform_constants(1e5);
    NsConditionCheck fails = ns_rn_condition(1.0, 1.0, big, 1.0, 5);
    CHECK(!fails.first_holds);
    CHECK(!fails.second_holds);
    CHECK(fails.first_margin < 1.0);
    CHECK(fails.second_margin < 1.0);
}
