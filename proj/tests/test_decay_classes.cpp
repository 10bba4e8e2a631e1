#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "modeflow/decay_classes.hpp"
#include "modeflow/field_ops.hpp"

using namespace modeflow;

namespace {

/// Deterministic uniform draw on [0, 1) (explicit mapping, not the
/// implementation-defined std distribution).
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// All modes of the cubic box |θ_k| <= radius in dimension n.
std::vector<Mode> box_modes(int n, int radius) {
    std::vector<Mode> out;
    std::vector<std::int32_t> v(static_cast<std::size_t>(n), static_cast<std::int32_t>(-radius));
    while (true) {
        out.emplace_back(std::vector<std::int32_t>(v));
        int i = 0;
        while (i < n && v[static_cast<std::size_t>(i)] == radius) {
            v[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(-radius);
            ++i;
        }
        if (i == n) break;
        ++v[static_cast<std::size_t>(i)];
    }
    return out;
}

double factorial_mass_ref(const Mode& m) {
    double out = 1.0;
    for (int k = 0; k < m.dim(); ++k) {
        for (int j = 2; j <= std::abs(m[k]); ++j) out *= j;
    }
    return out;
}

} // namespace

TEST_CASE("class parameter validation") {
    CHECK_THROWS_AS(validate(JParams{0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(JParams{1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(KParams{0.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(GParams{1.0, 0.0, 1.0}), std::invalid_argument);
    CHECK_NOTHROW(validate(HParams{1.0, 1.0, 1.5, 1.0}, 3));
    CHECK_THROWS_AS(validate(HParams{1.0, 1.0, 1.0, 1.0}, 3), std::invalid_argument);  // c must be > 1
    CHECK_THROWS_AS(validate(HParams{1.0, 1.0, 1.6, 1.0}, 3), std::invalid_argument);  // c must be <= n/2
}

TEST_CASE("K-membership margins: zero, saturated, and violating fields") {
    const TorusGeometry geom(2, {1.0, 1.0});
    const ModeBox box = ModeBox::cube(2, 3);
    const TimeGrid grid = TimeGrid::uniform(2.0, 8);
    const KParams params{0.7, 1.3, 0.9};

    Field zero(geom, grid, box);
    MembershipResult r = check_membership_K(zero, params);
    CHECK(r.member);
    CHECK(r.margin == 0.0);

    // Saturated bound at θ = 0: margin exactly 1.
    Field sat(geom, grid, box);
    Trajectory t(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        t[i] = Complex(params.d * std::exp(-params.b * grid[i]), 0.0);
    sat.set(Mode::zero(2), t);
    r = check_membership_K(sat, params);
    CHECK(r.member);
    CHECK(r.margin == doctest::Approx(1.0).epsilon(1e-14));

    // Factor-2 violation on e_1.
    Field bad(geom, grid, box);
    for (std::size_t i = 0; i < grid.size(); ++i)
        t[i] = Complex(2.0 * params.d * params.r * std::exp(-params.b * grid[i]), 0.0);
    bad.set(Mode::unit(2, 1), t);
    r = check_membership_K(bad, params);
    CHECK_FALSE(r.member);
    CHECK(r.margin == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.worst_mode == Mode::unit(2, 1));

    Field spatial(geom, box);
    CHECK_THROWS_AS(check_membership_K(spatial, params), std::invalid_argument);
    CHECK_THROWS_AS(check_membership_K(zero, params, {grid.size()}), std::invalid_argument);
}

TEST_CASE("J-membership margins: saturated, quarter-radius, empty") {
    const TorusGeometry geom(1, {1.0});
    const ModeBox box = ModeBox::cube(1, 4);
    const double d = 0.7, r0 = 0.5;

    Field f(geom, box);
    f.set(Mode::unit(1, 1), Complex(d * r0, 0.0));
    MembershipResult r = check_membership_J(f, JParams{r0, d});
    CHECK(r.member);
    CHECK(r.margin == doctest::Approx(1.0).epsilon(1e-14));

    // φ̂(2e_1) = d·r² against params with r halved: margin |a|·2!/(d·(r/2)²) = 8.
    Field g(geom, box);
    g.set(Mode::unit(1, 1, 2), Complex(d * r0 * r0, 0.0));
    r = check_membership_J(g, JParams{0.5 * r0, d});
    CHECK_FALSE(r.member);
    CHECK(r.margin == doctest::Approx(8.0).epsilon(1e-13));

    Field empty(geom, box);
    r = check_membership_J(empty, JParams{r0, d});
    CHECK(r.member);
    CHECK(r.margin == 0.0);

    const TimeGrid grid = TimeGrid::uniform(1.0, 2);
    Field sampled(geom, grid, box);
    CHECK_THROWS_AS(check_membership_J(sampled, JParams{r0, d}), std::invalid_argument);
}

TEST_CASE("membership uses the factorial weight per axis") {
    const TorusGeometry geom(2, {1.0, 1.0});
    const ModeBox box = ModeBox::cube(2, 4);
    Field f(geom, box);
    const Mode m{{3, 2}};
    f.set(m, Complex(0.25, 0.0));
    const JParams params{1.0, 1.0};
    const MembershipResult r = check_membership_J(f, params);
    // margin = 0.25 · 3!·2! / 1 = 3.
    CHECK(r.margin == doctest::Approx(0.25 * factorial_mass_ref(m)).epsilon(1e-14));
    CHECK_FALSE(r.member);
}

TEST_CASE("derivative class updates") {
    const TorusGeometry geom(3, {1.0, 2.0, 4.0});

    const JParams j = derivative_class(JParams{0.5, 3.0}, 2, geom);
    CHECK(j.r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(j.d == doctest::Approx(M_PI * 3.0 / 2.0).epsilon(1e-15));

    const KParams k = derivative_class(KParams{0.9, 0.5, 3.0}, 3, geom);
    CHECK(k.b == 0.9);
    CHECK(k.r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(k.d == doctest::Approx(M_PI * 3.0 / 4.0).epsilon(1e-15));

    const GParams g = derivative_class(GParams{0.9, 0.5, 3.0});
    CHECK(g.b == 0.9);
    CHECK(g.r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.d == doctest::Approx(12.0).epsilon(1e-15));

    const HParams h = derivative_class(HParams{0.9, 0.5, 2.5, 3.0}, 5);
    CHECK(h.b == 0.9);
    CHECK(h.c == 2.5);
    CHECK(h.r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(h.d == doctest::Approx(12.0).epsilon(1e-15));

    CHECK_THROWS_AS(derivative_class(JParams{0.5, 3.0}, 4, geom), std::invalid_argument);
}

TEST_CASE("derivative membership is consistent with the derivative class") {
    // Fields drawn inside J(r, d) have derivatives inside J(2r, πd/l_k):
    // the coefficient ratio is 2|θ_k|/2^{|θ|} ≤ 1.
    const TorusGeometry geom(2, {1.0, 2.0});
    const ModeBox box = ModeBox::cube(2, 3);
    const JParams params{0.8, 1.7};
    std::mt19937_64 rng(20260817u);

    for (int trial = 0; trial < 25; ++trial) {
        Field f(geom, box);
        for (const Mode& m : box_modes(2, 3)) {
            const double bound = params.d * std::pow(params.r, static_cast<double>(m.order())) /
                                 factorial_mass_ref(m);
            const double mag = bound * (0.3 + 0.7 * uniform01(rng));
            const double phase = 2.0 * M_PI * uniform01(rng);
            f.set(m, std::polar(mag, phase));
        }
        REQUIRE(check_membership_J(f, params).member);
        for (int axis = 1; axis <= 2; ++axis) {
            const Field df = partial_derivative(f, axis);
            const MembershipResult r = check_membership_J(df, derivative_class(params, axis, geom));
            CHECK(r.member);
        }
    }
}

TEST_CASE("torus product classes: independently retyped case table") {
    const TorusGeometry geom(2, {1.0, 2.0});
    const int axis = 2;
    const double lk = 2.0;
    const double r1 = 0.3, r2 = 0.4, d1 = 2.0, d2 = 3.0;
    const double b1 = 1.1, b2 = 0.9;
    const double rate2 = 0.8;

    const double amp = M_PI * std::pow(1.0 + std::exp(2.0 * (r1 + r2)), 2.0) * d1 * d2 / lk;
    const double heat = 4.0 * M_PI * M_PI * rate2 / (lk * lk);
    const double duh = std::min(b2 / 2.0, 2.0 * M_PI * M_PI * rate2 / (lk * lk));

    const TorusFactor p1 = TorusFactor::from(JParams{r1, d1});
    const TorusFactor p2 = TorusFactor::from(JParams{r2, d2});
    const TorusFactor q1 = TorusFactor::from(KParams{b1, r1, d1});
    const TorusFactor q2 = TorusFactor::from(KParams{b2, r2, d2});

    KParams out = product_class_torus(TorusProductCase::PdP, p1, p2, axis, geom, rate2);
    CHECK(out.b == doctest::Approx(heat).epsilon(1e-14));
    CHECK(out.r == doctest::Approx(2.0 * (r1 + r2)).epsilon(1e-14));
    CHECK(out.d == doctest::Approx(amp).epsilon(1e-13));

    out = product_class_torus(TorusProductCase::QdP, q1, p2, axis, geom, rate2);
    CHECK(out.b == doctest::Approx(heat).epsilon(1e-14));
    CHECK(out.d == doctest::Approx(amp / b1).epsilon(1e-13));

    out = product_class_torus(TorusProductCase::PdQ, p1, q2, axis, geom, rate2);
    CHECK(out.b == doctest::Approx(duh).epsilon(1e-14));
    CHECK(out.d == doctest::Approx(amp / (M_E * duh)).epsilon(1e-13));

    out = product_class_torus(TorusProductCase::QdQ, q1, q2, axis, geom, rate2);
    CHECK(out.b == doctest::Approx(duh).epsilon(1e-14));
    CHECK(out.d == doctest::Approx(amp / (b1 * M_E * duh)).epsilon(1e-13));

    // Family/case mismatches are rejected.
    CHECK_THROWS_AS(product_class_torus(TorusProductCase::PdP, q1, p2, axis, geom, rate2),
                    std::invalid_argument);
    CHECK_THROWS_AS(product_class_torus(TorusProductCase::QdQ, q1, p2, axis, geom, rate2),
                    std::invalid_argument);
    CHECK_THROWS_AS(product_class_torus(TorusProductCase::PdP, p1, p2, 3, geom, rate2),
                    std::invalid_argument);
    CHECK_THROWS_AS(product_class_torus(TorusProductCase::PdP, p1, p2, axis, geom, 0.0),
                    std::invalid_argument);
}

TEST_CASE("whole-space product classes: shared structure and gates") {
    const RnRates rates{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    const RnFactor g1 = RnFactor::from(GParams{1.0, 1.0, 1.0});
    const RnFactor g2 = RnFactor::from(GParams{1.0, 1.0, 1.0});
    const RnFactor h1 = RnFactor::from(HParams{1.0, 1.0, 4.5, 1.0});
    const RnFactor h2 = RnFactor::from(HParams{1.0, 1.0, 4.5, 1.0});

    SUBCASE("h.dh at n = 9 with unit inputs") {
        const HParams out = product_class_rn(RnProductCase::HdH, h1, h2, rates, 9);
        CHECK(out.b == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(out.r == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(out.c == doctest::Approx(4.5).epsilon(1e-15));
        // Retyped: numerator 2^9 e^{4.5}; denominator 2^{4.5}π^{4.5}·(3.5·2.5·1.5·0.5)·2^{0.5}.
        const double expected = std::pow(2.0, 9) * std::exp(4.5) /
                                (std::pow(2.0 * M_PI, 4.5) * 3.5 * 2.5 * 1.5 * 0.5 *
                                 std::pow(2.0, 0.5));
        CHECK(out.d == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("f.df uses the flagged min{}^c denominator") {
        const HParams out = product_class_rn(RnProductCase::FdF, g1, g2, rates, 9, 2.5);
        CHECK(out.c == 2.5);
        const double expected = std::pow(2.0, 9) * std::exp(4.5) /
                                (std::pow(2.0 * M_PI, 4.5) * std::pow(2.0, 2.5));
        CHECK(out.d == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("f.dg and g.df differ only in which kappa enters the min{}") {
        const RnRates skew{0.4, 7.0, 1.0, 1.0, 1.0, 1.0};
        const HParams fg = product_class_rn(RnProductCase::FdG, g1, g2, skew, 9, 2.5);
        const HParams gf = product_class_rn(RnProductCase::GdF, g1, g2, skew, 9, 2.5);
        // min{b1+b2, κ1} = 0.4 vs min{b1+b2, κ2} = 2.
        CHECK(fg.d / gf.d == doctest::Approx(std::pow(2.0 / 0.4, 4.5)).epsilon(1e-12));
    }

    SUBCASE("g.dg at n = 10") {
        const HParams out = product_class_rn(RnProductCase::GdG, g1, g2, rates, 10, 2.5);
        const double expected = std::pow(1.0 + 2.0 / 2.0, 10) * std::exp(10.0 * 4.0 / 8.0) /
                                (std::pow(2.0 * M_PI, 5.0) * 4.0 * 3.0 * std::pow(2.0, 3.0));
        CHECK(out.d == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("dimension gates") {
        CHECK_THROWS_AS(product_class_rn(RnProductCase::FdF, g1, g2, rates, 2, 1.2),
                        std::invalid_argument);
        CHECK_THROWS_AS(product_class_rn(RnProductCase::FdH, g1, h2, rates, 4),
                        std::invalid_argument);
        CHECK_THROWS_AS(product_class_rn(RnProductCase::GdH, g1, h2, rates, 6),
                        std::invalid_argument);
        CHECK_THROWS_AS(product_class_rn(RnProductCase::HdH, h1, h2, rates, 8),
                        std::invalid_argument);
    }

    SUBCASE("g.dg formula factors vanish below n = 5 and are rejected") {
        CHECK_THROWS_AS(product_class_rn(RnProductCase::GdG, g1, g2, rates, 4, 1.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(product_class_rn(RnProductCase::GdG, g1, g2, rates, 3, 1.2),
                        std::invalid_argument);
        CHECK_NOTHROW(product_class_rn(RnProductCase::GdG, g1, g2, rates, 5, 1.5));
    }

    SUBCASE("family mismatches and missing c hints are rejected") {
        CHECK_THROWS_AS(product_class_rn(RnProductCase::HdH, g1, h2, rates, 9),
                        std::invalid_argument);
        CHECK_THROWS_AS(product_class_rn(RnProductCase::FdF, g1, h2, rates, 9, 2.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(product_class_rn(RnProductCase::FdF, g1, g2, rates, 9),
                        std::invalid_argument);
        const RnFactor h_other = RnFactor::from(HParams{1.0, 1.0, 3.5, 1.0});
        CHECK_THROWS_AS(product_class_rn(RnProductCase::HdH, h1, h_other, rates, 9),
                        std::invalid_argument);
    }

    SUBCASE("case names") {
        CHECK(to_string(TorusProductCase::PdQ) == "p.dq");
        CHECK(to_string(RnProductCase::HdG) == "h.dg");
    }
}

TEST_CASE("whole-space amplitude is monotone in the input amplitudes") {
    const RnRates rates{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    const RnFactor a = RnFactor::from(GParams{1.0, 1.0, 1.0});
    const RnFactor b = RnFactor::from(GParams{1.0, 1.0, 2.0});
    const HParams small = product_class_rn(RnProductCase::GdG, a, a, rates, 9, 2.0);
    const HParams big = product_class_rn(RnProductCase::GdG, a, b, rates, 9, 2.0);
    CHECK(big.d == doctest::Approx(2.0 * small.d).epsilon(1e-14));
}
