#ifndef MODEFLOW_DECAY_CLASSES_HPP
#define MODEFLOW_DECAY_CLASSES_HPP

#include <string>
#include <vector>

#include "modeflow/field.hpp"

namespace modeflow {

/// Spatial torus class J(r, d): |â(θ)| ≤ d·r^{|θ|} / Π_k |θ_k|!.
struct JParams {
    double r = 1.0;
    double d = 1.0;
};

/// Time-dependent torus class K(b, r, d): |â(t, θ)| ≤ d·r^{|θ|} e^{−bt} / Π_k |θ_k|!.
struct KParams {
    double b = 1.0;
    double r = 1.0;
    double d = 1.0;
};

/// Whole-space spatial class G(b, r, d): |a(β)| ≤ d·r^{|β|} / (2β)! with Gaussian
/// envelope rate b.
struct GParams {
    double b = 1.0;
    double r = 1.0;
    double d = 1.0;
};

/// Whole-space time-decaying class H(b, r, c, d): |a(t, β)| ≤ d·r^{|β|} / ((2β)!(1+t)^c),
/// with 1 < c ≤ n/2 in ambient dimension n.
struct HParams {
    double b = 1.0;
    double r = 1.0;
    double c = 1.5;
    double d = 1.0;
};

void validate(const JParams& p);
void validate(const KParams& p);
void validate(const GParams& p);
/// @param n ambient dimension (enforces 1 < c ≤ n/2).
void validate(const HParams& p, int n);

/// Membership verdict for a concrete truncated field against a decay class.
/// The margin is the worst ratio |coefficient| / bound over the stored support
/// (and sampled times); membership holds iff margin ≤ 1. An empty field has
/// margin 0. The check certifies the truncated representation only.
struct MembershipResult {
    bool member = true;
    double margin = 0.0;
    Mode worst_mode;        // argmax mode (meaningful when margin > 0)
    std::size_t worst_sample = 0;
};

/// K-membership of a time-sampled field at the given sample indices
/// (empty index list = every grid sample).
/// @throws std::invalid_argument on spatial input or invalid params.
MembershipResult check_membership_K(const Field& field, const KParams& params,
                                    const std::vector<std::size_t>& sample_indices = {});

/// J-membership of a spatial field.
/// @throws std::invalid_argument on time-sampled input or invalid params.
MembershipResult check_membership_J(const Field& field, const JParams& params);

/// Class updates under ∂/∂x_k (1-based axis):
///   J(r, d)    → J(2r, πd/l_k)
///   K(b, r, d) → K(b, 2r, πd/l_k)
///   G(b, r, d) → G(b, 2r, d/r²)
///   H(b,r,c,d) → H(b, 2r, c, d/r²)
JParams derivative_class(const JParams& p, int axis, const TorusGeometry& geometry);
KParams derivative_class(const KParams& p, int axis, const TorusGeometry& geometry);
GParams derivative_class(const GParams& p);
HParams derivative_class(const HParams& p, int n);

/// The four torus product cases of the closure lemma. The first letter names
/// the left factor, the second the differentiated right factor:
///   p = heat-propagated J-class data  u_j = e^{κ_jΔt} ζ_j,
///   q = Duhamel-propagated K-class forcing  w_j = ∫_0^t e^{ν_jΔ(t−s)} ξ_j ds.
enum class TorusProductCase { PdP, PdQ, QdP, QdQ };

std::string to_string(TorusProductCase c);

/// K parameters of u_1·∂u_2/∂x_k (or the q-variants) on the torus.
///
/// `rate2` is the propagation rate of the differentiated factor: κ_2 for the
/// ·∂p cases, ν_2 for the ·∂q cases. For J left factors pass JParams (b is
/// ignored); for K factors the b field supplies b_1 / b_2 where the formulas
/// need them. All four cases share r_out = 2(r_1 + r_2) and the combinatorial
/// amplitude factor π(1 + e^{2r_1+2r_2})^n / l_k:
///   p∂p: K[4π²κ₂/l_k²,            2(r₁+r₂), (π(1+e^{2r₁+2r₂})^n/l_k)·d₁d₂]
///   p∂q: K[min{b₂/2, 2π²ν₂/l_k²}, 2(r₁+r₂), (…)·d₁d₂/(e·min{b₂/2, 2π²ν₂/l_k²})]
///   q∂p: K[4π²κ₂/l_k²,            2(r₁+r₂), (…)·d₁d₂/b₁]
///   q∂q: K[min{b₂/2, 2π²ν₂/l_k²}, 2(r₁+r₂), (…)·d₁d₂/(b₁·e·min{b₂/2, 2π²ν₂/l_k²})]
///
/// @throws std::invalid_argument on family/case mismatch or nonpositive rate.
struct TorusFactor {
    bool is_k = false; // false: J-class seed (p); true: K-class forcing (q)
    double b = 0.0;    // temporal rate (K factors only)
    double r = 1.0;
    double d = 1.0;

    static TorusFactor from(const JParams& p) { return TorusFactor{false, 0.0, p.r, p.d}; }
    static TorusFactor from(const KParams& p) { return TorusFactor{true, p.b, p.r, p.d}; }
};

KParams product_class_torus(TorusProductCase pcase, const TorusFactor& f1, const TorusFactor& f2,
                            int axis, const TorusGeometry& geometry, double rate2);

/// The nine whole-space product cases. Letters name the factor families as in
/// the closure lemma: f, g are heat flow / Duhamel terms of G-class data and
/// h is the Duhamel term of H-class forcing.
enum class RnProductCase { FdF, FdG, GdF, GdG, FdH, HdF, GdH, HdG, HdH };

std::string to_string(RnProductCase c);

/// Rates entering the whole-space case table: propagation rates κ_j (left
/// factor family f) and ν_j (g/h families), plus the σ_j rates of the h-family
/// Duhamel integrals.
struct RnRates {
    double kappa1 = 1.0, kappa2 = 1.0;
    double nu1 = 1.0, nu2 = 1.0;
    double sigma1 = 1.0, sigma2 = 1.0;
};

/// Whole-space closure: H parameters of the product, transcribed verbatim from
/// the case table (formula evaluation only; see decay_classes.cpp for the case
/// anchors and the two flagged source inconsistencies).
///
/// Dimension gates: n ≥ 3 (f∂f, f∂g, g∂f, g∂g), n ≥ 5 (f∂h, h∂f),
/// n ≥ 7 (g∂h, h∂g), n ≥ 9 (h∂h).
///
/// @param params1,params2 G params for f/g factors, H params for h factors
///        (pass the matching family; c is read from the H factor, and for the
///        all-G cases `c` must be supplied explicitly via `c_out_hint` > 1).
/// @throws std::invalid_argument on gate violations or nonpositive rates.
struct RnFactor {
    bool is_h = false;
    double b = 1.0;
    double r = 1.0;
    double d = 1.0;
    double c = 0.0; // H factors only

    static RnFactor from(const GParams& p) { return RnFactor{false, p.b, p.r, p.d, 0.0}; }
    static RnFactor from(const HParams& p) { return RnFactor{true, p.b, p.r, p.d, p.c}; }
};

HParams product_class_rn(RnProductCase pcase, const RnFactor& f1, const RnFactor& f2,
                         const RnRates& rates, int n, double c_out_hint = 0.0);

} // namespace modeflow

#endif // MODEFLOW_DECAY_CLASSES_HPP
