#include "gradostat/growth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace gradostat {

const char* to_string(GrowthKind k)
{
    switch (k) {
    case GrowthKind::Monod: return "monod";
    case GrowthKind::Contois: return "contois";
    case GrowthKind::MonodConstantBiomass: return "monod_constant_biomass";
    }
    return "unknown";
}

void GrowthParams::validate(int tanks) const
{
    if (!(mu_max > 0.0) || !(k > 0.0) || !(y > 0.0))
        throw Error(ErrorCode::BadInput, "growth parameters must be positive");
    if (kind == GrowthKind::MonodConstantBiomass) {
        if (tanks >= 0 && x_c.size() != tanks)
            throw Error(ErrorCode::DimensionMismatch, "constant biomass vector has wrong length");
        if (x_c.size() > 0 && x_c.minCoeff() < 0.0)
            throw Error(ErrorCode::BadInput, "constant biomass must be nonnegative");
    }
}

double GrowthParams::biomass(int i, double x) const
{
    if (kind == GrowthKind::MonodConstantBiomass)
        return x_c[i];
    return x;
}

double kinetics(const GrowthParams& g, double s, double x)
{
    if (g.kind == GrowthKind::Contois) {
        double den = g.k * x + s;
        return den > 0.0 ? g.mu_max * s * x / den : 0.0;
    }
    return g.mu_max * s * x / (g.k + s);
}

double dr_ds(const GrowthParams& g, double s, double x)
{
    if (g.kind == GrowthKind::Contois) {
        double den = g.k * x + s;
        return den > 0.0 ? g.mu_max * g.k * x * x / (den * den) : 0.0;
    }
    return g.mu_max * g.k * x / ((g.k + s) * (g.k + s));
}

double dr_dx(const GrowthParams& g, double s, double x)
{
    switch (g.kind) {
    case GrowthKind::Contois: {
        double den = g.k * x + s;
        return den > 0.0 ? g.mu_max * s * s / (den * den) : 0.0;
    }
    case GrowthKind::Monod: return g.mu_max * s / (g.k + s);
    case GrowthKind::MonodConstantBiomass: return 0.0;
    }
    return 0.0;
}

double growth_margin(const GrowthParams& g, double s, double x)
{
    return dr_ds(g, s, x) / g.y - dr_dx(g, s, x);
}

void BoundsBox::check() const
{
    const int n = size();
    if (s_hi.size() != n || x_lo.size() != n || x_hi.size() != n || t_lo.size() != n ||
        t_hi.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "bounds box vectors differ in length");
    for (int i = 0; i < n; ++i) {
        if (s_lo[i] > s_hi[i] || x_lo[i] > x_hi[i] || t_lo[i] > t_hi[i] || s_lo[i] < 0.0 ||
            x_lo[i] < 0.0 || t_lo[i] < 0.0)
            throw Error(ErrorCode::InvalidBounds, fmt::format("empty bounds box at tank {}", i + 1));
    }
}

BoundsBox state_bounds(const GrowthParams& g, const Eigen::VectorXd& s_in_hi,
                        const Eigen::VectorXd& x_in_lo, const Eigen::VectorXd& x_in_hi)
{
    const int n = static_cast<int>(s_in_hi.size());
    if (x_in_lo.size() != n || x_in_hi.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "inflow vectors differ in length");
    BoundsBox b;
    double shi = n ? s_in_hi.maxCoeff() : 0.0;
    double xlo = n ? x_in_lo.minCoeff() : 0.0;
    double xhi = n ? (x_in_hi + g.y * s_in_hi).maxCoeff() : 0.0;
    b.s_lo = Eigen::VectorXd::Zero(n);
    b.s_hi = Eigen::VectorXd::Constant(n, shi);
    b.x_lo = Eigen::VectorXd::Constant(n, xlo);
    b.x_hi = Eigen::VectorXd::Constant(n, xhi);
    b.t_lo.resize(n);
    b.t_hi.resize(n);
    // kinetics increase in s and x, so corners give the extremes
    for (int i = 0; i < n; ++i) {
        b.t_lo[i] = kinetics(g, b.s_lo[i], g.biomass(i, b.x_lo[i]));
        b.t_hi[i] = kinetics(g, b.s_hi[i], g.biomass(i, b.x_hi[i]));
    }
    return b;
}

BoundsBox state_bounds(const GrowthParams& g, const Eigen::VectorXd& s_in,
                        const Eigen::VectorXd& x_in)
{
    return state_bounds(g, s_in, x_in, x_in);
}

TankVars tank_vars(int tank, int period)
{
    std::string tag = period < 0 ? fmt::format("{}", tank + 1)
                                 : fmt::format("{},{}", tank + 1, period);
    return {"S[" + tag + "]", "X[" + tag + "]", "T[" + tag + "]", tag, tank};
}

ConeBlock encode_contois_soc(const TankVars& v, const GrowthParams& g)
{
    if (g.kind != GrowthKind::Contois)
        throw Error(ErrorCode::WrongKind, "Contois encoding needs Contois kinetics");
    ConeBlock c;
    c.ensure_variable(v.s);
    c.ensure_variable(v.x);
    c.ensure_variable(v.t);
    AffineExpr st = g.mu_max * c.v(v.s);
    AffineExpr tt = g.k * c.v(v.t);
    AffineExpr bx = g.mu_max * g.k * c.v(v.x);
    c.add_soc(bx + st - tt, {st, tt, bx}, "growth[" + v.tag + "]", "growth");
    c.add_linear(st - tt, Sense::Ge, 0.0, "growth_sign[" + v.tag + "]", "growth_sign");
    return c;
}

ConeBlock encode_monod_constx_soc(const TankVars& v, const GrowthParams& g)
{
    if (g.kind != GrowthKind::MonodConstantBiomass)
        throw Error(ErrorCode::WrongKind, "constant-biomass encoding needs constant biomass");
    double xc = g.x_c[v.tank];
    ConeBlock c;
    c.ensure_variable(v.s);
    c.ensure_variable(v.t);
    if (xc <= 0.0) {
        // no biomass, no growth; the cone would have an empty interior
        c.add_linear(c.v(v.t), Sense::Le, 0.0, "growth[" + v.tag + "]", "growth");
        return c;
    }
    AffineExpr st = g.mu_max * xc * c.v(v.s);
    AffineExpr tt = g.k * c.v(v.t);
    double bx = g.mu_max * g.k * xc;
    c.add_soc(AffineExpr(bx) + st - tt, {st, tt, AffineExpr(bx)}, "growth[" + v.tag + "]",
              "growth");
    c.add_linear(st - tt, Sense::Ge, 0.0, "growth_sign[" + v.tag + "]", "growth_sign");
    return c;
}

ConeBlock encode_monod_envelope(const TankVars& v, const GrowthParams& g, const BoundsBox& b)
{
    if (g.kind != GrowthKind::Monod)
        throw Error(ErrorCode::WrongKind, "envelope encoding needs Monod kinetics");
    b.check();
    const int i = v.tank;
    const double sl = b.s_lo[i], sh = b.s_hi[i], tl = b.t_lo[i], th = b.t_hi[i];
    ConeBlock c;
    c.ensure_variable(v.s, sl, sh);
    c.ensure_variable(v.x, b.x_lo[i], b.x_hi[i]);
    c.ensure_variable(v.t, tl, th);
    const std::string beta = "beta[" + v.tag + "]";
    const std::string gam = "gamma[" + v.tag + "]";
    const std::string psi = "psi[" + v.tag + "]";
    c.add_variable(beta, 0.0, kInf);
    AffineExpr S = c.v(v.s), X = c.v(v.x), T = c.v(v.t), B = c.v(beta);
    // mu X = T + K beta, beta standing in for T / S
    c.add_linear(g.mu_max * X - T - g.k * B, Sense::Eq, 0.0, "envelope_eq[" + v.tag + "]",
                 "envelope_eq");

    if (th - tl <= 1e-12 * (1.0 + th)) {
        c.add_linear(T, Sense::Eq, th, "envelope_pin[" + v.tag + "]", "envelope");
        c.add_linear(B, Sense::Eq, sh > 0.0 && th > 0.0 ? th / sh : 0.0,
                     "envelope_beta[" + v.tag + "]", "envelope");
        return c;
    }

    c.add_variable(gam, 0.0, kInf);
    c.add_variable(psi, 0.0, kInf);
    AffineExpr G = c.v(gam), P = c.v(psi);
    // concave overestimator of T/S, multiplied through by S_lo S_hi
    c.add_linear(sl * sh * B, Sense::Le, sh * T - tl * S + AffineExpr(sl * tl),
                 "envelope_over1[" + v.tag + "]", "envelope");
    c.add_linear(sl * sh * B, Sense::Le, sl * T - th * S + AffineExpr(sh * th),
                 "envelope_over2[" + v.tag + "]", "envelope");

    // convex underestimator through the split T = lam T_lo + (1 - lam) T_hi
    AffineExpr lam = (1.0 / (th - tl)) * (AffineExpr(th) - T);
    AffineExpr one_m = AffineExpr(1.0) - lam;
    if (tl > 0.0)
        c.add_rotated_soc(G, P, {std::sqrt(2.0 * tl) * lam}, "envelope_cone1[" + v.tag + "]",
                          "envelope_cone");
    c.add_rotated_soc(B - G, S - P, {std::sqrt(2.0 * th) * one_m},
                      "envelope_cone2[" + v.tag + "]", "envelope_cone");
    c.add_linear(P, Sense::Ge, sl * lam, "envelope_psi1[" + v.tag + "]", "envelope");
    c.add_linear(P, Sense::Ge, S - sh * one_m, "envelope_psi2[" + v.tag + "]", "envelope");
    c.add_linear(P, Sense::Le, sh * lam, "envelope_psi3[" + v.tag + "]", "envelope");
    c.add_linear(P, Sense::Le, S - sl * one_m, "envelope_psi4[" + v.tag + "]", "envelope");
    c.add_linear(B - G, Sense::Ge, 0.0, "envelope_split[" + v.tag + "]", "envelope");
    return c;
}

ConeBlock underestimator_contois(const TankVars& v, const GrowthParams& g, const BoundsBox& b)
{
    if (g.kind != GrowthKind::Contois)
        throw Error(ErrorCode::WrongKind, "Contois underestimator needs Contois kinetics");
    b.check();
    const int i = v.tank;
    const double sl = b.s_lo[i], sh = b.s_hi[i], xl = b.x_lo[i], xh = b.x_hi[i];
    ConeBlock c;
    c.ensure_variable(v.s);
    c.ensure_variable(v.x);
    c.ensure_variable(v.t);
    double t0 = kinetics(g, sl, xl);
    if (sh - sl > 1e-12 * (1.0 + sh)) {
        double slope = (kinetics(g, sh, xl) - t0) / (sh - sl);
        c.add_linear(c.v(v.t), Sense::Ge, AffineExpr(t0) + slope * (c.v(v.s) - AffineExpr(sl)),
                     "under_s[" + v.tag + "]", "underestimator");
    }
    if (xh - xl > 1e-12 * (1.0 + xh)) {
        double slope = (kinetics(g, sl, xh) - t0) / (xh - xl);
        c.add_linear(c.v(v.t), Sense::Ge, AffineExpr(t0) + slope * (c.v(v.x) - AffineExpr(xl)),
                     "under_x[" + v.tag + "]", "underestimator");
    }
    return c;
}

ConeBlock underestimator_monod_constx(const TankVars& v, const GrowthParams& g,
                                      const BoundsBox& b)
{
    if (g.kind != GrowthKind::MonodConstantBiomass)
        throw Error(ErrorCode::WrongKind, "underestimator needs constant-biomass kinetics");
    b.check();
    const int i = v.tank;
    const double sl = b.s_lo[i], sh = b.s_hi[i];
    const double xc = g.x_c[i];
    ConeBlock c;
    c.ensure_variable(v.s);
    c.ensure_variable(v.t);
    if (sh - sl > 1e-12 * (1.0 + sh)) {
        double t0 = kinetics(g, sl, xc);
        double slope = (kinetics(g, sh, xc) - t0) / (sh - sl);
        c.add_linear(c.v(v.t), Sense::Ge, AffineExpr(t0) + slope * (c.v(v.s) - AffineExpr(sl)),
                     "under_s[" + v.tag + "]", "underestimator");
    }
    return c;
}

} // namespace gradostat
