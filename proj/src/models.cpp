#include "gradostat/models.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace gradostat {

const char* to_string(ModelKind k)
{
    switch (k) {
    case ModelKind::RC: return "rc";
    case ModelKind::RMX: return "rmx";
    case ModelKind::RME: return "rme";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& s)
{
    if (s == "rc")
        return ModelKind::RC;
    if (s == "rmx")
        return ModelKind::RMX;
    if (s == "rme")
        return ModelKind::RME;
    throw Error(ErrorCode::BadInput, "unknown model '" + s + "' (expected rc, rmx or rme)");
}

GrowthKind growth_kind_for(ModelKind k)
{
    switch (k) {
    case ModelKind::RC: return GrowthKind::Contois;
    case ModelKind::RMX: return GrowthKind::MonodConstantBiomass;
    case ModelKind::RME: return GrowthKind::Monod;
    }
    return GrowthKind::Contois;
}

GrowthParams growth_for(const GradostatNetwork& net, ModelKind kind)
{
    GrowthParams g = net.growth;
    g.kind = growth_kind_for(kind);
    if (g.kind == GrowthKind::MonodConstantBiomass && g.x_c.size() != net.size())
        g.x_c = net.x_in(); // constant biomass defaults to the inflow concentration
    g.validate(net.size());
    return g;
}

std::vector<int> objective_set(const GradostatNetwork& net, const ModelOptions& opt)
{
    if (opt.objective_tanks.empty()) {
        std::vector<int> all(net.size());
        for (int i = 0; i < net.size(); ++i)
            all[i] = i;
        return all;
    }
    for (int i : opt.objective_tanks)
        if (i < 0 || i >= net.size())
            throw Error(ErrorCode::BadInput, fmt::format("objective tank {} does not exist", i + 1));
    return opt.objective_tanks;
}

std::string pipe_label(const GradostatNetwork& net, int pipe)
{
    const auto& p = net.pipes[pipe];
    std::string base = net.size() <= 9 ? fmt::format("{}{}", p.from + 1, p.to + 1)
                                       : fmt::format("{}-{}", p.from + 1, p.to + 1);
    int dup = 0;
    for (int k = 0; k < pipe; ++k)
        if (net.pipes[k].from == p.from && net.pipes[k].to == p.to)
            ++dup;
    return dup ? fmt::format("{}/{}", base, dup + 1) : base;
}

namespace {

std::string idx(const char* stem, const std::string& tag) { return fmt::format("{}[{}]", stem, tag); }

BoundsBox default_box(const GradostatNetwork& net, const GrowthParams& g, const ModelOptions& opt)
{
    if (opt.box) {
        opt.box->check();
        if (opt.box->size() != net.size())
            throw Error(ErrorCode::DimensionMismatch, "bounds box does not match the network");
        return *opt.box;
    }
    Eigen::VectorXd s_hi = net.s_in(), x_hi = net.x_in();
    Eigen::VectorXd x_lo = opt.inflow_decisions ? Eigen::VectorXd::Zero(net.size()) : x_hi;
    return state_bounds(g, s_hi, x_lo, x_hi);
}

// growth rows for one tank (and period)
void add_growth(ConicProgram& p, ModelKind kind, const TankVars& v, const GrowthParams& g,
                const BoundsBox& box, bool under)
{
    switch (kind) {
    case ModelKind::RC:
        p.absorb(encode_contois_soc(v, g));
        if (under)
            p.absorb(underestimator_contois(v, g, box));
        break;
    case ModelKind::RMX:
        p.absorb(encode_monod_constx_soc(v, g));
        if (under)
            p.absorb(underestimator_monod_constx(v, g, box));
        break;
    case ModelKind::RME:
        p.absorb(encode_monod_envelope(v, g, box));
        break;
    }
}

void declare_state(ConicProgram& p, ModelKind kind, const TankVars& v)
{
    p.ensure_variable(v.s);
    if (kind != ModelKind::RMX)
        p.ensure_variable(v.x);
    p.ensure_variable(v.t);
}

// Z rows with inflow terms supplied as expressions
void washout_rows(ConicProgram& p, const GradostatNetwork& net, const SystemMatrices& m,
                  const GrowthParams& g, double delta, const std::vector<AffineExpr>& feed)
{
    if (!(delta > 0.0))
        throw Error(ErrorCode::BadInput, "washout margin delta must be positive");
    const int n = net.size();
    Eigen::MatrixXd a = m.M + m.L;
    for (int i = 0; i < n; ++i)
        p.ensure_variable(fmt::format("Z[{}]", i + 1), 0.0, kInf);
    for (int i = 0; i < n; ++i) {
        AffineExpr e = m.q_in[i] * feed[i];
        for (int j = 0; j < n; ++j)
            if (a(i, j) != 0.0)
                e += a(i, j) * p.v(fmt::format("Z[{}]", j + 1));
        p.add_linear(e, Sense::Eq, 0.0, fmt::format("washout_mass[{}]", i + 1), "washout_mass");
    }
    for (int i = 0; i < n; ++i) {
        double need = delta + (-a(i, i)) / net.tanks[i].volume;
        std::string tag = fmt::format("{}", i + 1);
        if (g.kind == GrowthKind::Contois) {
            // growth rate at zero biomass is mu_max whatever the substrate
            p.add_linear(AffineExpr(g.mu_max - need), Sense::Ge, 0.0, idx("washout", tag),
                         "washout");
            continue;
        }
        // mu w/(K + w) >= need with w = Z/y, same cone shape as constant biomass 1
        AffineExpr w = (g.mu_max / g.y) * p.v(fmt::format("Z[{}]", i + 1));
        AffineExpr r(g.k * need);
        double c = g.mu_max * g.k;
        p.add_soc(AffineExpr(c) + w - r, {w, r, AffineExpr(c)}, idx("washout", tag), "washout");
        p.add_linear(w - r, Sense::Ge, 0.0, idx("washout_sign", tag), "washout");
    }
}

void objective_rows(ConicProgram& p, const GradostatNetwork& net, const std::vector<int>& tanks,
                    int period, double weight, AffineExpr& obj)
{
    for (int i : tanks)
        obj += (weight * net.tanks[i].volume) * p.v(tank_vars(i, period).t);
}

} // namespace

ConeBlock build_washout_repulsion_rows(const GradostatNetwork& net, const SystemMatrices& m,
                                       const GrowthParams& g, double delta)
{
    ConeBlock c;
    std::vector<AffineExpr> feed;
    for (const auto& t : net.tanks)
        feed.emplace_back(t.x_in + g.y * t.s_in);
    washout_rows(c, net, m, g, delta, feed);
    return c;
}

BuiltModel build_steady(const GradostatNetwork& net, const ModelOptions& opt,
                        const std::vector<double>& activation)
{
    BuiltModel out;
    out.growth = growth_for(net, opt.kind);
    const GrowthParams& g = out.growth;
    SystemMatrices m = assemble_matrices(net, activation);
    out.box = default_box(net, g, opt);
    const int n = net.size();
    const bool has_x = opt.kind != ModelKind::RMX;
    ConicProgram& p = out.program;

    for (int i = 0; i < n; ++i)
        declare_state(p, opt.kind, tank_vars(i));
    std::vector<AffineExpr> sin(n), xin(n);
    for (int i = 0; i < n; ++i) {
        if (opt.inflow_decisions) {
            p.add_variable(fmt::format("Sin[{}]", i + 1), 0.0, net.tanks[i].s_in);
            sin[i] = p.v(fmt::format("Sin[{}]", i + 1));
            if (has_x) {
                p.add_variable(fmt::format("Xin[{}]", i + 1), 0.0, net.tanks[i].x_in);
                xin[i] = p.v(fmt::format("Xin[{}]", i + 1));
            } else {
                xin[i] = AffineExpr(net.tanks[i].x_in);
            }
        } else {
            sin[i] = AffineExpr(net.tanks[i].s_in);
            xin[i] = AffineExpr(net.tanks[i].x_in);
        }
    }

    Eigen::MatrixXd a = m.M + m.L;
    // rows read (M+L)S - (1/y)VT + C s_in = 0 and (M+L)X + VT + C x_in = 0
    for (int i = 0; i < n; ++i) {
        const auto v = tank_vars(i);
        const double V = net.tanks[i].volume;
        AffineExpr e = m.q_in[i] * sin[i];
        for (int j = 0; j < n; ++j)
            if (a(i, j) != 0.0)
                e += a(i, j) * p.v(tank_vars(j).s);
        e -= (V / g.y) * p.v(v.t);
        p.add_linear(e, Sense::Eq, 0.0, idx("substrate", v.tag), "substrate");
    }
    if (has_x) {
        for (int i = 0; i < n; ++i) {
            const auto v = tank_vars(i);
            const double V = net.tanks[i].volume;
            AffineExpr e = m.q_in[i] * xin[i];
            for (int j = 0; j < n; ++j)
                if (a(i, j) != 0.0)
                    e += a(i, j) * p.v(tank_vars(j).x);
            e += V * p.v(v.t);
            p.add_linear(e, Sense::Eq, 0.0, idx("biomass", v.tag), "biomass");
        }
    }
    for (int i = 0; i < n; ++i)
        add_growth(p, opt.kind, tank_vars(i), g, out.box, opt.underestimators);

    const auto& om = opt.omega;
    for (size_t i = 0; i < om.discharge_cap.size() && i < static_cast<size_t>(n); ++i)
        if (std::isfinite(om.discharge_cap[i]))
            p.add_linear(m.q_out[i] * p.v(tank_vars(static_cast<int>(i)).s), Sense::Le,
                         om.discharge_cap[i], idx("discharge", tank_vars(static_cast<int>(i)).tag),
                         "omega");
    if (om.substrate_total) {
        AffineExpr e;
        for (int i = 0; i < n; ++i)
            e += m.q_in[i] * sin[i];
        p.add_linear(e, Sense::Le, *om.substrate_total, "substrate_total", "omega");
    }
    if (om.inflow_total)
        p.add_linear(AffineExpr(m.q_in.sum()), Sense::Le, *om.inflow_total, "inflow_total", "omega");
    if (om.washout_delta) {
        std::vector<AffineExpr> feed(n);
        for (int i = 0; i < n; ++i)
            feed[i] = xin[i] + g.y * sin[i];
        if (!has_x)
            for (int i = 0; i < n; ++i)
                feed[i] = AffineExpr(g.x_c[i]) + g.y * sin[i];
        washout_rows(p, net, m, g, *om.washout_delta, feed);
    }

    AffineExpr obj;
    objective_rows(p, net, objective_set(net, opt), -1, 1.0, obj);
    p.set_objective(obj, true);
    if (!opt.objective_tanks.empty() && static_cast<int>(opt.objective_tanks.size()) < n)
        out.warnings.push_back("objective covers a subset of tanks; exactness is not guaranteed");
    out.mats = m;
    return out;
}

BuiltModel build_design(const GradostatNetwork& net, const ModelOptions& opt)
{
    if (!(opt.gamma > 0.0))
        throw Error(ErrorCode::MissingGamma, "design model needs a positive disjunction constant");
    net.validate();
    BuiltModel out;
    out.growth = growth_for(net, opt.kind);
    const GrowthParams& g = out.growth;
    out.box = default_box(net, g, opt);
    const int n = net.size();
    const bool has_x = opt.kind != ModelKind::RMX;
    const double Gm = opt.gamma;
    ConicProgram& p = out.program;
    for (int i = 0; i < n; ++i) {
        if (!net.tanks[i].q_out)
            throw Error(ErrorCode::BadInput,
                        fmt::format("design needs a fixed outflow at tank {}", i + 1));
        declare_state(p, opt.kind, tank_vars(i));
    }

    const auto cand = net.candidates();
    std::vector<std::string> lam(net.pipes.size());
    for (int k : cand) {
        std::string label = pipe_label(net, k);
        lam[k] = idx("lambda", label);
        p.add_variable(lam[k], 0.0, 1.0, true);
        out.candidate_pipes.push_back(k);
        out.lambda_names.push_back(lam[k]);
    }

    // the box holds at every feasible point, so it may be stated outright
    if (opt.clip_gamma)
        for (int i = 0; i < n; ++i) {
            auto v = tank_vars(i);
            p.ensure_variable(v.s, out.box.s_lo[i], out.box.s_hi[i]);
            if (has_x)
                p.ensure_variable(v.x, out.box.x_lo[i], out.box.x_hi[i]);
        }

    // |E - A| <= (1 - lambda) Gamma, |A| <= lambda Gamma; bound is the largest |E| in the box
    double need = 0.0;
    auto disjunction = [&](const std::string& aux, const AffineExpr& E, const std::string& lname,
                           double bound) {
        need = std::max(need, bound);
        double gm = opt.clip_gamma ? std::min(Gm, bound) : Gm;
        p.add_variable(aux, -kInf, kInf);
        AffineExpr A = p.v(aux), L = p.v(lname);
        std::string tag = aux;
        p.add_linear(E - A + gm * L, Sense::Le, gm, tag + ".1", "disjunction");
        p.add_linear(A - E + gm * L, Sense::Le, gm, tag + ".2", "disjunction");
        p.add_linear(A - gm * L, Sense::Le, 0.0, tag + ".3", "disjunction");
        p.add_linear(-A - gm * L, Sense::Le, 0.0, tag + ".4", "disjunction");
    };
    const BoundsBox& bx = out.box;
    auto spread = [](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int a, int b) {
        return std::max(hi[a] - lo[b], hi[b] - lo[a]);
    };

    std::vector<AffineExpr> sin(n), xin(n);
    for (int i = 0; i < n; ++i) {
        if (opt.inflow_decisions) {
            sin[i] = AffineExpr::of(p.add_variable(fmt::format("Sin[{}]", i + 1), 0.0, net.tanks[i].s_in));
            xin[i] = has_x ? AffineExpr::of(p.add_variable(fmt::format("Xin[{}]", i + 1), 0.0,
                                                           net.tanks[i].x_in))
                           : AffineExpr(net.tanks[i].x_in);
        } else {
            sin[i] = AffineExpr(net.tanks[i].s_in);
            xin[i] = AffineExpr(net.tanks[i].x_in);
        }
    }

    struct Aux {
        std::string fs, fx, gs, gx, hs1, hs2, hx1, hx2;
    };
    std::vector<Aux> aux(net.pipes.size());
    for (int k : cand) {
        const auto& pp = net.pipes[k];
        std::string label = pipe_label(net, k);
        auto S = [&](int i) { return p.v(tank_vars(i).s); };
        auto X = [&](int i) { return p.v(tank_vars(i).x); };
        if (pp.q1 > 0.0) {
            aux[k].fs = idx("FS", label);
            disjunction(aux[k].fs, pp.q1 * S(pp.from), lam[k], pp.q1 * bx.s_hi[pp.from]);
            if (has_x) {
                aux[k].fx = idx("FX", label);
                disjunction(aux[k].fx, pp.q1 * X(pp.from), lam[k], pp.q1 * bx.x_hi[pp.from]);
            }
            if (opt.inflow_decisions) {
                aux[k].hs1 = idx("HS1", label);
                disjunction(aux[k].hs1, pp.q1 * sin[pp.from], lam[k],
                            pp.q1 * net.tanks[pp.from].s_in);
                aux[k].hs2 = idx("HS2", label);
                disjunction(aux[k].hs2, pp.q1 * sin[pp.to], lam[k], pp.q1 * net.tanks[pp.to].s_in);
                if (has_x) {
                    aux[k].hx1 = idx("HX1", label);
                    disjunction(aux[k].hx1, pp.q1 * xin[pp.from], lam[k],
                                pp.q1 * net.tanks[pp.from].x_in);
                    aux[k].hx2 = idx("HX2", label);
                    disjunction(aux[k].hx2, pp.q1 * xin[pp.to], lam[k],
                                pp.q1 * net.tanks[pp.to].x_in);
                }
            }
        }
        if (pp.d1 > 0.0) {
            aux[k].gs = idx("GS", label);
            disjunction(aux[k].gs, pp.d1 * (S(pp.from) - S(pp.to)), lam[k],
                        pp.d1 * spread(bx.s_lo, bx.s_hi, pp.from, pp.to));
            if (has_x) {
                aux[k].gx = idx("GX", label);
                disjunction(aux[k].gx, pp.d1 * (X(pp.from) - X(pp.to)), lam[k],
                            pp.d1 * spread(bx.x_lo, bx.x_hi, pp.from, pp.to));
            }
        }
    }

    if (Gm < need)
        out.warnings.push_back(fmt::format(
            "disjunction constant {} is below the largest bounded product {:.6g}", Gm, need));

    // water balance: q_in(lambda) = q_out + outgoing - incoming >= 0
    std::vector<AffineExpr> qin(n);
    for (int i = 0; i < n; ++i)
        qin[i] = AffineExpr(*net.tanks[i].q_out);
    for (size_t k = 0; k < net.pipes.size(); ++k) {
        const auto& pp = net.pipes[k];
        AffineExpr q(pp.q0);
        if (pp.candidate)
            q += pp.q1 * p.v(lam[k]);
        qin[pp.from] += q;
        qin[pp.to] -= q;
    }
    for (int i = 0; i < n; ++i)
        p.add_linear(qin[i], Sense::Ge, 0.0, idx("inflow", tank_vars(i).tag), "inflow");
    if (opt.omega.inflow_total) {
        AffineExpr e;
        for (int i = 0; i < n; ++i)
            e += qin[i];
        p.add_linear(e, Sense::Le, *opt.omega.inflow_total, "inflow_total", "omega");
    }

    // q_in s_in, either constant times an affine q_in or through the H products
    auto feed = [&](int i, bool substrate) {
        const AffineExpr& c = substrate ? sin[i] : xin[i];
        if (!opt.inflow_decisions || (!substrate && !has_x))
            return c.constant * qin[i];
        AffineExpr e = *net.tanks[i].q_out * c;
        for (size_t k = 0; k < net.pipes.size(); ++k) {
            const auto& pp = net.pipes[k];
            const Aux& ax = aux[k];
            if (pp.from == i) {
                e += pp.q0 * c;
                const std::string& h = substrate ? ax.hs1 : ax.hx1;
                if (!h.empty())
                    e += p.v(h);
            }
            if (pp.to == i) {
                e -= pp.q0 * c;
                const std::string& h = substrate ? ax.hs2 : ax.hx2;
                if (!h.empty())
                    e -= p.v(h);
            }
        }
        return e;
    };

    auto balance = [&](bool substrate) {
        for (int i = 0; i < n; ++i) {
            const auto v = tank_vars(i);
            const double V = net.tanks[i].volume;
            auto var = [&](int j) { return p.v(substrate ? tank_vars(j).s : tank_vars(j).x); };
            AffineExpr e = feed(i, substrate);
            e -= *net.tanks[i].q_out * var(i);
            for (size_t k = 0; k < net.pipes.size(); ++k) {
                const auto& pp = net.pipes[k];
                const Aux& ax = aux[k];
                const std::string& F = substrate ? ax.fs : ax.fx;
                const std::string& G = substrate ? ax.gs : ax.gx;
                if (pp.from == i) {
                    e -= pp.q0 * var(i) + pp.d0 * (var(i) - var(pp.to));
                    if (!F.empty())
                        e -= p.v(F);
                    if (!G.empty())
                        e -= p.v(G);
                }
                if (pp.to == i) {
                    e += pp.q0 * var(pp.from) + pp.d0 * (var(pp.from) - var(i));
                    if (!F.empty())
                        e += p.v(F);
                    if (!G.empty())
                        e += p.v(G);
                }
            }
            if (substrate)
                e -= (V / g.y) * p.v(v.t);
            else
                e += V * p.v(v.t);
            p.add_linear(e, Sense::Eq, 0.0, idx(substrate ? "substrate" : "biomass", v.tag),
                         substrate ? "substrate" : "biomass");
        }
    };
    balance(true);
    if (has_x)
        balance(false);

    // at most one direction per tank pair
    std::map<std::pair<int, int>, std::vector<int>> arcs;
    for (int k : cand)
        arcs[{net.pipes[k].from, net.pipes[k].to}].push_back(k);
    for (const auto& [arc, ks] : arcs) {
        if (arc.first > arc.second && arcs.count({arc.second, arc.first}))
            continue;
        auto rev = arcs.find({arc.second, arc.first});
        if (rev == arcs.end())
            continue;
        AffineExpr e;
        for (int k : ks)
            e += p.v(lam[k]);
        for (int k : rev->second)
            e += p.v(lam[k]);
        p.add_linear(e, Sense::Le, 1.0, fmt::format("one_way[{},{}]", arc.first + 1, arc.second + 1),
                     "one_way");
    }
    if (opt.omega.budget) {
        AffineExpr e;
        for (int k : cand)
            e += net.pipes[k].cost * p.v(lam[k]);
        p.add_linear(e, Sense::Le, *opt.omega.budget, "budget", "omega");
    }
    for (size_t i = 0; i < opt.omega.discharge_cap.size() && i < static_cast<size_t>(n); ++i)
        if (std::isfinite(opt.omega.discharge_cap[i]))
            p.add_linear(*net.tanks[i].q_out * p.v(tank_vars(static_cast<int>(i)).s), Sense::Le,
                         opt.omega.discharge_cap[i],
                         idx("discharge", tank_vars(static_cast<int>(i)).tag), "omega");
    if (opt.omega.substrate_total) {
        AffineExpr e;
        for (int i = 0; i < n; ++i)
            e += feed(i, true);
        p.add_linear(e, Sense::Le, *opt.omega.substrate_total, "substrate_total", "omega");
    }
    if (opt.omega.washout_delta)
        throw Error(ErrorCode::BadInput, "washout rows need a fixed topology");

    for (int i = 0; i < n; ++i)
        add_growth(p, opt.kind, tank_vars(i), g, out.box, opt.underestimators);

    AffineExpr obj;
    objective_rows(p, net, objective_set(net, opt), -1, 1.0, obj);
    p.set_objective(obj, true);
    if (!opt.objective_tanks.empty() && static_cast<int>(opt.objective_tanks.size()) < n)
        out.warnings.push_back("objective covers a subset of tanks; exactness is not guaranteed");
    return out;
}

BuiltModel build_dynamic(const GradostatNetwork& net, const ModelOptions& opt,
                         const DynamicSpec& dyn)
{
    if (dyn.periods < 1 || !(dyn.dt > 0.0))
        throw Error(ErrorCode::BadInput, "dynamic model needs periods >= 1 and a positive step");
    if (!(dyn.alpha > 0.0 && dyn.alpha <= 1.0))
        throw Error(ErrorCode::BadInput, "discount factor must lie in (0, 1]");
    const int n = net.size();
    const int tau = dyn.periods;
    if (static_cast<int>(dyn.s_in.size()) != tau)
        throw Error(ErrorCode::DimensionMismatch, "substrate signal length differs from periods");
    if (!dyn.x_in_decision && static_cast<int>(dyn.x_in.size()) != tau)
        throw Error(ErrorCode::DimensionMismatch, "biomass signal length differs from periods");
    for (int t = 0; t < tau; ++t) {
        if (dyn.s_in[t].size() != n || (!dyn.x_in_decision && dyn.x_in[t].size() != n))
            throw Error(ErrorCode::DimensionMismatch, "signal vector does not match the network");
    }
    if (!dyn.periodic && (dyn.s0.size() != n || (opt.kind != ModelKind::RMX && dyn.x0.size() != n)))
        throw Error(ErrorCode::BadInput, "fixed-initial boundary needs s0 and x0");

    BuiltModel out;
    out.periods = tau;
    out.growth = growth_for(net, opt.kind);
    const GrowthParams& g = out.growth;
    SystemMatrices m = assemble_matrices(net);
    const bool has_x = opt.kind != ModelKind::RMX;
    ConicProgram& p = out.program;

    // box from the extreme signal values over the horizon
    Eigen::VectorXd s_hi = Eigen::VectorXd::Zero(n), x_lo = Eigen::VectorXd::Constant(n, kInf),
                    x_hi = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < tau; ++t) {
        s_hi = s_hi.cwiseMax(dyn.s_in[t]);
        if (dyn.x_in_decision) {
            x_lo.setZero();
            Eigen::VectorXd cap = dyn.x_in_max.size() == n ? dyn.x_in_max
                                                           : Eigen::VectorXd::Constant(n, kInf);
            if (opt.omega.biomass_inflow_cap && !opt.omega.cap_on_state)
                for (int i = 0; i < n; ++i)
                    if (m.q_in[i] > 0.0)
                        cap[i] = std::min(cap[i], *opt.omega.biomass_inflow_cap / m.q_in[i]);
            x_hi = x_hi.cwiseMax(cap);
        } else {
            x_lo = x_lo.cwiseMin(dyn.x_in[t]);
            x_hi = x_hi.cwiseMax(dyn.x_in[t]);
        }
    }
    if (opt.box)
        out.box = *opt.box;
    else
        out.box = state_bounds(g, s_hi, x_lo, x_hi);
    if (opt.kind == ModelKind::RME || opt.underestimators) {
        for (int i = 0; i < n; ++i)
            if (!std::isfinite(out.box.x_hi[i]) || !std::isfinite(out.box.s_hi[i]))
                throw Error(ErrorCode::InvalidBounds,
                            "bounds needed by the growth rows are unbounded; cap the biomass inflow");
        out.warnings.push_back("steady-state bounds applied to a dynamic horizon");
    }

    const int last = dyn.periodic ? tau : tau + 1;
    for (int t = 1; t <= last; ++t)
        for (int i = 0; i < n; ++i) {
            auto v = tank_vars(i, t);
            if (t <= tau)
                declare_state(p, opt.kind, v);
            else {
                p.ensure_variable(v.s);
                if (has_x)
                    p.ensure_variable(v.x);
            }
        }
    if (!dyn.periodic)
        for (int i = 0; i < n; ++i) {
            auto v = tank_vars(i, 1);
            int s = p.index(v.s);
            p.set_bounds(s, dyn.s0[i], dyn.s0[i]);
            if (has_x) {
                int x = p.index(v.x);
                p.set_bounds(x, dyn.x0[i], dyn.x0[i]);
            }
        }
    auto xin_name = [](int i, int t) { return fmt::format("Xin[{},{}]", i + 1, t); };
    if (dyn.x_in_decision && has_x)
        for (int t = 1; t <= tau; ++t)
            for (int i = 0; i < n; ++i) {
                double hi = dyn.x_in_max.size() == n ? dyn.x_in_max[i] : kInf;
                p.add_variable(xin_name(i, t), 0.0, hi);
            }

    Eigen::MatrixXd a = m.M + m.L;
    for (int t = 1; t <= tau; ++t) {
        int nxt = (t == tau && dyn.periodic) ? 1 : t + 1;
        for (int i = 0; i < n; ++i) {
            const auto v = tank_vars(i, t);
            const double V = net.tanks[i].volume;
            AffineExpr e(m.q_in[i] * dyn.s_in[t - 1][i]);
            for (int j = 0; j < n; ++j)
                if (a(i, j) != 0.0)
                    e += a(i, j) * p.v(tank_vars(j, t).s);
            e -= (V / g.y) * p.v(v.t);
            e -= (V / dyn.dt) * (p.v(tank_vars(i, nxt).s) - p.v(v.s));
            p.add_linear(e, Sense::Eq, 0.0, idx("substrate", v.tag), "substrate");
        }
        if (!has_x)
            continue;
        for (int i = 0; i < n; ++i) {
            const auto v = tank_vars(i, t);
            const double V = net.tanks[i].volume;
            AffineExpr e = dyn.x_in_decision ? m.q_in[i] * p.v(xin_name(i, t))
                                             : AffineExpr(m.q_in[i] * dyn.x_in[t - 1][i]);
            for (int j = 0; j < n; ++j)
                if (a(i, j) != 0.0)
                    e += a(i, j) * p.v(tank_vars(j, t).x);
            e += V * p.v(v.t);
            e -= (V / dyn.dt) * (p.v(tank_vars(i, nxt).x) - p.v(v.x));
            p.add_linear(e, Sense::Eq, 0.0, idx("biomass", v.tag), "biomass");
        }
    }
    if (opt.omega.biomass_inflow_cap) {
        for (int t = 1; t <= tau; ++t) {
            AffineExpr e;
            for (int i = 0; i < n; ++i) {
                if (opt.omega.cap_on_state) {
                    if (has_x)
                        e += m.q_in[i] * p.v(tank_vars(i, t).x);
                } else if (dyn.x_in_decision && has_x) {
                    e += m.q_in[i] * p.v(xin_name(i, t));
                }
            }
            if (!e.terms.empty())
                p.add_linear(e, Sense::Le, *opt.omega.biomass_inflow_cap,
                             fmt::format("biomass_cap[{}]", t), "biomass_cap");
        }
    }
    for (int t = 1; t <= tau; ++t)
        for (int i = 0; i < n; ++i)
            add_growth(p, opt.kind, tank_vars(i, t), g, out.box, opt.underestimators);

    const auto tanks = objective_set(net, opt);
    AffineExpr obj;
    double w = 1.0;
    for (int t = 1; t <= tau; ++t) {
        w *= dyn.alpha;
        objective_rows(p, net, tanks, t, w, obj);
    }
    p.set_objective(obj, true);
    out.mats = m;
    return out;
}

} // namespace gradostat
