#include "gradostat/validate.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace gradostat {

namespace {

// the kinetics a solution is judged against; constant biomass reads x_c
double rate(const GrowthParams& g, int i, double s, double x)
{
    return kinetics(g, s, g.biomass(i, x));
}

double value_of(const ConicProgram& p, const Eigen::VectorXd& v, const std::string& name)
{
    return v[p.index(name)];
}

GrowthParams as_monod_state(const GrowthParams& g)
{
    GrowthParams h = g;
    if (h.kind == GrowthKind::MonodConstantBiomass)
        h.kind = GrowthKind::Monod;
    return h;
}

} // namespace

TankState tank_state(const ConicProgram& p, const Eigen::VectorXd& values, const GrowthParams& g,
                     int tanks, int period)
{
    TankState st;
    st.s.resize(tanks);
    st.x.resize(tanks);
    st.t.resize(tanks);
    for (int i = 0; i < tanks; ++i) {
        auto v = tank_vars(i, period);
        st.s[i] = value_of(p, values, v.s);
        st.t[i] = value_of(p, values, v.t);
        st.x[i] = g.kind == GrowthKind::MonodConstantBiomass ? g.x_c[i] : value_of(p, values, v.x);
    }
    return st;
}

ExactnessReport exactness(const ConicProgram& p, const Eigen::VectorXd& values,
                          const GrowthParams& g, int tanks, int periods, double exact_tol)
{
    std::unordered_map<std::string, int> rows;
    const auto& lin = p.linear_rows();
    for (size_t k = 0; k < lin.size(); ++k)
        if (lin[k].group == "underestimator")
            rows.emplace(lin[k].name, static_cast<int>(k));
    auto binding = [&](const std::string& name, double scale) {
        auto it = rows.find(name);
        if (it == rows.end())
            return false;
        return std::abs(lin[it->second].expr.eval(values)) <= 1e-6 * scale;
    };

    ExactnessReport rep;
    rep.min_gap = kInf;
    const int first = periods > 0 ? 1 : -1;
    const int last = periods > 0 ? periods : -1;
    for (int t = first; t <= last; t = (t < 0 ? last + 1 : t + 1)) {
        TankState st = tank_state(p, values, g, tanks, t);
        for (int i = 0; i < tanks; ++i) {
            TankGap gp;
            gp.tank = i;
            gp.period = t;
            gp.s = st.s[i];
            gp.x = st.x[i];
            gp.t = st.t[i];
            gp.r = rate(g, i, std::max(gp.s, 0.0), std::max(gp.x, 0.0));
            gp.gap = gp.r - gp.t;
            rep.min_gap = std::min(rep.min_gap, gp.gap);
            if (gp.r < 1e-12) {
                gp.excluded = true;
                ++rep.excluded;
                gp.exact = std::abs(gp.t) <= exact_tol;
            } else {
                gp.rel = std::abs(gp.gap) / gp.r;
                gp.exact = gp.rel <= exact_tol;
            }
            std::string tag = tank_vars(i, t).tag;
            double scale = 1.0 + std::abs(gp.t);
            gp.under_binding = binding("under_s[" + tag + "]", scale) ||
                               binding("under_x[" + tag + "]", scale);
            if (!gp.excluded && (rep.worst < 0 || gp.rel > rep.metric)) {
                rep.metric = gp.rel;
                rep.worst = static_cast<int>(rep.tanks.size());
            }
            rep.tanks.push_back(gp);
        }
    }
    if (rep.tanks.empty())
        rep.min_gap = 0.0;
    return rep;
}

Eigen::VectorXd objective_gradient(const GradostatNetwork& net, const std::vector<int>& tanks)
{
    if (tanks.empty())
        return net.volumes();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.size());
    for (int i : tanks)
        grad[i] = net.tanks[i].volume;
    return grad;
}

CertificateReport exactness_certificate(const GradostatNetwork& net, const SystemMatrices& m,
                                       const GrowthParams& g, const TankState& st,
                                       const Eigen::VectorXd& grad, std::optional<double> measured,
                                       double exact_tol)
{
    const int n = m.size();
    if (grad.size() != n || st.s.size() != n || st.x.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "certificate inputs do not match the network");
    CertificateReport rep;
    rep.outflow_connected = is_outflow_connected(m);
    rep.irreducible = is_irreducible(m);
    rep.fully_fed = is_fully_fed(net);

    Eigen::VectorXd vinv = net.volumes().cwiseInverse();
    Eigen::MatrixXd mtl = m.M.transpose() + m.L;
    Eigen::MatrixXd a = mtl * vinv.asDiagonal();
    rep.margin.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = g.biomass(i, st.x[i]);
        rep.margin[i] = growth_margin(g, std::max(st.s[i], 0.0), std::max(x, 0.0));
    }
    rep.assumption_holds = (rep.margin.array() >= -1e-12).all();
    rep.g = a * grad;
    double gscale = 1e-12 * (1.0 + grad.cwiseAbs().maxCoeff() * a.cwiseAbs().maxCoeff());
    rep.g_negative = (rep.g.array() < -gscale).all();
    rep.g_nonpositive_nonzero =
        (rep.g.array() <= gscale).all() && (rep.g.array() < -gscale).any();
    rep.hypotheses = rep.outflow_connected && rep.assumption_holds &&
                     ((rep.irreducible && rep.g_nonpositive_nonzero) || rep.g_negative);

    Eigen::MatrixXd w = a;
    w.diagonal() -= rep.margin;
    Eigen::EigenSolver<Eigen::MatrixXd> es(w, false);
    Eigen::VectorXd re = es.eigenvalues().real();
    rep.w_eig_min = re.minCoeff();
    rep.w_eig_max = re.maxCoeff();
    if (!is_numerically_invertible(w)) {
        rep.singular_w = true;
        rep.note = "W is singular";
    } else {
        rep.rho = w.fullPivLu().solve(rep.g);
        rep.rho_computed = rep.rho.allFinite();
        double scale = 1e-10 * (1.0 + rep.rho.cwiseAbs().maxCoeff());
        rep.rho_positive = rep.rho_computed && (rep.rho.array() > scale).all();
    }
    rep.predicts_exact = rep.rho_positive;
    if (!rep.hypotheses && rep.note.empty()) {
        if (!rep.outflow_connected)
            rep.note = "not outflow connected";
        else if (!rep.assumption_holds)
            rep.note = "growth derivative condition fails";
        else
            rep.note = "gradient condition fails";
    }
    if (measured)
        rep.agrees = rep.predicts_exact == (*measured <= exact_tol);
    return rep;
}

KktReport kkt_residuals(const ConicProgram& p, const SolveResult& r, const GradostatNetwork& net,
                        const SystemMatrices& m, const GrowthParams& g,
                        const Eigen::VectorXd& grad, double active_tol)
{
    if (r.status != SolveStatus::Optimal || r.row_duals.empty())
        throw Error(ErrorCode::MissingDuals, "no multipliers: the solve did not finish optimally");
    const int n = m.size();
    const bool has_x = g.kind != GrowthKind::MonodConstantBiomass;
    auto sig = group_duals(p, r, "substrate");
    auto eps = group_duals(p, r, "biomass");
    if (static_cast<int>(sig.size()) != n || (has_x && static_cast<int>(eps.size()) != n))
        throw Error(ErrorCode::MissingDuals, "balance multipliers are missing");
    KktReport rep;
    rep.sigma = Eigen::Map<Eigen::VectorXd>(sig.data(), n);
    rep.epsilon = has_x ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(eps.data(), n))
                        : Eigen::VectorXd::Zero(n);
    bool removed = !rep.sigma.allFinite() || !rep.epsilon.allFinite();

    Eigen::VectorXd V = net.volumes();
    TankState st = tank_state(p, r.values, g, n);
    rep.rho = grad + V.cwiseProduct(rep.sigma / g.y - rep.epsilon);

    // tanks touched by an active side row or bound are not checked
    std::set<int> busy;
    std::vector<std::set<int>> tank_cols(n);
    std::unordered_map<int, int> col_tank;
    for (int i = 0; i < n; ++i) {
        auto v = tank_vars(i);
        col_tank[p.index(v.s)] = i;
        col_tank[p.index(v.t)] = i;
        if (has_x)
            col_tank[p.index(v.x)] = i;
    }
    static const std::set<std::string> core = {"substrate", "biomass"};
    for (const auto& row : p.linear_rows()) {
        if (core.count(row.group))
            continue;
        double val = row.expr.eval(r.values);
        if (row.sense != Sense::Eq && std::abs(val) > active_tol * (1.0 + std::abs(row.expr.constant)))
            continue;
        for (const auto& t : row.expr.terms) {
            auto it = col_tank.find(t.var);
            if (it != col_tank.end())
                busy.insert(it->second);
        }
    }
    for (const auto& [col, i] : col_tank) {
        const auto& var = p.variables()[col];
        double x = r.values[col];
        if (x - var.lo <= active_tol * (1.0 + std::abs(var.lo)) ||
            var.hi - x <= active_tol * (1.0 + std::abs(var.hi)))
            busy.insert(i);
    }

    GrowthParams gs = g;
    Eigen::MatrixXd mtl = m.M.transpose() + m.L;
    Eigen::VectorXd ls = mtl * rep.sigma, lx = mtl * rep.epsilon;
    KktFamily fs{"stationarity_s"}, fx{"stationarity_x"}, cs{"complementarity"}, sg{"rho_sign"};
    for (int i = 0; i < n; ++i) {
        double x = g.biomass(i, st.x[i]);
        double rr = kinetics(gs, st.s[i], x);
        // sign and complementarity need no stationarity in S or X
        if (removed) {
            ++cs.unchecked;
            ++sg.unchecked;
        } else {
            cs.residual = std::max(cs.residual, std::abs(rep.rho[i] * (st.t[i] - rr)));
            ++cs.checked;
            sg.residual = std::max(sg.residual, std::max(0.0, -rep.rho[i]));
            ++sg.checked;
        }
        if (removed || busy.count(i)) {
            ++fs.unchecked;
            if (has_x)
                ++fx.unchecked;
            continue;
        }
        fs.residual = std::max(fs.residual, std::abs(dr_ds(gs, st.s[i], x) * rep.rho[i] - ls[i]));
        ++fs.checked;
        if (has_x) {
            fx.residual = std::max(fx.residual, std::abs(dr_dx(gs, st.s[i], x) * rep.rho[i] - lx[i]));
            ++fx.checked;
        }
    }
    rep.families = {fs, fx, cs, sg};
    if (!has_x)
        rep.families.erase(rep.families.begin() + 1);
    for (const auto& f : rep.families)
        rep.max_residual = std::max(rep.max_residual, f.residual);
    return rep;
}

namespace {

struct Rhs {
    const GradostatNetwork& net;
    const SystemMatrices& m;
    GrowthParams g;
    Eigen::MatrixXd a;
    Eigen::VectorXd vinv;

    // (dS/dt, dX/dt)
    void operator()(const Eigen::VectorXd& s, const Eigen::VectorXd& x, const Eigen::VectorXd& s_in,
                    const Eigen::VectorXd& x_in, Eigen::VectorXd& ds, Eigen::VectorXd& dx) const
    {
        const int n = static_cast<int>(s.size());
        Eigen::VectorXd vr(n);
        for (int i = 0; i < n; ++i)
            vr[i] = net.tanks[i].volume * kinetics(g, std::max(s[i], 0.0), std::max(x[i], 0.0));
        ds = vinv.cwiseProduct(a * s - vr / g.y + m.q_in.cwiseProduct(s_in));
        dx = vinv.cwiseProduct(a * x + vr + m.q_in.cwiseProduct(x_in));
    }
};

} // namespace

double steady_residual(const GradostatNetwork& net, const SystemMatrices& m, const GrowthParams& g,
                       const Eigen::VectorXd& s, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& s_in, const Eigen::VectorXd& x_in)
{
    Rhs f{net, m, as_monod_state(g), m.M + m.L, net.volumes().cwiseInverse()};
    Eigen::VectorXd ds, dx;
    f(s, x, s_in, x_in, ds, dx);
    return std::max(ds.cwiseAbs().maxCoeff(), dx.cwiseAbs().maxCoeff());
}

Trajectory ode_simulate(const GradostatNetwork& net, const SystemMatrices& m, const GrowthParams& g,
                        const Eigen::VectorXd& s0, const Eigen::VectorXd& x0, double horizon,
                        double dt, const OdeInputs& in)
{
    const int n = m.size();
    if (s0.size() != n || x0.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "initial state does not match the network");
    if (!(dt > 0.0) || !(horizon >= 0.0))
        throw Error(ErrorCode::BadInput, "step and horizon must be positive");
    if (!in.s_in.empty() && !(in.period > 0.0))
        throw Error(ErrorCode::BadInput, "signal period must be positive");
    Rhs f{net, m, as_monod_state(g), m.M + m.L, net.volumes().cwiseInverse()};
    const Eigen::VectorXd s_const = net.s_in(), x_const = net.x_in();
    auto signal = [&](const std::vector<Eigen::VectorXd>& sig, const Eigen::VectorXd& dflt,
                      double t) -> const Eigen::VectorXd& {
        if (sig.empty())
            return dflt;
        long k = static_cast<long>(std::floor(t / in.period + 1e-9));
        k = std::clamp<long>(k, 0, static_cast<long>(sig.size()) - 1);
        return sig[k];
    };

    Trajectory tr;
    Eigen::VectorXd s = s0, x = x0;
    double scale = 1.0 + std::max(s0.cwiseAbs().maxCoeff(), x0.cwiseAbs().maxCoeff()) +
                   std::max(s_const.cwiseAbs().maxCoeff(), x_const.cwiseAbs().maxCoeff());
    for (const auto& v : in.s_in)
        scale = std::max(scale, 1.0 + v.cwiseAbs().maxCoeff());
    for (const auto& v : in.x_in)
        scale = std::max(scale, 1.0 + v.cwiseAbs().maxCoeff());
    const long steps = static_cast<long>(std::ceil(horizon / dt - 1e-9));
    double t = 0.0;
    Eigen::VectorXd k1s, k1x, k2s, k2x, k3s, k3x, k4s, k4x;
    auto record = [&] {
        // signal held over the step that starts at t
        f(s, x, signal(in.s_in, s_const, t), signal(in.x_in, x_const, t), k1s, k1x);
        double res = std::max(k1s.cwiseAbs().maxCoeff(), k1x.cwiseAbs().maxCoeff());
        tr.t.push_back(t);
        tr.s.push_back(s);
        tr.x.push_back(x);
        tr.max_residual = std::max(tr.max_residual, res);
        tr.final_residual = res;
    };
    record();
    for (long k = 0; k < steps; ++k) {
        double h = std::min(dt, horizon - t);
        const Eigen::VectorXd& si = signal(in.s_in, s_const, t);
        const Eigen::VectorXd& xi = signal(in.x_in, x_const, t);
        f(s, x, si, xi, k1s, k1x);
        f(s + 0.5 * h * k1s, x + 0.5 * h * k1x, si, xi, k2s, k2x);
        f(s + 0.5 * h * k2s, x + 0.5 * h * k2x, si, xi, k3s, k3x);
        f(s + h * k3s, x + h * k3x, si, xi, k4s, k4x);
        s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        t = (k + 1 == steps) ? horizon : t + h;
        double norm = std::max(s.cwiseAbs().maxCoeff(), x.cwiseAbs().maxCoeff());
        if (!std::isfinite(norm) || norm > 1e6 * scale)
            throw Error(ErrorCode::StepTooLarge,
                        fmt::format("integration diverged at t = {:.6g}; reduce the step", t));
        record();
    }
    return tr;
}

MassLedger dynamic_mass_ledger(const ConicProgram& p, const Eigen::VectorXd& values,
                               const GradostatNetwork& net, const SystemMatrices& m,
                               const GrowthParams& g, const DynamicSpec& dyn)
{
    const int n = m.size(), tau = dyn.periods;
    const bool has_x = g.kind != GrowthKind::MonodConstantBiomass;
    Eigen::VectorXd V = net.volumes();
    MassLedger led;
    auto get = [&](const std::string& name) { return values[p.index(name)]; };
    for (int t = 1; t <= tau; ++t)
        for (int i = 0; i < n; ++i) {
            auto v = tank_vars(i, t);
            double s = get(v.s), tt = get(v.t);
            led.substrate_in += dyn.dt * m.q_in[i] * dyn.s_in[t - 1][i];
            led.substrate_out += dyn.dt * m.q_out[i] * s;
            led.substrate_consumed += dyn.dt * V[i] * tt / g.y;
            if (!has_x)
                continue;
            double xin = dyn.x_in_decision ? get(fmt::format("Xin[{},{}]", i + 1, t))
                                           : dyn.x_in[t - 1][i];
            led.biomass_in += dyn.dt * m.q_in[i] * xin;
            led.biomass_out += dyn.dt * m.q_out[i] * get(v.x);
            led.biomass_produced += dyn.dt * V[i] * tt;
        }
    const int end = dyn.periodic ? 1 : tau + 1;
    for (int i = 0; i < n; ++i) {
        led.substrate_accumulated += V[i] * (get(tank_vars(i, end).s) - get(tank_vars(i, 1).s));
        if (has_x)
            led.biomass_accumulated += V[i] * (get(tank_vars(i, end).x) - get(tank_vars(i, 1).x));
    }
    led.substrate_closure =
        std::abs(led.substrate_in - led.substrate_out - led.substrate_consumed -
                 led.substrate_accumulated) /
        std::max(1.0, led.substrate_in);
    if (has_x)
        led.biomass_closure = std::abs(led.biomass_in + led.biomass_produced - led.biomass_out -
                                       led.biomass_accumulated) /
                              std::max(1.0, led.biomass_in + led.biomass_produced);
    for (int i = 0; i < n; ++i)
        for (const char* fam : {"substrate", "biomass"}) {
            int r = p.find_row(fmt::format("{}[{},{}]", fam, i + 1, tau));
            if (r >= 0)
                led.boundary_residual = std::max(
                    led.boundary_residual, std::abs(p.linear_rows()[r].expr.eval(values)));
        }
    return led;
}

} // namespace gradostat
