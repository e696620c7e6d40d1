#include "support.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "gradostat/bnb.hpp"
#include "gradostat/growth.hpp"
#include "gradostat/ipm.hpp"
#include "gradostat/models.hpp"
#include "gradostat/validate.hpp"

namespace gradostat::testing {

namespace {

double uni(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
int uni_int(Rng& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

void fail(PropertyOutcome& o, const std::string& why)
{
    ++o.failures;
    o.ok = false;
    if (o.detail.empty())
        o.detail = why;
}

// closes water balance: q_out = q_in + inflow - outflow, raising q_in where needed
void close_balance(GradostatNetwork& net, Rng& rng, double closed_prob)
{
    const int n = net.size();
    std::vector<double> in(n, 0.0), out(n, 0.0);
    for (const auto& p : net.pipes) {
        out[p.from] += p.q0;
        in[p.to] += p.q0;
    }
    for (int i = 0; i < n; ++i) {
        double deficit = out[i] - in[i];
        auto& t = net.tanks[i];
        if (closed_prob > 0.0 && uni(rng, 0, 1) < closed_prob && deficit >= 0.0) {
            t.q_in = deficit;
            t.q_out = 0.0;
            continue;
        }
        double qin = uni(rng, 0.2, 1.0) + std::max(0.0, deficit);
        t.q_in = qin;
        t.q_out = qin - deficit;
    }
}

} // namespace

GradostatNetwork random_network(Rng& rng, int n, bool ring, double pipe_prob)
{
    GradostatNetwork net;
    net.growth.kind = GrowthKind::Contois;
    for (int i = 0; i < n; ++i) {
        Tank t;
        t.volume = uni(rng, 1.0, 4.0);
        t.s_in = uni(rng, 0.5, 1.5);
        t.x_in = uni(rng, 2.0, 4.0);
        net.tanks.push_back(t);
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b)
                continue;
            bool cyc = ring && n > 1 && b == (a + 1) % n;
            if (!cyc && uni(rng, 0, 1) >= pipe_prob)
                continue;
            Pipe p;
            p.from = a;
            p.to = b;
            p.q0 = uni(rng, 0.05, 0.3);
            p.d0 = uni(rng, 0.0, 0.1);
            net.pipes.push_back(p);
        }
    close_balance(net, rng, 0.0);
    return net;
}

ScalarSteady single_tank_bisection(double mu, double k, double y, bool contois, double v, double q,
                                   double s_in, double x_in)
{
    // S/y + X is conserved at steady state: z = s_in / y + x_in
    const double z = s_in / y + x_in;
    auto rate = [&](double s) {
        double x = z - s / y;
        double den = contois ? k * x + s : k + s;
        return den > 0.0 ? mu * s * x / den : 0.0;
    };
    // f > 0 at S = 0 and f <= 0 at S = s_in; bisect for the largest root below s_in,
    // which is the non-washout equilibrium when one exists
    auto f = [&](double s) { return q * (s_in - s) - v * rate(s) / y; };
    double lo = 0.0, hi = s_in;
    if (f(hi) >= 0.0)
        return {s_in, x_in, rate(s_in)}; // washout
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    double s = 0.5 * (lo + hi);
    return {s, z - s / y, rate(s)};
}

PropertyOutcome encoding_equivalence(int samples, std::uint64_t seed, double tol)
{
    PropertyOutcome o;
    Rng rng(seed);
    TankVars tv = tank_vars(0);
    for (int k = 0; k < samples; ++k) {
        bool contois = (k % 2) == 0;
        GrowthParams g;
        g.mu_max = uni(rng, 0.2, 3.0);
        g.k = uni(rng, 0.2, 3.0);
        g.y = uni(rng, 0.2, 1.5);
        double s = uni(rng, 0.0, 10.0), x = uni(rng, 0.0, 10.0);
        ConeBlock b;
        double r;
        if (contois) {
            g.kind = GrowthKind::Contois;
            b = encode_contois_soc(tv, g);
            r = g.mu_max * s * x / (g.k * x + s);
        } else {
            g.kind = GrowthKind::MonodConstantBiomass;
            g.x_c = Eigen::VectorXd::Constant(1, x);
            b = encode_monod_constx_soc(tv, g);
            r = g.mu_max * s * x / (g.k + s);
        }
        double t = uni(rng, 0.0, 2.0 * r + 1.0);
        if (std::abs(t - r) <= tol)
            continue; // inside the tolerance band either answer is acceptable
        Eigen::VectorXd pt = Eigen::VectorXd::Zero(b.num_variables());
        pt[b.index(tv.s)] = s;
        pt[b.index(tv.t)] = t;
        if (b.has(tv.x))
            pt[b.index(tv.x)] = x;
        double viol = b.max_violation(pt);
        bool feasible = viol <= 1e-12 * (1.0 + s + x + t);
        ++o.cases;
        if (feasible != (t <= r)) {
            o.worst = std::max(o.worst, std::abs(t - r));
            fail(o, fmt::format("{} s={} x={} t={} r={} violation={}",
                                contois ? "contois" : "monod", s, x, t, r, viol));
        }
    }
    return o;
}

PropertyOutcome envelope_soundness(int samples, std::uint64_t seed)
{
    PropertyOutcome o;
    Rng rng(seed);
    TankVars tv = tank_vars(0);
    for (int k = 0; k < samples; ++k) {
        GrowthParams g;
        g.kind = GrowthKind::Monod;
        g.mu_max = uni(rng, 0.5, 2.0);
        g.k = uni(rng, 0.5, 2.0);
        BoundsBox b;
        double sl = uni(rng, 0.05, 1.0), sh = sl + uni(rng, 0.1, 4.0);
        double xl = uni(rng, 0.0, 2.0), xh = xl + uni(rng, 0.1, 5.0);
        auto mon = [&](double s, double x) { return g.mu_max * s * x / (g.k + s); };
        b.s_lo = Eigen::VectorXd::Constant(1, sl);
        b.s_hi = Eigen::VectorXd::Constant(1, sh);
        b.x_lo = Eigen::VectorXd::Constant(1, xl);
        b.x_hi = Eigen::VectorXd::Constant(1, xh);
        b.t_lo = Eigen::VectorXd::Constant(1, mon(sl, xl));
        b.t_hi = Eigen::VectorXd::Constant(1, mon(sh, xh));
        ConeBlock c = encode_monod_envelope(tv, g, b);
        double s = uni(rng, sl, sh), x = uni(rng, xl, xh), t = mon(s, x);
        double tl = b.t_lo[0], th = b.t_hi[0];
        double lam = (th - t) / (th - tl);
        Eigen::VectorXd pt = Eigen::VectorXd::Zero(c.num_variables());
        pt[c.index(tv.s)] = s;
        pt[c.index(tv.x)] = x;
        pt[c.index(tv.t)] = t;
        pt[c.index("beta[1]")] = t / s;
        pt[c.index("gamma[1]")] = tl * lam / s;
        pt[c.index("psi[1]")] = lam * s;
        double viol = c.max_violation(pt);
        ++o.cases;
        o.worst = std::max(o.worst, viol);
        if (viol > 1e-9 * (1.0 + th))
            fail(o, fmt::format("s={} x={} violation={}", s, x, viol));
    }
    return o;
}

PropertyOutcome underestimator_soundness(int samples, std::uint64_t seed)
{
    PropertyOutcome o;
    Rng rng(seed);
    TankVars tv = tank_vars(0);
    for (int k = 0; k < samples; ++k) {
        bool contois = (k % 2) == 0;
        GrowthParams g;
        g.kind = contois ? GrowthKind::Contois : GrowthKind::MonodConstantBiomass;
        g.mu_max = uni(rng, 0.5, 2.0);
        g.k = uni(rng, 0.5, 2.0);
        double sl = uni(rng, 0.0, 1.0), sh = sl + uni(rng, 0.1, 4.0);
        double xl = uni(rng, 0.0, 2.0), xh = xl + uni(rng, 0.1, 5.0);
        double xc = uni(rng, 0.1, 4.0);
        g.x_c = Eigen::VectorXd::Constant(1, xc);
        BoundsBox b;
        b.s_lo = Eigen::VectorXd::Constant(1, sl);
        b.s_hi = Eigen::VectorXd::Constant(1, sh);
        b.x_lo = Eigen::VectorXd::Constant(1, xl);
        b.x_hi = Eigen::VectorXd::Constant(1, xh);
        b.t_lo = Eigen::VectorXd::Zero(1);
        b.t_hi = Eigen::VectorXd::Constant(1, 100.0);
        ConeBlock c = contois ? underestimator_contois(tv, g, b) : underestimator_monod_constx(tv, g, b);
        double s = uni(rng, sl, sh), x = uni(rng, xl, xh);
        double r = contois ? (g.k * x + s > 0 ? g.mu_max * s * x / (g.k * x + s) : 0.0)
                           : g.mu_max * s * xc / (g.k + s);
        Eigen::VectorXd pt = Eigen::VectorXd::Zero(c.num_variables());
        pt[c.index(tv.s)] = s;
        pt[c.index(tv.t)] = r;
        if (c.has(tv.x))
            pt[c.index(tv.x)] = x;
        double viol = c.max_violation(pt);
        ++o.cases;
        o.worst = std::max(o.worst, viol);
        if (viol > 1e-12 * (1.0 + r))
            fail(o, fmt::format("{} s={} x={} violation={}", contois ? "contois" : "monod", s, x,
                                viol));
    }
    return o;
}

PropertyOutcome lift_soundness(int programs, std::uint64_t seed)
{
    PropertyOutcome o;
    Rng rng(seed);
    for (int k = 0; k < programs; ++k) {
        ConicProgram p;
        const int n = uni_int(rng, 2, 6);
        Eigen::VectorXd x0(n);
        for (int j = 0; j < n; ++j) {
            double lo = uni(rng, -2.0, 0.0), hi = lo + uni(rng, 0.5, 3.0);
            int kind = uni_int(rng, 0, 3);
            if (kind == 0)
                lo = -kInf;
            if (kind == 1)
                hi = kInf;
            double a = std::isfinite(lo) ? lo : -3.0, b = std::isfinite(hi) ? hi : 3.0;
            x0[j] = uni(rng, a, b);
            p.add_variable(fmt::format("v{}", j), lo, hi);
        }
        auto rand_expr = [&] {
            AffineExpr e(uni(rng, -1.0, 1.0));
            for (int j = 0; j < n; ++j)
                if (uni(rng, 0, 1) < 0.6)
                    e.add(j, uni(rng, -2.0, 2.0));
            return e;
        };
        const int rows = uni_int(rng, 1, 4);
        for (int r = 0; r < rows; ++r) {
            AffineExpr e = rand_expr();
            double val = e.eval(x0);
            switch (uni_int(rng, 0, 4)) {
            case 0: p.add_linear(e, Sense::Eq, AffineExpr(val)); break;
            case 1: p.add_linear(e, Sense::Le, AffineExpr(val + uni(rng, 0.0, 1.0))); break;
            case 2: p.add_linear(e, Sense::Ge, AffineExpr(val - uni(rng, 0.0, 1.0))); break;
            case 3: {
                std::vector<AffineExpr> u = {rand_expr(), rand_expr()};
                double norm = std::hypot(u[0].eval(x0), u[1].eval(x0));
                AffineExpr t = rand_expr();
                t.constant += norm + uni(rng, 0.0, 1.0) - t.eval(x0);
                p.add_soc(t, u);
                break;
            }
            default: {
                std::vector<AffineExpr> u = {rand_expr()};
                double uu = u[0].eval(x0);
                AffineExpr v = rand_expr(), w = rand_expr();
                v.constant += uni(rng, 0.5, 2.0) - v.eval(x0);
                double vv = v.eval(x0);
                w.constant += uu * uu / (2.0 * vv) + uni(rng, 0.0, 1.0) - w.eval(x0);
                p.add_rotated_soc(v, w, u);
            }
            }
        }
        ++o.cases;
        if (p.max_violation(x0) > 1e-9) {
            fail(o, "generator produced an infeasible seed point");
            continue;
        }
        for (bool pre : {false, true}) {
            StandardForm sf = to_standard_form(p, {pre});
            if (sf.presolve_infeasible) {
                fail(o, "presolve declared a feasible program infeasible");
                continue;
            }
            Eigen::VectorXd z = sf.lift(x0);
            double eq = sf.rows() ? (sf.A * z - sf.b).lpNorm<Eigen::Infinity>() : 0.0;
            double back = (sf.recover(z) - x0).lpNorm<Eigen::Infinity>();
            double scale = 1.0 + x0.lpNorm<Eigen::Infinity>();
            o.worst = std::max({o.worst, eq, back});
            if (eq > 1e-9 * scale || back > 1e-9 * scale || !sf.in_cone(z, 1e-9 * scale))
                fail(o, fmt::format("program {} presolve {}: eq {} back {}", k, pre, eq, back));
        }
        // the other direction: a solver point of the lifted form is feasible originally
        AffineExpr obj;
        for (int j = 0; j < n; ++j)
            obj.add(j, uni(rng, -1.0, 1.0));
        ConicProgram boxed = p;
        for (int j = 0; j < n; ++j) {
            const auto& v = boxed.variables()[j];
            boxed.set_bounds(j, std::isfinite(v.lo) ? v.lo : -10.0, std::isfinite(v.hi) ? v.hi : 10.0);
        }
        boxed.set_objective(obj, true);
        SolveResult r = solve_named(boxed);
        if (!r.optimal()) {
            fail(o, fmt::format("program {}: solve returned {}", k, to_string(r.status)));
            continue;
        }
        double viol = boxed.max_violation(r.values);
        o.worst = std::max(o.worst, viol);
        if (viol > 1e-6)
            fail(o, fmt::format("program {}: recovered point violates by {}", k, viol));
    }
    return o;
}

PropertyOutcome bnb_vs_exhaustive(int instances, std::uint64_t seed, int max_binaries)
{
    PropertyOutcome o;
    Rng rng(seed);
    for (int k = 0; k < instances; ++k) {
        const int n = uni_int(rng, 2, 4);
        GradostatNetwork net;
        net.growth.kind = GrowthKind::Contois;
        for (int i = 0; i < n; ++i) {
            Tank t;
            t.volume = uni(rng, 1.0, 4.0);
            t.q_out = uni(rng, 0.5, 3.0);
            t.s_in = uni(rng, 0.5, 3.0);
            t.x_in = uni(rng, 0.5, 4.0);
            net.tanks.push_back(t);
        }
        std::vector<std::pair<int, int>> arcs;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b)
                    arcs.emplace_back(a, b);
        std::shuffle(arcs.begin(), arcs.end(), rng);
        const int m = std::min<int>(uni_int(rng, 2, max_binaries), static_cast<int>(arcs.size()));
        for (int j = 0; j < m; ++j) {
            Pipe p;
            p.from = arcs[j].first;
            p.to = arcs[j].second;
            p.q1 = uni(rng, 0.2, 1.5);
            p.d1 = uni(rng, 0.0, 0.5);
            p.cost = uni(rng, 0.5, 2.0);
            p.candidate = true;
            net.pipes.push_back(p);
        }
        ModelOptions opt;
        opt.kind = k % 3 == 0 ? ModelKind::RMX : ModelKind::RC;
        opt.omega.budget = uni(rng, 1.0, 4.0);
        BuiltModel bm = build_design(net, opt);
        BnbResult a = solve_mixed(bm.program);
        BnbResult b = enumerate_exhaustive(bm.program, 20);
        ++o.cases;
        bool same_status = (a.status == BnbStatus::Infeasible) == (b.status == BnbStatus::Infeasible);
        double diff = std::abs(a.objective - b.objective);
        if (a.status == BnbStatus::Optimal && b.status == BnbStatus::Optimal)
            o.worst = std::max(o.worst, diff / std::max(1.0, std::abs(b.objective)));
        if (!same_status || a.status == BnbStatus::SolverFailure ||
            (b.status == BnbStatus::Optimal && diff > 1e-6 * std::max(1.0, std::abs(b.objective))))
            fail(o, fmt::format("instance {} ({} binaries): bnb {} {} vs exhaustive {} {}", k, m,
                                to_string(a.status), a.objective, to_string(b.status), b.objective));
    }
    return o;
}

namespace {

struct ExactCase {
    GradostatNetwork net;
    SystemMatrices m;
    GrowthParams g;
    Eigen::VectorXd s, x;
    double metric = 0.0;
    CertificateReport cert;
};

// random instance in the exact regime; slow flows keep washout repulsive
bool exact_case(Rng& rng, ExactCase& c, std::string& why)
{
    const int n = uni_int(rng, 2, 6);
    c.net = random_network(rng, n, true);
    ModelOptions opt;
    opt.kind = ModelKind::RC;
    BuiltModel bm = build_steady(c.net, opt);
    SolveResult r = solve_named(bm.program);
    if (!r.optimal()) {
        why = std::string("solve returned ") + to_string(r.status);
        return false;
    }
    c.g = bm.growth;
    c.m = *bm.mats;
    ExactnessReport ex = exactness(bm.program, r.values, bm.growth, n);
    c.metric = ex.metric;
    TankState st = tank_state(bm.program, r.values, bm.growth, n);
    c.s = st.s;
    c.x = st.x;
    c.cert = exactness_certificate(c.net, c.m, c.g, st, objective_gradient(c.net, {}), ex.metric);
    return true;
}

} // namespace

PropertyOutcome fed_irreducible_regime(int instances, std::uint64_t seed)
{
    PropertyOutcome o;
    Rng rng(seed);
    for (int k = 0; k < instances; ++k) {
        ExactCase c;
        std::string why;
        ++o.cases;
        if (!exact_case(rng, c, why)) {
            fail(o, fmt::format("instance {}: {}", k, why));
            continue;
        }
        o.worst = std::max(o.worst, c.metric);
        if (!c.cert.irreducible || !c.cert.fully_fed || !c.cert.outflow_connected)
            fail(o, fmt::format("instance {}: generator left the regime", k));
        else if (!c.cert.rho_positive)
            fail(o, fmt::format("instance {}: rho not positive", k));
        else if (c.metric > 1e-6)
            fail(o, fmt::format("instance {}: exactness {}", k, c.metric));
    }
    return o;
}

PropertyOutcome ode_oracle(int instances, std::uint64_t seed)
{
    PropertyOutcome o;
    Rng rng(seed);
    for (int k = 0; k < instances; ++k) {
        ExactCase c;
        std::string why;
        ++o.cases;
        if (!exact_case(rng, c, why)) {
            fail(o, fmt::format("instance {}: {}", k, why));
            continue;
        }
        if (c.metric > 1e-6) {
            fail(o, fmt::format("instance {}: not exact ({})", k, c.metric));
            continue;
        }
        const int n = c.net.size();
        double scale = 1.0 + std::max(c.s.cwiseAbs().maxCoeff(), c.x.cwiseAbs().maxCoeff());
        double res = steady_residual(c.net, c.m, c.g, c.s, c.x, c.net.s_in(), c.net.x_in());
        o.worst = std::max(o.worst, res / scale);
        if (res > 1e-6 * scale) {
            fail(o, fmt::format("instance {}: steady residual {}", k, res));
            continue;
        }
        // every tank receives biomass, so washout is not a rest point to compete with
        if (!c.cert.fully_fed) {
            fail(o, fmt::format("instance {}: generator left the fully fed regime", k));
            continue;
        }
        Eigen::VectorXd v = c.net.volumes();
        double slowest = (v.array() / c.m.q_out.array().max(1e-3)).maxCoeff();
        Trajectory tr = ode_simulate(c.net, c.m, c.g, 1.05 * c.s, 1.05 * c.x, 60.0 * slowest, 0.01 * slowest);
        double d0 = 0.05 * std::max(c.s.cwiseAbs().maxCoeff(), c.x.cwiseAbs().maxCoeff());
        double d1 = std::max((tr.s.back() - c.s).cwiseAbs().maxCoeff(),
                             (tr.x.back() - c.x).cwiseAbs().maxCoeff());
        if (d1 > 0.1 * d0)
            fail(o, fmt::format("instance {}: distance {} -> {}", k, d0, d1));
    }
    return o;
}

PropertyOutcome mmatrix_properties(int instances, std::uint64_t seed)
{
    PropertyOutcome o;
    Rng rng(seed);
    for (int k = 0; k < instances; ++k) {
        const int n = uni_int(rng, 1, 7);
        GradostatNetwork net = random_network(rng, n, k % 2 == 0, 0.35);
        close_balance(net, rng, k % 3 == 0 ? 0.4 : 0.0);
        SystemMatrices m = assemble_matrices(net);
        ++o.cases;
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
        auto check = [&](bool good, const std::string& what) {
            if (!good)
                fail(o, fmt::format("network {}: {}", k, what));
        };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) {
                    check(m.M(i, i) <= 0.0 && m.L(i, i) <= 0.0, "positive diagonal");
                } else {
                    check(m.M(i, j) >= 0.0 && m.L(i, j) >= 0.0, "negative off-diagonal");
                }
            }
        double w = ((m.M + m.C) * one).cwiseAbs().maxCoeff();
        double col = (one.transpose() * (m.M + m.G)).cwiseAbs().maxCoeff();
        double lap = (m.L * one).cwiseAbs().maxCoeff();
        double sym = (m.L - m.L.transpose()).cwiseAbs().maxCoeff();
        o.worst = std::max({o.worst, w, col, lap, sym});
        check(w <= 1e-10 && col <= 1e-10, "flow balance identities");
        check(lap <= 1e-12 && sym <= 1e-12, "diffusion Laplacian");

        // outflow connectivity by breadth-first search on the flow graph, independent of the library
        std::vector<char> reach(n, 0);
        std::vector<int> stack;
        for (int i = 0; i < n; ++i)
            if (m.G(i, i) > 0.0) {
                reach[i] = 1;
                stack.push_back(i);
            }
        while (!stack.empty()) {
            int j = stack.back();
            stack.pop_back();
            for (int i = 0; i < n; ++i)
                if (!reach[i] && i != j && m.M(j, i) > 0.0) { // flow i -> j
                    reach[i] = 1;
                    stack.push_back(i);
                }
        }
        bool connected = std::all_of(reach.begin(), reach.end(), [](char c) { return c; });
        check(connected == is_outflow_connected(m), "outflow connectivity disagrees with search");
        double det = std::abs(m.M.determinant());
        double mscale = std::pow(std::max(1.0, m.M.cwiseAbs().maxCoeff()), n);
        check(connected == (det > 1e-10 * mscale), "connectivity disagrees with invertibility of M");
        if (!connected)
            continue;
        Eigen::MatrixXd im = -m.M.inverse();
        Eigen::MatrixXd iml = -(m.M + m.L).inverse();
        check(im.minCoeff() >= -1e-12 && iml.minCoeff() >= -1e-12, "inverse has negative entries");
        if (is_irreducible(m))
            check(iml.minCoeff() > 0.0, "irreducible inverse not strictly positive");
        double id1 = (iml * m.C * one - one).cwiseAbs().maxCoeff();
        double id2 = (-(m.M.transpose() + m.L).inverse() * m.G * one - one).cwiseAbs().maxCoeff();
        o.worst = std::max({o.worst, id1, id2});
        check(id1 <= 1e-8 && id2 <= 1e-8, "inverse identities");
    }
    return o;
}

namespace {

struct Battery {
    std::string name;
    ConicProgram p;
    double expected;
};

std::vector<Battery> battery()
{
    std::vector<Battery> out;
    Rng rng(20231);
    // distance from a point to a half-space
    for (int k = 0; k < 10; ++k) {
        const int n = 2 + k % 3;
        Eigen::VectorXd a(n), c(n);
        for (int j = 0; j < n; ++j) {
            a[j] = uni(rng, -2, 2);
            c[j] = uni(rng, -1, 1);
        }
        double b = c.dot(a) - uni(rng, -0.5, 1.5);
        ConicProgram p;
        std::vector<AffineExpr> u;
        AffineExpr cx;
        for (int j = 0; j < n; ++j) {
            int v = p.add_variable(fmt::format("x{}", j), -kInf, kInf);
            u.push_back(AffineExpr::of(v) - AffineExpr(a[j]));
            cx.add(v, c[j]);
        }
        int t = p.add_variable("t", 0.0, kInf);
        p.add_soc(AffineExpr::of(t), u);
        p.add_linear(cx, Sense::Le, AffineExpr(b));
        p.set_objective(AffineExpr::of(t), false);
        out.push_back({fmt::format("projection {}", k), p, std::max(0.0, c.dot(a) - b) / c.norm()});
    }
    // LPs: box and simplex
    for (int k = 0; k < 10; ++k) {
        const int n = 3 + k % 4;
        ConicProgram p;
        AffineExpr obj, sum;
        double expected = 0.0;
        std::vector<double> cs(n);
        for (int j = 0; j < n; ++j)
            cs[j] = uni(rng, -2, 2);
        if (k % 2 == 0) {
            for (int j = 0; j < n; ++j) {
                double u = uni(rng, 0.5, 3);
                int v = p.add_variable(fmt::format("x{}", j), 0.0, u);
                obj.add(v, cs[j]);
                expected += std::max(0.0, cs[j]) * u;
            }
        } else {
            for (int j = 0; j < n; ++j) {
                int v = p.add_variable(fmt::format("x{}", j), 0.0, kInf);
                obj.add(v, cs[j]);
                sum.add(v, 1.0);
            }
            p.add_linear(sum, Sense::Eq, AffineExpr(1.0));
            expected = *std::max_element(cs.begin(), cs.end());
        }
        p.set_objective(obj, true);
        out.push_back({fmt::format("lp {}", k), p, expected});
    }
    // rotated cones: min v with 2 v w >= |u|^2, and the geometric mean
    for (int k = 0; k < 10; ++k) {
        ConicProgram p;
        if (k % 2 == 0) {
            double w0 = uni(rng, 0.3, 3), u0 = uni(rng, -2, 2), u1 = uni(rng, -2, 2);
            int v = p.add_variable("v", 0.0, kInf);
            p.add_rotated_soc(AffineExpr::of(v), AffineExpr(w0), {AffineExpr(u0), AffineExpr(u1)});
            p.set_objective(AffineExpr::of(v), false);
            out.push_back({fmt::format("rotated {}", k), p, (u0 * u0 + u1 * u1) / (2.0 * w0)});
        } else {
            double a = uni(rng, 0.3, 4), b = uni(rng, 0.3, 4);
            int x = p.add_variable("x", -kInf, kInf);
            int za = p.add_variable("a", 0.0, a);
            int zb = p.add_variable("b", 0.0, b);
            p.add_hyperbolic({AffineExpr::of(x)}, AffineExpr::of(za), AffineExpr::of(zb));
            p.set_objective(AffineExpr::of(x), true);
            out.push_back({fmt::format("geometric mean {}", k), p, std::sqrt(a * b)});
        }
    }
    return out;
}

} // namespace

PropertyOutcome ipm_battery(double gap_tol)
{
    PropertyOutcome o;
    for (auto& b : battery()) {
        SolveResult r = solve_named(b.p);
        ++o.cases;
        if (!r.optimal()) {
            fail(o, fmt::format("{}: {}", b.name, to_string(r.status)));
            continue;
        }
        double err = std::abs(r.objective - b.expected) / (1.0 + std::abs(b.expected));
        double gap = std::abs(r.objective - r.dual_objective) / (1.0 + std::abs(r.objective));
        o.worst = std::max(o.worst, gap);
        if (err > 1e-6)
            fail(o, fmt::format("{}: objective {} expected {}", b.name, r.objective, b.expected));
        if (gap > gap_tol)
            fail(o, fmt::format("{}: duality gap {}", b.name, gap));
    }
    return o;
}

PropertyOutcome infeasibility_certificates()
{
    PropertyOutcome o;
    auto check = [&](const std::string& name, const ConicProgram& p, SolveStatus want) {
        StandardForm sf = to_standard_form(p, {false});
        SolveResult r = solve(sf);
        ++o.cases;
        if (r.status != want) {
            fail(o, fmt::format("{}: {}", name, to_string(r.status)));
            return;
        }
        double res = want == SolveStatus::PrimalInfeasible ? primal_infeasibility_residual(sf, r.ray_y)
                                                           : dual_infeasibility_residual(sf, r.ray_x);
        o.worst = std::max(o.worst, res);
        if (res > 1e-6)
            fail(o, fmt::format("{}: certificate residual {}", name, res));
    };
    {
        // the unit disc cannot reach x + y >= 2
        ConicProgram p;
        int x = p.add_variable("x", -kInf, kInf), y = p.add_variable("y", -kInf, kInf);
        p.add_soc(AffineExpr(1.0), {AffineExpr::of(x), AffineExpr::of(y)});
        p.add_linear(AffineExpr::of(x) + AffineExpr::of(y), Sense::Ge, AffineExpr(2.0));
        p.set_objective(AffineExpr::of(x), true);
        check("disc versus half-plane", p, SolveStatus::PrimalInfeasible);
    }
    {
        ConicProgram p;
        int x = p.add_variable("x", 0.0, kInf), y = p.add_variable("y", 0.0, kInf);
        p.add_linear(AffineExpr::of(x) + AffineExpr::of(y), Sense::Le, AffineExpr(1.0));
        p.add_linear(AffineExpr::of(x) - AffineExpr::of(y), Sense::Ge, AffineExpr(2.0));
        p.set_objective(AffineExpr::of(x), true);
        check("inconsistent LP", p, SolveStatus::PrimalInfeasible);
    }
    {
        ConicProgram p;
        int v = p.add_variable("v", 0.0, kInf), w = p.add_variable("w", -kInf, kInf);
        p.add_rotated_soc(AffineExpr::of(v), AffineExpr::of(w), {AffineExpr(1.0)});
        p.add_linear(AffineExpr::of(w), Sense::Le, AffineExpr(-1.0));
        p.set_objective(AffineExpr::of(v), false);
        check("rotated cone with negative side", p, SolveStatus::PrimalInfeasible);
    }
    {
        ConicProgram p;
        int x = p.add_variable("x", -kInf, kInf), y = p.add_variable("y", -kInf, kInf);
        p.add_linear(AffineExpr::of(x), Sense::Eq, AffineExpr(1.0));
        p.set_objective(AffineExpr::of(x) + AffineExpr::of(y), true);
        check("free direction", p, SolveStatus::DualInfeasible);
    }
    {
        ConicProgram p;
        int x = p.add_variable("x", -kInf, kInf), t = p.add_variable("t", -kInf, kInf);
        p.add_soc(AffineExpr::of(t), {AffineExpr::of(x)});
        p.set_objective(AffineExpr::of(t) + 0.5 * AffineExpr::of(x), true);
        check("cone ray", p, SolveStatus::DualInfeasible);
    }
    return o;
}

} // namespace gradostat::testing
