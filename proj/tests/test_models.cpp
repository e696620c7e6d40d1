#include <gtest/gtest.h>

#include <cmath>

#include "gradostat/bnb.hpp"
#include "gradostat/models.hpp"
#include "gradostat/scenario.hpp"
#include "gradostat/validate.hpp"
#include "support.hpp"

using namespace gradostat;

namespace {

std::vector<double> activation_for(const GradostatNetwork& net, const std::vector<std::string>& on)
{
    std::vector<double> act;
    for (int j : net.candidates())
        act.push_back(std::find(on.begin(), on.end(), pipe_label(net, j)) != on.end() ? 1.0 : 0.0);
    return act;
}

double value(const BuiltModel& bm, const Eigen::VectorXd& x, const std::string& name)
{
    return x[bm.program.index(name)];
}

std::string fmt_name(const char* var, int tank) { return std::string(var) + "[" + std::to_string(tank + 1) + "]"; }

GradostatNetwork single_tank(double s_in, double x_in)
{
    GradostatNetwork net;
    Tank t;
    t.q_in = 1.0;
    t.q_out = 1.0;
    t.s_in = s_in;
    t.x_in = x_in;
    net.tanks.push_back(t);
    return net;
}

} // namespace

TEST(Models, SingleContoisTankMatchesBisection)
{
    GradostatNetwork net = single_tank(1.0, 1.0);
    ModelOptions opt;
    BuiltModel bm = build_steady(net, opt);
    SolveResult r = solve_named(bm.program);
    ASSERT_TRUE(r.optimal());
    auto o = gradostat::testing::single_tank_bisection(1, 1, 1, true, 1, 1, 1, 1);
    EXPECT_NEAR(value(bm, r.values, "S[1]"), o.s, 1e-6);
    EXPECT_NEAR(value(bm, r.values, "X[1]"), o.x, 1e-6);
    EXPECT_NEAR(value(bm, r.values, "T[1]"), o.r, 1e-6);
}

TEST(Models, ZeroObjectiveSetGivesZeroObjective)
{
    GradostatNetwork net = single_tank(1.0, 1.0);
    net.tanks.push_back(net.tanks[0]);
    ModelOptions opt;
    opt.objective_tanks = {1};
    BuiltModel bm = build_steady(net, opt);
    EXPECT_FALSE(bm.warnings.empty());
    SolveResult r = solve_named(bm.program);
    ASSERT_TRUE(r.optimal());
    // the two tanks are decoupled; tank 2 alone carries the objective
    auto o = gradostat::testing::single_tank_bisection(1, 1, 1, true, 1, 1, 1, 1);
    EXPECT_NEAR(r.objective, o.r, 1e-6);
}

TEST(Models, ConstantBiomassZeroGivesWashoutProfile)
{
    Scenario sc = generate_example("four_tank", 0, false, ModelKind::RMX);
    for (auto& t : sc.net.tanks)
        t.x_in = 0.0; // constant biomass defaults to the inflow biomass
    auto act = activation_for(sc.net, {"21", "23", "24", "43"});
    BuiltModel bm = build_steady(sc.net, sc.model, act);
    SolveResult r = solve_named(bm.program);
    ASSERT_TRUE(r.optimal());
    SystemMatrices m = assemble_matrices(sc.net, act);
    Eigen::VectorXd s = -(m.M + m.L).inverse() * m.C * sc.net.s_in();
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(value(bm, r.values, fmt_name("T", i)), 0.0, 1e-7);
        EXPECT_NEAR(value(bm, r.values, fmt_name("S", i)), s[i], 1e-6);
    }
}

TEST(Models, EnvelopeModelAssembles)
{
    Scenario sc = generate_example("four_tank", 0, false, ModelKind::RME);
    auto act = activation_for(sc.net, {"21", "23", "24", "41"});
    BuiltModel bm = build_steady(sc.net, sc.model, act);
    int eq = 0, cones = 0;
    for (const auto& row : bm.program.linear_rows())
        eq += row.group == "envelope_eq";
    for (const auto& row : bm.program.rotated_rows())
        cones += row.group == "envelope_cone";
    EXPECT_EQ(eq, 4);
    EXPECT_GE(cones, 4);
    for (int i = 0; i < 4; ++i)
        EXPECT_TRUE(bm.program.has("beta[" + std::to_string(i + 1) + "]"));
    EXPECT_TRUE(solve_named(bm.program).optimal());
}

TEST(Models, DesignWithNoPipesEqualsSteadyBase)
{
    Scenario sc = generate_example("four_tank");
    BuiltModel d = build_design(sc.net, sc.model);
    std::vector<double> zeros(d.lambda_names.size(), 0.0);
    SolveResult a = solve_named(fix_binaries(d.program, zeros));
    BuiltModel s = build_steady(sc.net, sc.model, zeros);
    SolveResult b = solve_named(s.program);
    ASSERT_TRUE(a.optimal());
    ASSERT_TRUE(b.optimal());
    EXPECT_NEAR(a.objective, b.objective, 1e-6 * (1 + std::abs(b.objective)));
}

TEST(Models, FixedTopologyReproducesDesignObjectives)
{
    const std::pair<ModelKind, double> cases[] = {{ModelKind::RC, 8.81}, {ModelKind::RMX, 10.21}};
    for (auto [kind, want] : cases) {
        Scenario sc = generate_example("four_tank", 0, false, kind);
        BuiltModel bm = build_steady(sc.net, sc.model, activation_for(sc.net, {"21", "23", "24", "43"}));
        SolveResult r = solve_named(bm.program);
        ASSERT_TRUE(r.optimal());
        EXPECT_NEAR(r.objective, want, 0.01 * want) << to_string(kind);
    }
}

TEST(Models, DisjunctionAudit)
{
    Scenario sc = generate_example("four_tank");
    BuiltModel bm = build_design(sc.net, sc.model);
    BnbResult r = solve_mixed(bm.program, sc.solver);
    ASSERT_EQ(r.status, BnbStatus::Optimal);
    for (size_t k = 0; k < bm.candidate_pipes.size(); ++k) {
        int j = bm.candidate_pipes[k];
        const Pipe& p = sc.net.pipes[j];
        std::string label = pipe_label(sc.net, j);
        double lam = value(bm, r.values, "lambda[" + label + "]");
        double fs = value(bm, r.values, "FS[" + label + "]");
        double gs = value(bm, r.values, "GS[" + label + "]");
        double s_from = value(bm, r.values, fmt_name("S", p.from));
        double s_to = value(bm, r.values, fmt_name("S", p.to));
        if (lam > 0.5) {
            EXPECT_NEAR(fs, p.q1 * s_from, 1e-6) << label;
            EXPECT_NEAR(gs, p.d1 * (s_from - s_to), 1e-6) << label;
        } else {
            EXPECT_NEAR(fs, 0.0, 1e-6) << label;
            EXPECT_NEAR(gs, 0.0, 1e-6) << label;
        }
    }
    // water balance with the chosen pipes leaves a nonnegative inflow
    SystemMatrices m = assemble_matrices(sc.net, r.assignment);
    EXPECT_GE(m.q_in.minCoeff(), -1e-9);
}

TEST(Models, GammaAuditAndMissingGamma)
{
    Scenario sc = generate_example("four_tank");
    sc.model.gamma = 0.5;
    BuiltModel bm = build_design(sc.net, sc.model);
    bool warned = false;
    for (const auto& w : bm.warnings)
        warned |= w.find("disjunction constant") != std::string::npos;
    EXPECT_TRUE(warned);
    sc.model.gamma = 0.0;
    try {
        build_design(sc.net, sc.model);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingGamma);
    }
}

TEST(Models, MassConservationAndBoundsAtExactSolution)
{
    Scenario sc = generate_example("four_tank");
    auto act = activation_for(sc.net, {"21", "23", "24", "43"});
    BuiltModel bm = build_steady(sc.net, sc.model, act);
    SolveResult r = solve_named(bm.program);
    ASSERT_TRUE(r.optimal());
    SystemMatrices m = assemble_matrices(sc.net, act);
    double in = 0, out = 0;
    for (int i = 0; i < 4; ++i) {
        double s = value(bm, r.values, fmt_name("S", i)), x = value(bm, r.values, fmt_name("X", i));
        double t = value(bm, r.values, fmt_name("T", i));
        in += m.q_in[i] * sc.net.tanks[i].s_in;
        out += m.q_out[i] * s + sc.net.tanks[i].volume * t / sc.net.growth.y;
        // bounds from the inflow data: S <= max s_in, min x_in <= X <= max(x_in + y s_in)
        EXPECT_LE(s, 3.0 + 1e-7);
        EXPECT_GE(x, 1.0 - 1e-7);
        EXPECT_LE(x, 6.0 + 1e-7);
    }
    EXPECT_NEAR(in, out, 1e-6);
}

TEST(Models, WashoutRepulsionScalar)
{
    GradostatNetwork net = single_tank(2.0, 1.0);
    SystemMatrices m = assemble_matrices(net);
    GrowthParams g;
    g.kind = GrowthKind::Monod;
    g.mu_max = 2.0;
    // Z = 3, growth at (Z, 0) is 2 Z / (1 + Z) = 1.5, dilution 1: feasible iff delta <= 0.5
    auto feasible = [&](const GrowthParams& gp, double delta) {
        ConeBlock b = build_washout_repulsion_rows(net, m, gp, delta);
        b.set_objective(AffineExpr(0.0), true);
        return solve_named(b).optimal();
    };
    EXPECT_TRUE(feasible(g, 0.4));
    EXPECT_FALSE(feasible(g, 0.6));
    GrowthParams c;
    c.kind = GrowthKind::Contois;
    c.mu_max = 1.2; // constant growth at zero biomass
    EXPECT_TRUE(feasible(c, 0.15));
    EXPECT_FALSE(feasible(c, 0.25));
    EXPECT_THROW(build_washout_repulsion_rows(net, m, g, 0.0), Error);
}

TEST(Models, DynamicSinglePeriodIsSteadyState)
{
    Scenario sc = generate_example("dynamic_four_tank");
    for (int i = 0; i < 4; ++i) {
        sc.net.tanks[i].s_in = 1.0 + i;
        sc.net.tanks[i].x_in = 2.0;
    }
    DynamicSpec d;
    d.periods = 1;
    d.dt = 0.7;
    d.periodic = true;
    d.x_in_decision = false;
    d.s_in = {sc.net.s_in()};
    d.x_in = {sc.net.x_in()};
    ModelOptions opt;
    BuiltModel dyn = build_dynamic(sc.net, opt, d);
    BuiltModel st = build_steady(sc.net, opt);
    SolveResult a = solve_named(dyn.program), b = solve_named(st.program);
    ASSERT_TRUE(a.optimal());
    ASSERT_TRUE(b.optimal());
    EXPECT_NEAR(a.objective, b.objective, 1e-6 * (1 + b.objective));
}

TEST(Models, DynamicZeroInflowStaysZero)
{
    Scenario sc = generate_example("dynamic_four_tank");
    DynamicSpec d;
    d.periods = 5;
    d.periodic = false;
    d.x_in_decision = false;
    d.s_in.assign(5, Eigen::VectorXd::Zero(4));
    d.x_in.assign(5, Eigen::VectorXd::Zero(4));
    d.s0 = d.x0 = Eigen::VectorXd::Zero(4);
    ModelOptions opt;
    BuiltModel bm = build_dynamic(sc.net, opt, d);
    SolveResult r = solve_named(bm.program);
    ASSERT_TRUE(r.optimal());
    EXPECT_NEAR(r.objective, 0.0, 1e-7);
    EXPECT_LT(r.values.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Models, DynamicEulerConsistency)
{
    // fixed horizon, halved steps; time-integrated objective converges at first order
    Scenario sc = generate_example("dynamic_four_tank");
    const double horizon = 3.0;
    // steps below V / |M_ii| for every tank, else explicit Euler leaves the cone
    std::vector<double> j;
    for (double dt : {0.1, 0.05, 0.025}) {
        DynamicSpec d;
        d.periods = static_cast<int>(std::lround(horizon / dt));
        d.dt = dt;
        d.periodic = false;
        d.x_in_decision = false;
        for (int t = 0; t < d.periods; ++t) {
            double time = t * dt;
            Eigen::VectorXd s(4), x(4);
            s << 1.0 + 0.5 * std::sin(time), 0.5, 1.0, 1.0 + 0.5 * std::cos(time);
            x << 1.0, 1.0, 0.5, 0.5 + 0.25 * std::sin(time);
            d.s_in.push_back(s);
            d.x_in.push_back(x);
        }
        d.s0 = Eigen::VectorXd::Constant(4, 0.5);
        d.x0 = Eigen::VectorXd::Constant(4, 1.0);
        ModelOptions opt;
        opt.underestimators = false;
        BuiltModel bm = build_dynamic(sc.net, opt, d);
        SolveResult r = solve_named(bm.program);
        ASSERT_TRUE(r.optimal()) << to_string(r.status) << " dt " << dt;
        j.push_back(r.objective * dt);
    }
    double ratio = (j[0] - j[1]) / (j[1] - j[2]);
    EXPECT_GT(ratio, 1.6) << j[0] << " " << j[1] << " " << j[2];
    EXPECT_LT(ratio, 2.4) << j[0] << " " << j[1] << " " << j[2];
}
