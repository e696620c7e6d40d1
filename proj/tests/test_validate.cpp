#include <gtest/gtest.h>

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

struct Solved {
    Scenario sc;
    std::vector<double> act;
    BuiltModel bm;
    SolveResult r;
    SystemMatrices m;
};

Solved four_tank(const char* name, ModelKind kind)
{
    Solved s{generate_example(name, 0, false, kind), {}, {}, {}, {}};
    s.act = activation_for(s.sc.net, {"21", "23", "24", "43"});
    s.bm = build_steady(s.sc.net, s.sc.model, s.act);
    s.r = solve_named(s.bm.program);
    s.m = assemble_matrices(s.sc.net, s.act);
    return s;
}

} // namespace

TEST(Validate, FourTankFullObjectiveIsExactAndCertified)
{
    Solved s = four_tank("four_tank", ModelKind::RC);
    ASSERT_TRUE(s.r.optimal());
    ExactnessReport ex = exactness(s.bm.program, s.r.values, s.bm.growth, 4);
    EXPECT_LE(ex.metric, 1e-6);
    TankState st = tank_state(s.bm.program, s.r.values, s.bm.growth, 4);
    CertificateReport c = exactness_certificate(s.sc.net, s.m, s.bm.growth, st,
                                               objective_gradient(s.sc.net, {}), ex.metric);
    EXPECT_TRUE(c.hypotheses);
    EXPECT_TRUE(c.rho_positive);
    ASSERT_TRUE(c.agrees.has_value());
    EXPECT_TRUE(*c.agrees);
}

TEST(Validate, ModifiedObjectiveBreaksHypotheses)
{
    Solved s = four_tank("four_tank_modified", ModelKind::RC);
    ASSERT_TRUE(s.r.optimal());
    ExactnessReport ex = exactness(s.bm.program, s.r.values, s.bm.growth, 4);
    EXPECT_NEAR(ex.metric, 0.66, 0.15 * 0.66);
    EXPECT_TRUE(ex.tanks[0].under_binding);
    for (int i = 1; i < 4; ++i)
        EXPECT_TRUE(ex.tanks[i].exact) << "tank " << i + 1;
    TankState st = tank_state(s.bm.program, s.r.values, s.bm.growth, 4);
    Eigen::VectorXd grad = objective_gradient(s.sc.net, {1, 2, 3});
    EXPECT_EQ(grad[0], 0.0);
    CertificateReport c = exactness_certificate(s.sc.net, s.m, s.bm.growth, st, grad, ex.metric);
    EXPECT_FALSE(c.hypotheses);
}

TEST(Validate, ZeroGrowthSolutionHasUnitGap)
{
    Solved s = four_tank("four_tank", ModelKind::RC);
    ASSERT_TRUE(s.r.optimal());
    Eigen::VectorXd v = s.r.values;
    for (int i = 0; i < 4; ++i)
        v[s.bm.program.index("T[" + std::to_string(i + 1) + "]")] = 0.0;
    ExactnessReport ex = exactness(s.bm.program, v, s.bm.growth, 4);
    for (const auto& g : ex.tanks)
        EXPECT_NEAR(g.rel, 1.0, 1e-12);
    EXPECT_NEAR(ex.metric, 1.0, 1e-12);
}

TEST(Validate, ScalarCertificate)
{
    // one tank, q = V = 1, Contois with unit parameters: W and rho are scalars
    GradostatNetwork net;
    Tank t;
    t.q_in = 1.0;
    t.q_out = 1.0;
    t.s_in = 1.0;
    t.x_in = 1.0;
    net.tanks.push_back(t);
    ModelOptions opt;
    BuiltModel bm = build_steady(net, opt);
    SolveResult r = solve_named(bm.program);
    ASSERT_TRUE(r.optimal());
    TankState st = tank_state(bm.program, r.values, bm.growth, 1);
    double s = st.s[0], x = st.x[0];
    // hand derivatives of mu s x / (k x + s)
    double drs = x * x / ((x + s) * (x + s)), drx = s * s / ((x + s) * (x + s));
    double w = -1.0 - (drs - drx);
    double rho = (-1.0 * 1.0) / w; // W^-1 (M' + L) V^-1 grad F with grad F = V = 1
    SystemMatrices m = assemble_matrices(net);
    CertificateReport c = exactness_certificate(net, m, bm.growth, st, objective_gradient(net, {}));
    ASSERT_TRUE(c.rho_computed);
    EXPECT_NEAR(c.rho[0], rho, 1e-9);
    EXPECT_GT(c.rho[0], 0.0);
}

TEST(Validate, KktResidualsAtOptimalSolve)
{
    for (auto kind : {ModelKind::RC, ModelKind::RMX}) {
        Solved s = four_tank("four_tank", kind);
        ASSERT_TRUE(s.r.optimal());
        KktReport k = kkt_residuals(s.bm.program, s.r, s.sc.net, s.m, s.bm.growth,
                                    objective_gradient(s.sc.net, {}));
        ASSERT_FALSE(k.families.empty());
        for (const auto& f : k.families) {
            if (f.checked == 0)
                continue;
            double tol = f.name == "complementarity" ? 1e-8 : 1e-6 * (1 + k.rho.cwiseAbs().maxCoeff());
            EXPECT_LE(f.residual, tol) << to_string(kind) << " " << f.name;
        }
    }
}

TEST(Validate, KktNeedsDuals)
{
    Solved s = four_tank("four_tank", ModelKind::RC);
    SolveResult bad;
    bad.status = SolveStatus::PrimalInfeasible;
    try {
        kkt_residuals(s.bm.program, bad, s.sc.net, s.m, s.bm.growth, objective_gradient(s.sc.net, {}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingDuals);
    }
}

TEST(Validate, OdeFromExactSteadyStateStaysPut)
{
    Solved s = four_tank("four_tank", ModelKind::RC);
    ASSERT_TRUE(s.r.optimal());
    TankState st = tank_state(s.bm.program, s.r.values, s.bm.growth, 4);
    Trajectory tr = ode_simulate(s.sc.net, s.m, s.bm.growth, st.s, st.x, 20.0, 0.01);
    EXPECT_LE(tr.max_residual, 1e-6 * (1 + st.x.maxCoeff()));
}

TEST(Validate, WashoutManifoldIsInvariant)
{
    Scenario sc = generate_example("four_tank");
    for (auto& t : sc.net.tanks)
        t.x_in = 0.0;
    auto act = activation_for(sc.net, {"21", "23", "24", "43"});
    SystemMatrices m = assemble_matrices(sc.net, act);
    GrowthParams g = growth_for(sc.net, ModelKind::RC);
    Trajectory tr = ode_simulate(sc.net, m, g, Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4), 10.0, 0.01);
    for (const auto& x : tr.x)
        EXPECT_EQ(x.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Validate, OdeDivergenceIsReported)
{
    Scenario sc = generate_example("four_tank");
    auto act = activation_for(sc.net, {"21", "23", "24", "43"});
    SystemMatrices m = assemble_matrices(sc.net, act);
    GrowthParams g = growth_for(sc.net, ModelKind::RC);
    try {
        ode_simulate(sc.net, m, g, Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(4), 100.0, 10.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StepTooLarge);
    }
}

TEST(Validate, FedIrreducibleRegime)
{
    auto o = gradostat::testing::fed_irreducible_regime(20, 41);
    EXPECT_EQ(o.cases, 20);
    EXPECT_TRUE(o.ok) << o.detail;
}

TEST(Validate, OdeOracle)
{
    auto o = gradostat::testing::ode_oracle(10, 43);
    EXPECT_TRUE(o.ok) << o.detail;
}
