#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "gradostat/scenario.hpp"

namespace gradostat {

std::vector<std::string> example_names()
{
    return {"four_tank", "four_tank_modified", "wheel", "dynamic_four_tank"};
}

namespace {

void unit_growth(GradostatNetwork& net)
{
    net.growth.mu_max = 1.0;
    net.growth.k = 1.0;
    net.growth.y = 1.0;
}

Pipe candidate(int from, int to)
{
    Pipe p;
    p.from = from;
    p.to = to;
    p.q1 = 1.0;
    p.d1 = 0.3;
    p.cost = 1.0;
    p.candidate = true;
    return p;
}

Scenario four_tank(ModelKind kind)
{
    Scenario sc;
    sc.name = "four_tank";
    sc.mode = RunMode::Design;
    const double V[] = {1, 2, 3, 4}, qo[] = {2, 1, 3, 2}, si[] = {1, 3, 1, 2}, xi[] = {4, 3, 2, 1};
    for (int i = 0; i < 4; ++i) {
        Tank t;
        t.volume = V[i];
        t.q_out = qo[i];
        t.s_in = si[i];
        t.x_in = xi[i];
        sc.net.tanks.push_back(t);
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j)
                sc.net.pipes.push_back(candidate(i, j));
    unit_growth(sc.net);
    sc.model.kind = kind;
    sc.model.gamma = 50.0;
    sc.model.omega.budget = 4.0;
    return sc;
}

Scenario wheel(int n, bool hard, ModelKind kind)
{
    if (n < 3)
        throw Error(ErrorCode::UnknownExample, "wheel needs at least 3 tanks");
    Scenario sc;
    sc.name = fmt::format("wheel_{}_{}", hard ? "hard" : "easy", n);
    sc.mode = RunMode::Design;
    for (int i = 1; i <= n; ++i) {
        Tank t;
        t.volume = hard ? 1.0 + (i % 6) : i;
        t.q_out = hard ? 1.0 + (i % 7) : 1.0;
        t.s_in = i;
        t.x_in = n - i + 1;
        sc.net.tanks.push_back(t);
    }
    // hub to rim both ways, then the rim ring both ways
    for (int i = 1; i < n; ++i) {
        sc.net.pipes.push_back(candidate(0, i));
        sc.net.pipes.push_back(candidate(i, 0));
    }
    for (int i = 1; i < n; ++i) {
        int j = i + 1 < n ? i + 1 : 1;
        sc.net.pipes.push_back(candidate(i, j));
        sc.net.pipes.push_back(candidate(j, i));
    }
    unit_growth(sc.net);
    sc.model.kind = kind;
    sc.model.gamma = 50.0;
    sc.model.omega.budget = 1.5 * n;
    return sc;
}

Scenario dynamic_four_tank(ModelKind kind)
{
    Scenario sc;
    sc.name = "dynamic_four_tank";
    sc.mode = RunMode::Dynamic;
    const double qi[] = {2, 1, 1, 1};
    for (int i = 0; i < 4; ++i) {
        Tank t;
        t.volume = 1.0;
        t.q_in = qi[i];
        sc.net.tanks.push_back(t);
    }
    auto fixed = [](int from, int to, double q) {
        Pipe p;
        p.from = from;
        p.to = to;
        p.q0 = q;
        p.d0 = 0.3 * q;
        return p;
    };
    sc.net.pipes = {fixed(0, 1, 1.0), fixed(1, 2, 2.0), fixed(2, 3, 1.0), fixed(3, 1, 1.0)};
    unit_growth(sc.net);
    sc.model.kind = kind;
    sc.model.underestimators = false;
    sc.model.omega.biomass_inflow_cap = 3.0;

    DynamicSpec d;
    d.periods = 1000;
    d.dt = 1.0;
    d.alpha = 1.0;
    d.periodic = true;
    d.x_in_decision = true;
    const double tau = d.periods;
    for (int t = 1; t <= d.periods; ++t) {
        Eigen::VectorXd s(4);
        s[0] = 1.0 + std::sin(4.0 * std::numbers::pi * t / tau);
        s[1] = 0.0;
        s[2] = (t > tau / 4.0 && t <= 3.0 * tau / 4.0) ? 0.5 : 0.0;
        s[3] = 1.0 + std::cos(4.0 * std::numbers::pi * t / tau);
        d.s_in.push_back(s);
    }
    sc.dynamic = d;
    return sc;
}

} // namespace

Scenario generate_example(const std::string& name, int size, bool hard, ModelKind kind)
{
    if (name == "four_tank")
        return four_tank(kind);
    if (name == "four_tank_modified") {
        Scenario sc = four_tank(kind);
        sc.name = name;
        sc.model.objective_tanks = {1, 2, 3};
        return sc;
    }
    if (name == "wheel")
        return wheel(size, hard, kind);
    if (name == "dynamic_four_tank")
        return dynamic_four_tank(kind);
    throw Error(ErrorCode::UnknownExample, "unknown example '" + name + "'");
}

} // namespace gradostat
