#include "gradostat/run.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>

#include "gradostat/report.hpp"
#include "gradostat/validate.hpp"

namespace gradostat {

int exit_code_for(ErrorCode e)
{
    switch (e) {
    case ErrorCode::Infeasible: return kExitInfeasible;
    case ErrorCode::SingularSystem:
    case ErrorCode::MissingDuals:
    case ErrorCode::StepTooLarge:
    case ErrorCode::TooLarge: return kExitSolverFailure;
    default: return kExitBadInput;
    }
}

void apply_overrides(Scenario& sc, const RunOverrides& o)
{
    if (o.mode)
        sc.mode = *o.mode;
    if (o.model)
        sc.model.kind = *o.model;
    if (o.gamma)
        sc.model.gamma = *o.gamma;
    if (o.gap) {
        if (!(*o.gap > 0.0))
            throw Error(ErrorCode::BadInput, "gap must be positive");
        sc.solver.rel_gap = *o.gap;
    }
    if (o.deterministic)
        sc.solver.deterministic = *o.deterministic;
    if (o.out_dir)
        sc.out_dir = *o.out_dir;
    if (sc.mode == RunMode::Dynamic && !sc.dynamic)
        throw Error(ErrorCode::BadInput, "scenario has no dynamic section");
}

namespace {

namespace fs = std::filesystem;

std::string yes(bool b) { return b ? "yes" : "no"; }

struct Writer {
    const Scenario& sc;
    RunOutcome& out;
    std::vector<std::pair<std::string, std::string>> rows;

    void kv(const std::string& k, const std::string& v) { rows.emplace_back(k, v); }
    void kv(const std::string& k, double v) { rows.emplace_back(k, csv_number(v)); }
    std::string path(const std::string& name) const { return (fs::path(sc.out_dir) / name).string(); }
    void file(const std::string& name, const std::string& text)
    {
        write_text(path(name), text);
        out.files.push_back(path(name));
    }
    void table(const std::string& name, const CsvTable& t) { file(name, t.str()); }
    void finish()
    {
        CsvTable rep({"key", "value"});
        for (const auto& [k, v] : rows)
            rep.add({k, v});
        table("report.csv", rep);
        out.report = rows;
    }
};

int status_exit(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return kExitOk;
    case SolveStatus::PrimalInfeasible: return kExitInfeasible;
    default: return kExitSolverFailure;
    }
}

int status_exit(BnbStatus s)
{
    switch (s) {
    case BnbStatus::Optimal: return kExitOk;
    case BnbStatus::Infeasible: return kExitInfeasible;
    default: return kExitSolverFailure;
    }
}

void solution_table(Writer& w, const ExactnessReport& ex, const ConicProgram& p,
                    const Eigen::VectorXd& values, const Scenario& sc)
{
    CsvTable t({"period", "tank", "s_in", "x_in", "S", "X", "T", "r", "rel_gap", "exact",
                "under_binding"});
    for (const auto& g : ex.tanks) {
        double sin = sc.net.tanks[g.tank].s_in, xin = sc.net.tanks[g.tank].x_in;
        if (g.period > 0) {
            const auto& d = *sc.dynamic;
            sin = d.s_in[g.period - 1][g.tank];
            std::string name = fmt::format("Xin[{},{}]", g.tank + 1, g.period);
            xin = p.has(name) ? values[p.index(name)]
                              : (d.x_in.empty() ? NAN : d.x_in[g.period - 1][g.tank]);
        } else if (sc.model.inflow_decisions) {
            std::string sn = fmt::format("Sin[{}]", g.tank + 1), xn = fmt::format("Xin[{}]", g.tank + 1);
            if (p.has(sn))
                sin = values[p.index(sn)];
            if (p.has(xn))
                xin = values[p.index(xn)];
        }
        t.add({g.period > 0 ? std::to_string(g.period) : "", std::to_string(g.tank + 1),
               csv_number(sin), csv_number(xin), csv_number(g.s), csv_number(g.x), csv_number(g.t),
               csv_number(g.r), g.excluded ? "" : csv_number(g.rel), yes(g.exact),
               yes(g.under_binding)});
    }
    w.table("solution.csv", t);
}

void exactness_rows(Writer& w, const ExactnessReport& ex)
{
    w.kv("exactness", ex.metric);
    w.kv("exactness_excluded_tanks", std::to_string(ex.excluded));
    w.kv("min_gap", ex.min_gap);
    if (ex.worst >= 0)
        w.kv("worst_tank", std::to_string(ex.tanks[ex.worst].tank + 1));
}

// certificate, KKT and ODE checks for one fixed topology
void validate_fixed(Writer& w, const Scenario& sc, const std::vector<double>& activation,
                    const BuiltModel& bm, const Eigen::VectorXd& values, double metric,
                    std::ostream& log)
{
    const auto& net = sc.net;
    SystemMatrices m = assemble_matrices(net, activation);
    Eigen::VectorXd grad = objective_gradient(net, objective_set(net, sc.model));
    TankState st = tank_state(bm.program, values, bm.growth, net.size());
    CertificateReport c = exactness_certificate(net, m, bm.growth, st, grad, metric);
    w.kv("outflow_connected", yes(c.outflow_connected));
    w.kv("irreducible", yes(c.irreducible));
    w.kv("fully_fed", yes(c.fully_fed));
    w.kv("derivative_condition", yes(c.assumption_holds));
    w.kv("min_derivative_margin", c.margin.size() ? c.margin.minCoeff() : 0.0);
    w.kv("certificate_hypotheses", yes(c.hypotheses));
    w.kv("certificate_rho_positive", yes(c.rho_positive));
    w.kv("certificate_min_rho", c.rho_computed ? c.rho.minCoeff() : NAN);
    w.kv("w_eig_min", c.w_eig_min);
    w.kv("w_eig_max", c.w_eig_max);
    // the theorem speaks about the exact kinetics, not the envelope relaxation
    if (sc.model.kind == ModelKind::RME)
        w.kv("certificate_agrees", "not applicable (envelope model)");
    else
        w.kv("certificate_agrees", c.agrees ? yes(*c.agrees) : "");
    if (!c.note.empty())
        w.kv("certificate_note", c.note);

    // KKT needs the balance multipliers of the plain fixed-topology model
    if (sc.model.kind == ModelKind::RME) {
        w.kv("kkt", "unchecked (envelope model)");
    } else {
        BuiltModel plain = build_steady(net, sc.model, activation);
        SolveResult r = solve_named(plain.program, sc.solver.ipm);
        w.kv("fixed_topology_status", to_string(r.status));
        if (r.optimal())
            w.kv("fixed_topology_objective", r.objective);
        try {
            KktReport k = kkt_residuals(plain.program, r, net, m, plain.growth, grad);
            for (const auto& f : k.families) {
                w.kv("kkt_" + f.name, f.residual);
                w.kv("kkt_" + f.name + "_checked", std::to_string(f.checked));
                w.kv("kkt_" + f.name + "_unchecked", std::to_string(f.unchecked));
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::MissingDuals)
                throw;
            w.kv("kkt", std::string("unchecked: ") + e.what());
        }
    }

    // dynamics at the solution, then a short simulation from it
    Eigen::VectorXd sin = net.s_in(), xin = net.x_in();
    if (sc.model.inflow_decisions)
        for (int i = 0; i < net.size(); ++i) {
            std::string sn = fmt::format("Sin[{}]", i + 1), xn = fmt::format("Xin[{}]", i + 1);
            if (bm.program.has(sn))
                sin[i] = values[bm.program.index(sn)];
            if (bm.program.has(xn))
                xin[i] = values[bm.program.index(xn)];
        }
    double res = steady_residual(net, m, bm.growth, st.s, st.x, sin, xin);
    w.kv("ode_steady_residual", res);
    try {
        GradostatNetwork sim = net;
        for (int i = 0; i < net.size(); ++i) {
            sim.tanks[i].s_in = sin[i];
            sim.tanks[i].x_in = xin[i];
        }
        Trajectory tr = ode_simulate(sim, m, bm.growth, st.s, st.x, 10.0, 0.01);
        double drift = 0.0;
        for (size_t k = 0; k < tr.s.size(); ++k)
            drift = std::max({drift, (tr.s[k] - st.s).cwiseAbs().maxCoeff(),
                              (tr.x[k] - st.x).cwiseAbs().maxCoeff()});
        w.kv("ode_drift", drift);
        w.kv("ode_final_residual", tr.final_residual);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::StepTooLarge)
            throw;
        w.kv("ode_drift", std::string("diverged: ") + e.what());
    }
    fmt::print(log, "certificate: hypotheses {} rho>0 {}  ode residual {:.3g}\n", yes(c.hypotheses),
               yes(c.rho_positive), res);
}

void run_steady(Writer& w, const Scenario& sc, std::ostream& log)
{
    BuiltModel bm = build_steady(sc.net, sc.model, sc.activation);
    for (const auto& m : bm.warnings)
        fmt::print(log, "warning: {}\n", m);
    SolveResult r = solve_named(bm.program, sc.solver.ipm);
    w.out.status = to_string(r.status);
    w.out.exit_code = status_exit(r.status);
    w.kv("status", w.out.status);
    w.kv("iterations", std::to_string(r.iterations));
    if (!r.optimal()) {
        fmt::print(log, "solve ended with {}\n", w.out.status);
        return;
    }
    w.out.objective = r.objective;
    w.kv("objective", r.objective);
    w.kv("dual_objective", r.dual_objective);
    ExactnessReport ex = exactness(bm.program, r.values, bm.growth, sc.net.size());
    w.out.exactness = ex.metric;
    exactness_rows(w, ex);
    solution_table(w, ex, bm.program, r.values, sc);
    fmt::print(log, "objective {:.6f}  exactness {:.4g}\n", r.objective, ex.metric);
    validate_fixed(w, sc, sc.activation, bm, r.values, ex.metric, log);
}

void run_design(Writer& w, const Scenario& sc, std::ostream& log)
{
    BuiltModel bm = build_design(sc.net, sc.model);
    for (const auto& m : bm.warnings)
        fmt::print(log, "warning: {}\n", m);
    BnbResult r = solve_mixed(bm.program, sc.solver);
    w.out.status = to_string(r.status);
    w.out.exit_code = status_exit(r.status);
    w.kv("status", w.out.status);
    w.kv("nodes", std::to_string(r.nodes));
    w.kv("unresolved_nodes", std::to_string(r.unresolved));
    w.file("nodes.log", format_log(r));
    if (r.assignment.empty()) {
        fmt::print(log, "search ended with {} and no incumbent\n", w.out.status);
        return;
    }
    w.out.objective = r.objective;
    w.kv("objective", r.objective);
    w.kv("bound", r.bound);
    w.kv("gap", r.gap);

    CsvTable pipes({"pipe", "from", "to", "cost", "chosen"});
    for (size_t k = 0; k < bm.candidate_pipes.size(); ++k) {
        int j = bm.candidate_pipes[k];
        const auto& p = sc.net.pipes[j];
        std::string label = pipe_label(sc.net, j);
        bool on = r.assignment[k] > 0.5;
        if (on)
            w.out.pipes.push_back(label);
        pipes.add({label, std::to_string(p.from + 1), std::to_string(p.to + 1), csv_number(p.cost),
                   yes(on)});
    }
    w.table("design.csv", pipes);
    std::string chosen;
    for (const auto& p : w.out.pipes)
        chosen += (chosen.empty() ? "" : " ") + p;
    w.kv("pipes", chosen);

    ExactnessReport ex = exactness(bm.program, r.values, bm.growth, sc.net.size());
    w.out.exactness = ex.metric;
    exactness_rows(w, ex);
    solution_table(w, ex, bm.program, r.values, sc);
    fmt::print(log, "objective {:.6f}  pipes {}  exactness {:.4g}  nodes {}\n", r.objective, chosen,
               ex.metric, r.nodes);
    Scenario fixed = sc;
    fixed.model.clip_gamma = false;
    validate_fixed(w, fixed, r.assignment, bm, r.values, ex.metric, log);
}

void run_dynamic(Writer& w, const Scenario& sc, std::ostream& log)
{
    const DynamicSpec& d = *sc.dynamic;
    BuiltModel bm = build_dynamic(sc.net, sc.model, d);
    for (const auto& m : bm.warnings)
        fmt::print(log, "warning: {}\n", m);
    SolveResult r = solve_named(bm.program, sc.solver.ipm);
    w.out.status = to_string(r.status);
    w.out.exit_code = status_exit(r.status);
    w.kv("status", w.out.status);
    w.kv("iterations", std::to_string(r.iterations));
    w.kv("variables", std::to_string(bm.program.num_variables()));
    if (!r.optimal()) {
        fmt::print(log, "solve ended with {}\n", w.out.status);
        return;
    }
    const int n = sc.net.size(), tau = d.periods;
    w.out.objective = r.objective;
    w.kv("objective", r.objective);
    ExactnessReport ex = exactness(bm.program, r.values, bm.growth, n, tau);
    w.out.exactness = ex.metric;
    exactness_rows(w, ex);
    solution_table(w, ex, bm.program, r.values, sc);

    const SystemMatrices& m = *bm.mats;
    MassLedger led = dynamic_mass_ledger(bm.program, r.values, sc.net, m, bm.growth, d);
    w.kv("substrate_in", led.substrate_in);
    w.kv("substrate_out", led.substrate_out);
    w.kv("substrate_consumed", led.substrate_consumed);
    w.kv("substrate_closure", led.substrate_closure);
    w.kv("biomass_closure", led.biomass_closure);
    w.kv("boundary_residual", led.boundary_residual);

    // series for the plots and the replay
    std::vector<Eigen::VectorXd> xin(tau, Eigen::VectorXd::Zero(n));
    std::vector<TankState> states;
    for (int t = 1; t <= tau; ++t) {
        states.push_back(tank_state(bm.program, r.values, bm.growth, n, t));
        for (int i = 0; i < n; ++i) {
            std::string name = fmt::format("Xin[{},{}]", i + 1, t);
            xin[t - 1][i] = bm.program.has(name) ? r.values[bm.program.index(name)]
                                                 : (d.x_in.empty() ? 0.0 : d.x_in[t - 1][i]);
        }
    }
    if (bm.growth.kind != GrowthKind::MonodConstantBiomass) {
        // replay the inflow plan through the continuous dynamics
        OdeInputs in{d.s_in, xin, d.dt};
        try {
            Trajectory tr = ode_simulate(sc.net, m, bm.growth, states[0].s, states[0].x, tau * d.dt,
                                         d.dt / 10.0, in);
            double dev = 0.0;
            for (int t = 0; t < tau; ++t) {
                const auto& s = tr.s[static_cast<size_t>(t) * 10];
                dev = std::max(dev, (s - states[t].s).cwiseAbs().maxCoeff());
            }
            w.kv("replay_max_substrate_deviation", dev);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::StepTooLarge)
                throw;
            w.kv("replay_max_substrate_deviation", std::string("diverged: ") + e.what());
        }
    }

    std::vector<double> ts(tau);
    for (int t = 0; t < tau; ++t)
        ts[t] = t + 1;
    auto panel = [&](const std::string& title, const std::string& unit, auto get) {
        Panel p{title, unit, {}};
        for (int i = 0; i < n; ++i) {
            Series s{fmt::format("tank {}", i + 1), ts, std::vector<double>(tau)};
            for (int t = 0; t < tau; ++t)
                s.y[t] = get(t, i);
            p.series.push_back(std::move(s));
        }
        return p;
    };
    w.file("inputs.svg",
           svg_panels({panel("S_in(t)", "g/L", [&](int t, int i) { return d.s_in[t][i]; }),
                       panel("X_in(t)", "g/L", [&](int t, int i) { return xin[t][i]; })},
                      "period"));
    std::vector<Panel> sp = {panel("S(t)", "g/L", [&](int t, int i) { return states[t].s[i]; })};
    if (bm.growth.kind != GrowthKind::MonodConstantBiomass)
        sp.push_back(panel("X(t)", "g/L", [&](int t, int i) { return states[t].x[i]; }));
    sp.push_back(panel("T(t)", "g/L/h", [&](int t, int i) { return states[t].t[i]; }));
    w.file("states.svg", svg_panels(sp, "period"));
    fmt::print(log, "objective {:.6f}  exactness {:.4g}  substrate closure {:.3g}\n", r.objective,
               ex.metric, led.substrate_closure);
}

} // namespace

RunOutcome run_scenario(const Scenario& sc, std::ostream& log)
{
    auto t0 = std::chrono::steady_clock::now();
    RunOutcome out;
    fs::create_directories(sc.out_dir);
    Writer w{sc, out, {}};
    w.kv("scenario", sc.name);
    w.kv("mode", to_string(sc.mode));
    w.kv("model", to_string(sc.model.kind));
    save_scenario(sc, w.path("scenario.yaml"));
    out.files.push_back(w.path("scenario.yaml"));
    switch (sc.mode) {
    case RunMode::Steady: run_steady(w, sc, log); break;
    case RunMode::Design: run_design(w, sc, log); break;
    case RunMode::Dynamic:
        if (!sc.dynamic)
            throw Error(ErrorCode::BadInput, "scenario has no dynamic section");
        run_dynamic(w, sc, log);
        break;
    }
    w.kv("exit_code", std::to_string(out.exit_code));
    w.finish();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // timing lives apart so the other artifacts are reproducible byte for byte
    CsvTable timing({"key", "value"});
    timing.add({"seconds", fmt::format("{:.3f}", out.seconds)});
    w.table("timing.csv", timing);
    return out;
}

} // namespace gradostat
