#include "gradostat/scenario.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace gradostat {

const char* to_string(RunMode m)
{
    switch (m) {
    case RunMode::Steady: return "steady";
    case RunMode::Design: return "design";
    case RunMode::Dynamic: return "dynamic";
    }
    return "unknown";
}

RunMode parse_run_mode(const std::string& s)
{
    if (s == "steady")
        return RunMode::Steady;
    if (s == "design")
        return RunMode::Design;
    if (s == "dynamic")
        return RunMode::Dynamic;
    throw Error(ErrorCode::BadInput, "unknown mode '" + s + "' (expected steady, design or dynamic)");
}

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg)
{
    throw Error(ErrorCode::BadInput, fmt::format("line {}: {}", n.Mark().line + 1, msg));
}

// rejects keys outside the schema
void allow(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!map.IsMap())
        fail(map, where + " must be a mapping");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : map) {
        auto key = kv.first.as<std::string>();
        if (!ok.count(key))
            fail(kv.first, fmt::format("unknown key '{}' in {}", key, where));
    }
}

const YAML::Node need(const YAML::Node& map, const char* key, const std::string& where)
{
    YAML::Node n = map[key];
    if (!n)
        fail(map, fmt::format("missing key '{}' in {}", key, where));
    return n;
}

template <class T>
T read(const YAML::Node& n, const std::string& what)
{
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        fail(n, fmt::format("'{}' has the wrong type", what));
    }
}

double num(const YAML::Node& map, const char* key, double dflt)
{
    YAML::Node n = map[key];
    return n ? read<double>(n, key) : dflt;
}

double nonneg(const YAML::Node& map, const char* key, const std::string& where, double dflt)
{
    double v = num(map, key, dflt);
    if (v < 0.0)
        fail(map[key], fmt::format("'{}' in {} must be nonnegative", key, where));
    return v;
}

std::optional<double> opt_num(const YAML::Node& map, const char* key)
{
    YAML::Node n = map[key];
    if (!n || n.IsNull())
        return std::nullopt;
    return read<double>(n, key);
}

std::vector<double> list(const YAML::Node& n, const std::string& what)
{
    if (!n.IsSequence())
        fail(n, what + " must be a list");
    std::vector<double> out;
    for (const auto& e : n)
        out.push_back(read<double>(e, what));
    return out;
}

Eigen::VectorXd vec(const YAML::Node& n, const std::string& what)
{
    auto v = list(n, what);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

// tank index from a 1-based number
int tank_ref(const YAML::Node& n, int tanks, const std::string& what)
{
    int i = read<int>(n, what);
    if (i < 1 || i > tanks)
        fail(n, fmt::format("{} refers to tank {} but there are {} tanks", what, i, tanks));
    return i - 1;
}

// per-tank series stored tank-major: one list per tank, one entry per period
std::vector<Eigen::VectorXd> series(const YAML::Node& n, int tanks, int periods,
                                    const std::string& what)
{
    if (!n.IsSequence() || static_cast<int>(n.size()) != tanks)
        fail(n, fmt::format("{} needs one list per tank ({})", what, tanks));
    std::vector<Eigen::VectorXd> out(periods, Eigen::VectorXd(tanks));
    for (int i = 0; i < tanks; ++i) {
        auto row = list(n[i], what);
        if (static_cast<int>(row.size()) != periods)
            fail(n[i], fmt::format("{} for tank {} has {} values, expected {}", what, i + 1,
                                   row.size(), periods));
        for (int t = 0; t < periods; ++t)
            out[t][i] = row[t];
    }
    return out;
}

Scenario from_yaml(const YAML::Node& root)
{
    allow(root, "scenario",
          {"schema_version", "name", "mode", "model", "growth", "tanks", "pipes", "options", "omega",
           "dynamic", "solver", "output"});
    int version = read<int>(need(root, "schema_version", "scenario"), "schema_version");
    if (version != Scenario::kSchemaVersion)
        fail(root["schema_version"], fmt::format("unsupported schema_version {} (expected {})",
                                                 version, Scenario::kSchemaVersion));
    Scenario sc;
    sc.name = root["name"] ? read<std::string>(root["name"], "name") : "";
    YAML::Node mode = need(root, "mode", "scenario");
    try {
        sc.mode = parse_run_mode(read<std::string>(mode, "mode"));
    } catch (const Error& e) {
        fail(mode, e.what());
    }
    if (YAML::Node model = root["model"]) {
        try {
            sc.model.kind = parse_model_kind(read<std::string>(model, "model"));
        } catch (const Error& e) {
            fail(model, e.what());
        }
    }

    YAML::Node gr = need(root, "growth", "scenario");
    allow(gr, "growth", {"mu_max_per_h", "k_half_sat_g_per_l", "yield_ratio", "x_c_g_per_l"});
    sc.net.growth.mu_max = read<double>(need(gr, "mu_max_per_h", "growth"), "mu_max_per_h");
    sc.net.growth.k = read<double>(need(gr, "k_half_sat_g_per_l", "growth"), "k_half_sat_g_per_l");
    sc.net.growth.y = read<double>(need(gr, "yield_ratio", "growth"), "yield_ratio");
    if (gr["x_c_g_per_l"])
        sc.net.growth.x_c = vec(gr["x_c_g_per_l"], "x_c_g_per_l");
    if (!(sc.net.growth.mu_max > 0 && sc.net.growth.k > 0 && sc.net.growth.y > 0))
        fail(gr, "growth parameters must be positive");

    YAML::Node tanks = need(root, "tanks", "scenario");
    if (!tanks.IsSequence() || tanks.size() == 0)
        fail(tanks, "tanks must be a nonempty list");
    for (size_t k = 0; k < tanks.size(); ++k) {
        const YAML::Node t = tanks[k];
        std::string where = fmt::format("tanks[{}]", k + 1);
        allow(t, where, {"volume_l", "q_out_l_per_h", "q_in_l_per_h", "s_in_g_per_l", "x_in_g_per_l"});
        Tank tk;
        tk.volume = read<double>(need(t, "volume_l", where), "volume_l");
        if (!(tk.volume > 0.0))
            fail(t["volume_l"], "volume_l must be positive");
        tk.q_out = opt_num(t, "q_out_l_per_h");
        tk.q_in = opt_num(t, "q_in_l_per_h");
        if (!tk.q_out && !tk.q_in)
            fail(t, where + " needs q_out_l_per_h or q_in_l_per_h");
        if ((tk.q_out && *tk.q_out < 0) || (tk.q_in && *tk.q_in < 0))
            fail(t, where + " has a negative flow");
        tk.s_in = nonneg(t, "s_in_g_per_l", where, 0.0);
        tk.x_in = nonneg(t, "x_in_g_per_l", where, 0.0);
        sc.net.tanks.push_back(tk);
    }
    const int n = sc.net.size();
    if (sc.net.growth.x_c.size() != 0 && sc.net.growth.x_c.size() != n)
        fail(gr["x_c_g_per_l"], "x_c_g_per_l needs one value per tank");

    if (YAML::Node pipes = root["pipes"]) {
        if (!pipes.IsSequence())
            fail(pipes, "pipes must be a list");
        for (size_t k = 0; k < pipes.size(); ++k) {
            const YAML::Node p = pipes[k];
            std::string where = fmt::format("pipes[{}]", k + 1);
            allow(p, where,
                  {"from", "to", "q0_l_per_h", "q1_l_per_h", "d0_l_per_h", "d1_l_per_h", "cost",
                   "candidate"});
            Pipe pp;
            pp.from = tank_ref(need(p, "from", where), n, where + ".from");
            pp.to = tank_ref(need(p, "to", where), n, where + ".to");
            if (pp.from == pp.to)
                fail(p, where + " connects a tank to itself");
            pp.q0 = nonneg(p, "q0_l_per_h", where, 0.0);
            pp.q1 = nonneg(p, "q1_l_per_h", where, 0.0);
            pp.d0 = nonneg(p, "d0_l_per_h", where, 0.0);
            pp.d1 = nonneg(p, "d1_l_per_h", where, 0.0);
            pp.cost = nonneg(p, "cost", where, 0.0);
            pp.candidate = p["candidate"] ? read<bool>(p["candidate"], "candidate") : false;
            sc.net.pipes.push_back(pp);
        }
    }

    if (YAML::Node o = root["options"]) {
        allow(o, "options",
              {"underestimators", "gamma", "clip_gamma", "objective_tanks", "inflow_decisions",
               "activation"});
        if (o["underestimators"])
            sc.model.underestimators = read<bool>(o["underestimators"], "underestimators");
        if (o["gamma"])
            sc.model.gamma = read<double>(o["gamma"], "gamma");
        if (o["clip_gamma"])
            sc.model.clip_gamma = read<bool>(o["clip_gamma"], "clip_gamma");
        if (o["inflow_decisions"])
            sc.model.inflow_decisions = read<bool>(o["inflow_decisions"], "inflow_decisions");
        if (YAML::Node ot = o["objective_tanks"]) {
            if (!ot.IsSequence())
                fail(ot, "objective_tanks must be a list");
            for (const auto& e : ot)
                sc.model.objective_tanks.push_back(tank_ref(e, n, "objective_tanks"));
        }
        if (o["activation"]) {
            sc.activation = list(o["activation"], "activation");
            if (static_cast<int>(sc.activation.size()) != sc.net.num_candidates())
                fail(o["activation"], "activation needs one value per candidate pipe");
        }
    }

    if (YAML::Node om = root["omega"]) {
        allow(om, "omega",
              {"budget", "discharge_cap_g_per_h", "substrate_total_g_per_h", "inflow_total_l_per_h",
               "washout_delta_per_h", "biomass_inflow_cap_g_per_h", "cap_on_state"});
        auto& w = sc.model.omega;
        w.budget = opt_num(om, "budget");
        if (om["discharge_cap_g_per_h"]) {
            w.discharge_cap = list(om["discharge_cap_g_per_h"], "discharge_cap_g_per_h");
            if (static_cast<int>(w.discharge_cap.size()) != n)
                fail(om["discharge_cap_g_per_h"], "discharge_cap_g_per_h needs one value per tank");
        }
        w.substrate_total = opt_num(om, "substrate_total_g_per_h");
        w.inflow_total = opt_num(om, "inflow_total_l_per_h");
        w.washout_delta = opt_num(om, "washout_delta_per_h");
        w.biomass_inflow_cap = opt_num(om, "biomass_inflow_cap_g_per_h");
        if (om["cap_on_state"])
            w.cap_on_state = read<bool>(om["cap_on_state"], "cap_on_state");
        for (const char* key : {"budget", "substrate_total_g_per_h", "inflow_total_l_per_h",
                                "biomass_inflow_cap_g_per_h"})
            if (om[key] && read<double>(om[key], key) < 0.0)
                fail(om[key], fmt::format("'{}' must be nonnegative", key));
        for (double c : w.discharge_cap)
            if (c < 0.0)
                fail(om["discharge_cap_g_per_h"], "discharge caps must be nonnegative");
    }

    if (YAML::Node d = root["dynamic"]) {
        allow(d, "dynamic",
              {"periods", "step_h", "discount", "periodic", "x_in_decision", "x_in_max_g_per_l",
               "s_in_g_per_l", "x_in_g_per_l", "s0_g_per_l", "x0_g_per_l"});
        DynamicSpec ds;
        ds.periods = read<int>(need(d, "periods", "dynamic"), "periods");
        if (ds.periods < 1)
            fail(d["periods"], "periods must be at least 1");
        ds.dt = read<double>(need(d, "step_h", "dynamic"), "step_h");
        if (!(ds.dt > 0.0))
            fail(d["step_h"], "step_h must be positive");
        ds.alpha = num(d, "discount", 1.0);
        if (!(ds.alpha > 0.0 && ds.alpha <= 1.0))
            fail(d["discount"], "discount must lie in (0, 1]");
        if (d["periodic"])
            ds.periodic = read<bool>(d["periodic"], "periodic");
        if (d["x_in_decision"])
            ds.x_in_decision = read<bool>(d["x_in_decision"], "x_in_decision");
        if (d["x_in_max_g_per_l"])
            ds.x_in_max = vec(d["x_in_max_g_per_l"], "x_in_max_g_per_l");
        ds.s_in = series(need(d, "s_in_g_per_l", "dynamic"), n, ds.periods, "s_in_g_per_l");
        if (d["x_in_g_per_l"])
            ds.x_in = series(d["x_in_g_per_l"], n, ds.periods, "x_in_g_per_l");
        else if (!ds.x_in_decision)
            fail(d, "x_in_g_per_l is required when x_in_decision is false");
        if (d["s0_g_per_l"])
            ds.s0 = vec(d["s0_g_per_l"], "s0_g_per_l");
        if (d["x0_g_per_l"])
            ds.x0 = vec(d["x0_g_per_l"], "x0_g_per_l");
        sc.dynamic = ds;
    } else if (sc.mode == RunMode::Dynamic) {
        fail(root, "mode dynamic needs a dynamic section");
    }

    if (YAML::Node s = root["solver"]) {
        allow(s, "solver",
              {"rel_gap", "abs_gap", "node_limit", "deterministic", "rounding", "max_iterations",
               "eps_feas", "eps_gap"});
        auto& b = sc.solver;
        b.rel_gap = num(s, "rel_gap", b.rel_gap);
        b.abs_gap = num(s, "abs_gap", b.abs_gap);
        if (s["node_limit"])
            b.node_limit = read<long>(s["node_limit"], "node_limit");
        if (s["deterministic"])
            b.deterministic = read<bool>(s["deterministic"], "deterministic");
        if (s["rounding"])
            b.rounding = read<bool>(s["rounding"], "rounding");
        if (s["max_iterations"])
            b.ipm.max_iterations = read<int>(s["max_iterations"], "max_iterations");
        b.ipm.eps_feas = num(s, "eps_feas", b.ipm.eps_feas);
        b.ipm.eps_gap = num(s, "eps_gap", b.ipm.eps_gap);
        if (!(b.rel_gap > 0 && b.abs_gap > 0 && b.ipm.eps_feas > 0 && b.ipm.eps_gap > 0))
            fail(s, "solver tolerances must be positive");
    }
    if (YAML::Node o = root["output"]) {
        allow(o, "output", {"dir"});
        if (o["dir"])
            sc.out_dir = read<std::string>(o["dir"], "dir");
    }
    return sc;
}

void emit_vec(YAML::Emitter& e, const std::vector<double>& v)
{
    e << YAML::Flow << YAML::BeginSeq;
    for (double x : v)
        e << x;
    e << YAML::EndSeq;
}

void emit_vec(YAML::Emitter& e, const Eigen::VectorXd& v)
{
    emit_vec(e, std::vector<double>(v.data(), v.data() + v.size()));
}

void emit_series(YAML::Emitter& e, const std::vector<Eigen::VectorXd>& s, int tanks)
{
    e << YAML::BeginSeq;
    for (int i = 0; i < tanks; ++i) {
        std::vector<double> row;
        for (const auto& v : s)
            row.push_back(v[i]);
        emit_vec(e, row);
    }
    e << YAML::EndSeq;
}

bool same(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return a.size() == b.size() && (a.size() == 0 || a == b);
}

bool same(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b)
{
    if (a.size() != b.size())
        return false;
    for (size_t k = 0; k < a.size(); ++k)
        if (!same(a[k], b[k]))
            return false;
    return true;
}

} // namespace

Scenario parse_scenario(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw Error(ErrorCode::BadInput, fmt::format("line {}: {}", e.mark.line + 1, e.msg));
    }
    if (!root || !root.IsMap())
        throw Error(ErrorCode::BadInput, "line 1: scenario must be a mapping");
    return from_yaml(root);
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::BadInput, "cannot open scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string dump_scenario(const Scenario& s)
{
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "schema_version" << YAML::Value << Scenario::kSchemaVersion;
    e << YAML::Key << "name" << YAML::Value << s.name;
    e << YAML::Key << "mode" << YAML::Value << to_string(s.mode);
    e << YAML::Key << "model" << YAML::Value << to_string(s.model.kind);

    const auto& g = s.net.growth;
    e << YAML::Key << "growth" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "mu_max_per_h" << YAML::Value << g.mu_max;
    e << YAML::Key << "k_half_sat_g_per_l" << YAML::Value << g.k;
    e << YAML::Key << "yield_ratio" << YAML::Value << g.y;
    if (g.x_c.size()) {
        e << YAML::Key << "x_c_g_per_l" << YAML::Value;
        emit_vec(e, g.x_c);
    }
    e << YAML::EndMap;

    e << YAML::Key << "tanks" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : s.net.tanks) {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "volume_l" << YAML::Value << t.volume;
        if (t.q_out)
            e << YAML::Key << "q_out_l_per_h" << YAML::Value << *t.q_out;
        if (t.q_in)
            e << YAML::Key << "q_in_l_per_h" << YAML::Value << *t.q_in;
        e << YAML::Key << "s_in_g_per_l" << YAML::Value << t.s_in;
        e << YAML::Key << "x_in_g_per_l" << YAML::Value << t.x_in;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;

    e << YAML::Key << "pipes" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : s.net.pipes) {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "from" << YAML::Value << p.from + 1;
        e << YAML::Key << "to" << YAML::Value << p.to + 1;
        e << YAML::Key << "q0_l_per_h" << YAML::Value << p.q0;
        e << YAML::Key << "q1_l_per_h" << YAML::Value << p.q1;
        e << YAML::Key << "d0_l_per_h" << YAML::Value << p.d0;
        e << YAML::Key << "d1_l_per_h" << YAML::Value << p.d1;
        e << YAML::Key << "cost" << YAML::Value << p.cost;
        e << YAML::Key << "candidate" << YAML::Value << p.candidate;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;

    e << YAML::Key << "options" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "underestimators" << YAML::Value << s.model.underestimators;
    e << YAML::Key << "gamma" << YAML::Value << s.model.gamma;
    e << YAML::Key << "clip_gamma" << YAML::Value << s.model.clip_gamma;
    e << YAML::Key << "inflow_decisions" << YAML::Value << s.model.inflow_decisions;
    if (!s.model.objective_tanks.empty()) {
        e << YAML::Key << "objective_tanks" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (int i : s.model.objective_tanks)
            e << i + 1;
        e << YAML::EndSeq;
    }
    if (!s.activation.empty()) {
        e << YAML::Key << "activation" << YAML::Value;
        emit_vec(e, s.activation);
    }
    e << YAML::EndMap;

    const auto& w = s.model.omega;
    e << YAML::Key << "omega" << YAML::Value << YAML::BeginMap;
    auto opt = [&](const char* key, const std::optional<double>& v) {
        if (v)
            e << YAML::Key << key << YAML::Value << *v;
    };
    opt("budget", w.budget);
    if (!w.discharge_cap.empty()) {
        e << YAML::Key << "discharge_cap_g_per_h" << YAML::Value;
        emit_vec(e, w.discharge_cap);
    }
    opt("substrate_total_g_per_h", w.substrate_total);
    opt("inflow_total_l_per_h", w.inflow_total);
    opt("washout_delta_per_h", w.washout_delta);
    opt("biomass_inflow_cap_g_per_h", w.biomass_inflow_cap);
    e << YAML::Key << "cap_on_state" << YAML::Value << w.cap_on_state;
    e << YAML::EndMap;

    if (s.dynamic) {
        const auto& d = *s.dynamic;
        const int n = s.net.size();
        e << YAML::Key << "dynamic" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "periods" << YAML::Value << d.periods;
        e << YAML::Key << "step_h" << YAML::Value << d.dt;
        e << YAML::Key << "discount" << YAML::Value << d.alpha;
        e << YAML::Key << "periodic" << YAML::Value << d.periodic;
        e << YAML::Key << "x_in_decision" << YAML::Value << d.x_in_decision;
        if (d.x_in_max.size()) {
            e << YAML::Key << "x_in_max_g_per_l" << YAML::Value;
            emit_vec(e, d.x_in_max);
        }
        e << YAML::Key << "s_in_g_per_l" << YAML::Value;
        emit_series(e, d.s_in, n);
        if (!d.x_in.empty()) {
            e << YAML::Key << "x_in_g_per_l" << YAML::Value;
            emit_series(e, d.x_in, n);
        }
        if (d.s0.size()) {
            e << YAML::Key << "s0_g_per_l" << YAML::Value;
            emit_vec(e, d.s0);
        }
        if (d.x0.size()) {
            e << YAML::Key << "x0_g_per_l" << YAML::Value;
            emit_vec(e, d.x0);
        }
        e << YAML::EndMap;
    }

    const auto& b = s.solver;
    e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "rel_gap" << YAML::Value << b.rel_gap;
    e << YAML::Key << "abs_gap" << YAML::Value << b.abs_gap;
    e << YAML::Key << "node_limit" << YAML::Value << b.node_limit;
    e << YAML::Key << "deterministic" << YAML::Value << b.deterministic;
    e << YAML::Key << "rounding" << YAML::Value << b.rounding;
    e << YAML::Key << "max_iterations" << YAML::Value << b.ipm.max_iterations;
    e << YAML::Key << "eps_feas" << YAML::Value << b.ipm.eps_feas;
    e << YAML::Key << "eps_gap" << YAML::Value << b.ipm.eps_gap;
    e << YAML::EndMap;

    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dir" << YAML::Value << s.out_dir;
    e << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

void save_scenario(const Scenario& s, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::BadInput, "cannot write scenario file " + path);
    out << dump_scenario(s);
}

bool operator==(const Scenario& a, const Scenario& b)
{
    if (a.name != b.name || a.mode != b.mode || a.out_dir != b.out_dir || a.activation != b.activation)
        return false;
    const auto &ga = a.net.growth, &gb = b.net.growth;
    if (ga.mu_max != gb.mu_max || ga.k != gb.k || ga.y != gb.y || !same(ga.x_c, gb.x_c))
        return false;
    if (a.net.tanks.size() != b.net.tanks.size() || a.net.pipes.size() != b.net.pipes.size())
        return false;
    for (size_t i = 0; i < a.net.tanks.size(); ++i) {
        const auto &x = a.net.tanks[i], &y = b.net.tanks[i];
        if (x.volume != y.volume || x.q_out != y.q_out || x.q_in != y.q_in || x.s_in != y.s_in ||
            x.x_in != y.x_in)
            return false;
    }
    for (size_t k = 0; k < a.net.pipes.size(); ++k) {
        const auto &x = a.net.pipes[k], &y = b.net.pipes[k];
        if (x.from != y.from || x.to != y.to || x.q0 != y.q0 || x.q1 != y.q1 || x.d0 != y.d0 ||
            x.d1 != y.d1 || x.cost != y.cost || x.candidate != y.candidate)
            return false;
    }
    const auto &ma = a.model, &mb = b.model;
    if (ma.kind != mb.kind || ma.underestimators != mb.underestimators || ma.gamma != mb.gamma ||
        ma.clip_gamma != mb.clip_gamma || ma.objective_tanks != mb.objective_tanks ||
        ma.inflow_decisions != mb.inflow_decisions)
        return false;
    const auto &wa = ma.omega, &wb = mb.omega;
    if (wa.budget != wb.budget || wa.discharge_cap != wb.discharge_cap ||
        wa.substrate_total != wb.substrate_total || wa.inflow_total != wb.inflow_total ||
        wa.washout_delta != wb.washout_delta || wa.biomass_inflow_cap != wb.biomass_inflow_cap ||
        wa.cap_on_state != wb.cap_on_state)
        return false;
    if (a.dynamic.has_value() != b.dynamic.has_value())
        return false;
    if (a.dynamic) {
        const auto &da = *a.dynamic, &db = *b.dynamic;
        if (da.periods != db.periods || da.dt != db.dt || da.alpha != db.alpha ||
            da.periodic != db.periodic || da.x_in_decision != db.x_in_decision ||
            !same(da.x_in_max, db.x_in_max) || !same(da.s_in, db.s_in) || !same(da.x_in, db.x_in) ||
            !same(da.s0, db.s0) || !same(da.x0, db.x0))
            return false;
    }
    const auto &sa = a.solver, &sb = b.solver;
    return sa.rel_gap == sb.rel_gap && sa.abs_gap == sb.abs_gap && sa.node_limit == sb.node_limit &&
           sa.deterministic == sb.deterministic && sa.rounding == sb.rounding &&
           sa.ipm.max_iterations == sb.ipm.max_iterations && sa.ipm.eps_feas == sb.ipm.eps_feas &&
           sa.ipm.eps_gap == sb.ipm.eps_gap;
}

} // namespace gradostat
