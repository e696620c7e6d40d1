#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gradostat/conic.hpp"
#include "gradostat/ipm.hpp"

namespace gradostat {

struct BnbSettings {
    double rel_gap = 1e-6;
    double abs_gap = 1e-9;
    long node_limit = 1000000;
    double int_tol = 1e-6;
    // search is serial; the flag is kept so callers can state intent
    bool deterministic = true;
    bool rounding = true;
    SolveSettings ipm;
};

enum class BnbStatus { Optimal, Infeasible, NodeLimit, SolverFailure };

const char* to_string(BnbStatus s);

struct NodeLog {
    long id = 0;
    int depth = 0;
    double bound = 0.0;
    double incumbent = 0.0;
};

struct BnbResult {
    BnbStatus status = BnbStatus::Infeasible;
    std::vector<double> assignment; // binaries in program order
    Eigen::VectorXd values;         // full incumbent point
    SolveResult solve;              // continuous solve with binaries fixed
    double objective = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    long nodes = 0;
    long unresolved = 0; // nodes whose relaxation the solver could not settle
    std::vector<NodeLog> log;
    std::vector<double> bound_trace; // global bound after each node
};

BnbResult solve_mixed(const ConicProgram& p, const BnbSettings& settings = {});
BnbResult enumerate_exhaustive(const ConicProgram& p, int limit = 20,
                               const BnbSettings& settings = {});
// copy of p with the binaries fixed to the given 0/1 values
ConicProgram fix_binaries(const ConicProgram& p, const std::vector<double>& assignment);

std::string format_log(const BnbResult& r);

} // namespace gradostat
