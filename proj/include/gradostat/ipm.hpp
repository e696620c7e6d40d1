#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gradostat/conic.hpp"

namespace gradostat {

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, IterationLimit, NumericalError };

const char* to_string(SolveStatus s);

struct SolveSettings {
    int max_iterations = 200;
    double eps_feas = 1e-8;
    double eps_gap = 1e-8;
    double step = 0.99;
    double static_reg = 1e-8;
    int refine_steps = 8;
    int equilibrate_passes = 12;
    bool presolve = true;
    bool verbose = false;
};

// Solution of  min c'x  s.t. Ax = b, x in K  and of its dual
//   max -b'y  s.t. s = c + A'y in K*  (free part of s is zero).
struct SolveResult {
    SolveStatus status = SolveStatus::NumericalError;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd s;
    double objective = 0.0; // c'x + c0 for standard solves, original sense for named ones
    double dual_objective = 0.0;
    int iterations = 0;
    double pres = 0.0;
    double dres = 0.0;
    double gap = 0.0;
    // certificates: A'ray_y in K*, b'ray_y = -1 (primal infeasible);
    // A ray_x = 0, ray_x in K, c'ray_x = -1 (dual infeasible)
    Eigen::VectorXd ray_x;
    Eigen::VectorXd ray_y;
    std::string message;

    // filled by solve_named
    Eigen::VectorXd values;
    std::vector<double> row_duals;

    bool optimal() const { return status == SolveStatus::Optimal; }
};

SolveResult solve(const StandardForm& sf, const SolveSettings& settings = {});
SolveResult solve_named(const ConicProgram& p, const SolveSettings& settings = {});

// Multipliers of the rows of one group, in row order.
std::vector<double> group_duals(const ConicProgram& p, const SolveResult& r,
                                const std::string& group);

// Residual of a certificate (0 when exact).
double primal_infeasibility_residual(const StandardForm& sf, const Eigen::VectorXd& ray_y);
double dual_infeasibility_residual(const StandardForm& sf, const Eigen::VectorXd& ray_x);

} // namespace gradostat
