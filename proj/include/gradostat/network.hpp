#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "gradostat/growth.hpp"

namespace gradostat {

struct Tank {
    double volume = 1.0;
    // at most one of the two flows may be left for water balance to derive
    std::optional<double> q_out;
    std::optional<double> q_in;
    double s_in = 0.0;
    double x_in = 0.0;
};

struct Pipe {
    int from = 0; // 0-based
    int to = 0;
    double q0 = 0.0;
    double q1 = 0.0;
    double d0 = 0.0;
    double d1 = 0.0;
    double cost = 0.0;
    bool candidate = false;
};

struct GradostatNetwork {
    std::vector<Tank> tanks;
    std::vector<Pipe> pipes;
    GrowthParams growth;

    int size() const { return static_cast<int>(tanks.size()); }
    std::vector<int> candidates() const; // pipe indices
    int num_candidates() const { return static_cast<int>(candidates().size()); }
    Eigen::VectorXd volumes() const;
    Eigen::VectorXd s_in() const;
    Eigen::VectorXd x_in() const;
    // structural checks on tanks and pipes
    void validate() const;
};

struct SystemMatrices {
    Eigen::MatrixXd M;
    Eigen::MatrixXd L;
    Eigen::MatrixXd C;
    Eigen::MatrixXd G;
    Eigen::MatrixXd Q; // effective inter-tank flows Q_ij
    Eigen::MatrixXd D; // symmetric diffusion d_ij + d_ji
    Eigen::VectorXd q_in;
    Eigen::VectorXd q_out;

    int size() const { return static_cast<int>(M.rows()); }
    Eigen::MatrixXd ML() const { return M + L; }
};

// activation has one entry per candidate pipe, in pipe order; values may be
// fractional (continuous relaxations) but are usually 0 or 1.
SystemMatrices assemble_matrices(const GradostatNetwork& net,
                                 const std::vector<double>& activation = {});

bool is_outflow_connected(const SystemMatrices& m);
bool is_irreducible(const SystemMatrices& m);
bool is_fully_fed(const GradostatNetwork& net, const std::vector<double>& activation = {});
// numerical counterpart used to cross-check the structural test
bool is_numerically_invertible(const Eigen::MatrixXd& a, double rel_tol = 1e-10);

struct Equilibrium {
    Eigen::VectorXd z;
    bool positive = false;
};

// Z = -(M+L)^-1 C (x_in + y s_in)
Equilibrium equilibrium_z(const SystemMatrices& m, const Eigen::VectorXd& s_in,
                          const Eigen::VectorXd& x_in, double y);

} // namespace gradostat
