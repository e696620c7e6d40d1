#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "gradostat/conic.hpp"
#include "gradostat/growth.hpp"
#include "gradostat/ipm.hpp"
#include "gradostat/models.hpp"
#include "gradostat/network.hpp"

namespace gradostat {

struct TankGap {
    int tank = 0;
    int period = -1; // -1 for steady models
    double s = 0.0, x = 0.0, t = 0.0;
    double r = 0.0;   // kinetics at (s, x)
    double gap = 0.0; // r - t
    double rel = 0.0; // |r - t| / r, 0 when excluded
    bool excluded = false;
    bool exact = false;
    bool under_binding = false;
};

struct ExactnessReport {
    std::vector<TankGap> tanks;
    double metric = 0.0; // max relative gap
    int worst = -1;      // index into tanks
    int excluded = 0;
    double min_gap = 0.0;
};

// Reads S, X, T by name. periods = 0 for steady models, else all periods 1..periods.
// Monod envelope solutions are scored against Monod kinetics.
ExactnessReport exactness(const ConicProgram& p, const Eigen::VectorXd& values,
                          const GrowthParams& g, int tanks, int periods = 0,
                          double exact_tol = 1e-6);

// S, X, T vectors of one period (X is x_c for constant biomass)
struct TankState {
    Eigen::VectorXd s, x, t;
};
TankState tank_state(const ConicProgram& p, const Eigen::VectorXd& values, const GrowthParams& g,
                     int tanks, int period = -1);

struct CertificateReport {
    bool outflow_connected = false;
    bool irreducible = false;
    bool fully_fed = false;
    Eigen::VectorXd margin; // (1/y) dr/ds - dr/dx per tank
    bool assumption_holds = false;
    Eigen::VectorXd g;   // (M'+L) V^-1 grad F
    bool g_nonpositive_nonzero = false;
    bool g_negative = false;
    bool hypotheses = false; // all of the above for the theorem to apply
    Eigen::VectorXd rho;
    bool rho_computed = false;
    bool singular_w = false;
    bool rho_positive = false;
    double w_eig_min = 0.0; // real parts of W's spectrum
    double w_eig_max = 0.0;
    bool predicts_exact = false;
    std::optional<bool> agrees; // prediction versus measured metric
    std::string note;
};

// grad is dF/dT (V_i on objective tanks for the linear objective).
CertificateReport exactness_certificate(const GradostatNetwork& net, const SystemMatrices& m,
                                       const GrowthParams& g, const TankState& st,
                                       const Eigen::VectorXd& grad,
                                       std::optional<double> measured = std::nullopt,
                                       double exact_tol = 1e-6);

// V on the listed tanks (0-based), zero elsewhere; empty means every tank
Eigen::VectorXd objective_gradient(const GradostatNetwork& net, const std::vector<int>& tanks);

struct KktFamily {
    std::string name;
    double residual = 0.0;
    int checked = 0;
    int unchecked = 0;
};

struct KktReport {
    Eigen::VectorXd sigma, epsilon, rho;
    std::vector<KktFamily> families; // stationarity_s, stationarity_x, complementarity, rho_sign
    double max_residual = 0.0;
};

// Multipliers come from the "substrate" and "biomass" row groups of a steady model.
// Tanks where a bound or a side row is active are left unchecked.
KktReport kkt_residuals(const ConicProgram& p, const SolveResult& r, const GradostatNetwork& net,
                        const SystemMatrices& m, const GrowthParams& g,
                        const Eigen::VectorXd& grad, double active_tol = 1e-6);

// V dS/dt = (M+L)S - (1/y) V r + C S_in,  V dX/dt = (M+L)X + V r + C X_in
struct OdeInputs {
    // piecewise constant inflow signals, one vector per period of length `period`;
    // empty means the network's constant inflows
    std::vector<Eigen::VectorXd> s_in, x_in;
    double period = 1.0;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> s, x;
    double final_residual = 0.0; // max |dS/dt|, |dX/dt| at the last state
    double max_residual = 0.0;   // over every stored state
};

// RK4; constant-biomass growth is simulated with Monod kinetics on the X state.
Trajectory ode_simulate(const GradostatNetwork& net, const SystemMatrices& m, const GrowthParams& g,
                        const Eigen::VectorXd& s0, const Eigen::VectorXd& x0, double horizon,
                        double dt, const OdeInputs& in = {});

// max-norm of the time derivative at (S, X) with the given inflows
double steady_residual(const GradostatNetwork& net, const SystemMatrices& m, const GrowthParams& g,
                       const Eigen::VectorXd& s, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& s_in, const Eigen::VectorXd& x_in);

// Horizon totals of a dynamic solution; closures are relative to the inflow.
struct MassLedger {
    double substrate_in = 0.0, substrate_out = 0.0, substrate_consumed = 0.0;
    double substrate_accumulated = 0.0, substrate_closure = 0.0;
    double biomass_in = 0.0, biomass_out = 0.0, biomass_produced = 0.0;
    double biomass_accumulated = 0.0, biomass_closure = 0.0;
    double boundary_residual = 0.0; // balance rows of the last period, which carry the wrap
};

MassLedger dynamic_mass_ledger(const ConicProgram& p, const Eigen::VectorXd& values,
                               const GradostatNetwork& net, const SystemMatrices& m,
                               const GrowthParams& g, const DynamicSpec& dyn);

} // namespace gradostat
