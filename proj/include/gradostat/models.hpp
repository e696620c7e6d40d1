#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "gradostat/conic.hpp"
#include "gradostat/growth.hpp"
#include "gradostat/network.hpp"

namespace gradostat {

// RC: Contois cone, RMX: Monod with constant biomass cone, RME: Monod envelope
enum class ModelKind { RC, RMX, RME };

const char* to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);
GrowthKind growth_kind_for(ModelKind k);

struct OmegaSpec {
    std::optional<double> budget;
    std::vector<double> discharge_cap;     // per tank, on q_out S; empty for none
    std::optional<double> substrate_total; // on sum q_in s_in
    std::optional<double> inflow_total;    // on sum q_in
    std::optional<double> washout_delta;
    std::optional<double> biomass_inflow_cap; // per period, dynamic models
    bool cap_on_state = false;                // cap q_in'X(t) instead of q_in'X_in(t)
};

struct ModelOptions {
    ModelKind kind = ModelKind::RC;
    bool underestimators = true;
    double gamma = 50.0;
    // per-row disjunction constant min(gamma, bound of the product over the box),
    // with the box stated as variable bounds
    bool clip_gamma = true;
    std::vector<int> objective_tanks; // 0-based; empty means every tank
    // s_in and x_in become decisions in [0, tank value]
    bool inflow_decisions = false;
    OmegaSpec omega;
    std::optional<BoundsBox> box;
};

struct DynamicSpec {
    int periods = 1;
    double dt = 1.0;
    double alpha = 1.0;
    std::vector<Eigen::VectorXd> s_in; // one vector per period
    std::vector<Eigen::VectorXd> x_in; // fixed values, unused when x_in_decision
    bool x_in_decision = true;
    Eigen::VectorXd x_in_max; // per tank upper bound on decisions (empty: unbounded)
    bool periodic = true;
    Eigen::VectorXd s0, x0; // initial state when not periodic
};

struct BuiltModel {
    ConicProgram program;
    GrowthParams growth;
    BoundsBox box;
    std::optional<SystemMatrices> mats; // fixed topology only
    std::vector<std::string> warnings;
    std::vector<int> candidate_pipes;     // design: pipe index per binary, program order
    std::vector<std::string> lambda_names;
    int periods = 0;
};

GrowthParams growth_for(const GradostatNetwork& net, ModelKind kind);
std::vector<int> objective_set(const GradostatNetwork& net, const ModelOptions& opt);

BuiltModel build_steady(const GradostatNetwork& net, const ModelOptions& opt,
                        const std::vector<double>& activation = {});
BuiltModel build_design(const GradostatNetwork& net, const ModelOptions& opt);
BuiltModel build_dynamic(const GradostatNetwork& net, const ModelOptions& opt,
                         const DynamicSpec& dyn);

// Decision vector Z with 0 = (M+L)Z + C(x_in + y s_in) and a growth margin
// of delta over each tank's dilution rate at (Z/y, 0).
ConeBlock build_washout_repulsion_rows(const GradostatNetwork& net, const SystemMatrices& m,
                                       const GrowthParams& g, double delta);

std::string pipe_label(const GradostatNetwork& net, int pipe);

} // namespace gradostat
