#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gradostat/conic.hpp"

namespace gradostat {

enum class GrowthKind { Monod, Contois, MonodConstantBiomass };

const char* to_string(GrowthKind k);

struct GrowthParams {
    double mu_max = 1.0;
    double k = 1.0;
    double y = 1.0;
    GrowthKind kind = GrowthKind::Contois;
    Eigen::VectorXd x_c; // per tank, MonodConstantBiomass only

    void validate(int tanks = -1) const;
    // biomass seen by tank i: x itself, or x_c[i] for constant biomass
    double biomass(int i, double x) const;
};

// r(s, x). For MonodConstantBiomass pass the tank's constant biomass as x.
double kinetics(const GrowthParams& g, double s, double x);
double dr_ds(const GrowthParams& g, double s, double x);
// zero for constant biomass (x is not a state there)
double dr_dx(const GrowthParams& g, double s, double x);

// (1/y) dr/ds - dr/dx
double growth_margin(const GrowthParams& g, double s, double x);

struct BoundsBox {
    Eigen::VectorXd s_lo, s_hi, x_lo, x_hi, t_lo, t_hi;

    int size() const { return static_cast<int>(s_lo.size()); }
    void check() const;
};

// Steady-state boxes from inflow data; s_in_hi, x_in_lo, x_in_hi are the
// extreme inflow concentrations per tank (equal when inflows are fixed).
BoundsBox state_bounds(const GrowthParams& g, const Eigen::VectorXd& s_in_hi,
                        const Eigen::VectorXd& x_in_lo, const Eigen::VectorXd& x_in_hi);
BoundsBox state_bounds(const GrowthParams& g, const Eigen::VectorXd& s_in,
                        const Eigen::VectorXd& x_in);

// Names of the variables of one tank (and period) inside a program.
struct TankVars {
    std::string s;
    std::string x; // unused for constant biomass
    std::string t;
    std::string tag; // suffix for auxiliary names and row names
    int tank = 0;
};

TankVars tank_vars(int tank, int period = -1);

ConeBlock encode_contois_soc(const TankVars& v, const GrowthParams& g);
ConeBlock encode_monod_constx_soc(const TankVars& v, const GrowthParams& g);
ConeBlock encode_monod_envelope(const TankVars& v, const GrowthParams& g, const BoundsBox& b);
ConeBlock underestimator_contois(const TankVars& v, const GrowthParams& g, const BoundsBox& b);
ConeBlock underestimator_monod_constx(const TankVars& v, const GrowthParams& g,
                                      const BoundsBox& b);

} // namespace gradostat
