#pragma once

// Independent oracles and property sweeps shared by the unit tests and the
// acceptance driver. Nothing here calls the code under test to produce an
// expected value.

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

#include "gradostat/network.hpp"

namespace gradostat::testing {

using Rng = std::mt19937_64;

// n tanks, random volumes and inflows, random pipes with positive q0 and d0.
// Water balance is closed by choosing q_out, so q_in > 0 everywhere.
// ring = true adds a directed cycle so the network is irreducible.
GradostatNetwork random_network(Rng& rng, int n, bool ring, double pipe_prob = 0.4);

// one Contois or Monod tank: q (s_in - S) = V r / y, q (x_in - X) = -V r,
// solved by bisection on S with X eliminated through S/y + X = const
struct ScalarSteady {
    double s = 0.0, x = 0.0, r = 0.0;
};
ScalarSteady single_tank_bisection(double mu, double k, double y, bool contois, double v,
                                   double q, double s_in, double x_in);

struct PropertyOutcome {
    bool ok = true;
    int cases = 0;
    int failures = 0;
    double worst = 0.0;
    std::string detail;
};

// Contois and constant-biomass cone rows hold iff T <= r(S, X), sampled
PropertyOutcome encoding_equivalence(int samples, std::uint64_t seed, double tol = 1e-9);
// exact Monod point lifted into the envelope rows is feasible, sampled
PropertyOutcome envelope_soundness(int samples, std::uint64_t seed);
// underestimator rows never exceed the kinetics in the box
PropertyOutcome underestimator_soundness(int samples, std::uint64_t seed);
// feasible points survive the standard-form lift and solutions map back feasibly
PropertyOutcome lift_soundness(int programs, std::uint64_t seed);
// solve_mixed objective equals exhaustive enumeration
PropertyOutcome bnb_vs_exhaustive(int instances, std::uint64_t seed, int max_binaries = 12);
// fully fed, irreducible, every tank in the objective: rho > 0 and exact
PropertyOutcome fed_irreducible_regime(int instances, std::uint64_t seed);
// exact steady states are ODE fixed points; a 5% perturbation decays 10x
PropertyOutcome ode_oracle(int instances, std::uint64_t seed);
// sign pattern and inverse identities of the compartmental matrices
PropertyOutcome mmatrix_properties(int instances, std::uint64_t seed);
// closed-form SOCP battery: objective and duality gap
PropertyOutcome ipm_battery(double gap_tol = 1e-8);
// infeasible and unbounded programs return verified certificates
PropertyOutcome infeasibility_certificates();

} // namespace gradostat::testing
