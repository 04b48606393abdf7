#pragma once

#include <optional>
#include <vector>

#include "csl/types.hpp"

namespace csl {

// Early-universe particle-creation toy: scalar particles of mass-energy m
// pumped by a constant source g over an observation volume V1, collapsing at
// the mass-amplified rate lambda = lambda0 (m/m0)^2.
struct ToyCreationParams {
    double g = 0.1;
    double m = 1.0;
    double v1 = 1.0;
    double lambda0 = 1.0;
    double m0 = 1.0;

    double effective_lambda() const { return lambda0 * (m / m0) * (m / m0); }
    void validate() const;
};

struct ToyMeans {
    double particles = 0.0;     // mean particle number in V1
    double quadrature = 0.0;    // mean of (xi + xi^dag)/2 over V1
    double matter_energy = 0.0; // m N + 2 g Q
    double noise_energy = 0.0;  // -matter_energy, the w-field reservoir share
};

// Closed forms for the toy means at time t; the collapse term tilts the
// creation/annihilation balance, so the particle number grows linearly with
// coefficient g^2 V1 lambda / (m^2 + (lambda/2)^2) at large t.
ToyMeans toy_creation_means(const ToyCreationParams& p, double t);

// Homogeneous cosmology budget in units of the critical density.
struct FRWState {
    double omega_m = 0.25;
    double omega_w = -0.25;
    double omega_lambda = 1.0;
    double hubble = 2.3e-18; // s^-1

    void validate() const;
};

struct FRWBudget {
    double omega_k = 0.0;
    double q0 = 0.0;
};

// omega_k = 1 - (omega_m + omega_w + omega_lambda); q0 = (omega_m + omega_w)/2 - omega_lambda
FRWBudget frw_budget(const FRWState& s);

struct ScaleFactorSeries {
    std::vector<double> times;
    std::vector<double> scale; // R/R0, 1 at t = 0
    // set when the expansion rate squared went negative (recollapse branch);
    // the series is truncated at that point
    std::optional<double> turning_time;
};

// Expansion branch of (Rdot/R)^2 = H0^2 [(Om+Ow)(R0/R)^3 + OL + Ok (R0/R)^2],
// integrated by adaptive embedded Runge-Kutta with error-per-unit-time
// control, so the deviation from closed forms scales linearly with tolerance.
// Matter and w-field dilute as R^-3 (pressureless); Lambda is constant.
ScaleFactorSeries scale_factor_evolve(const FRWState& s, const std::vector<double>& t_grid,
                                      double tolerance = 1e-12);

} // namespace csl
