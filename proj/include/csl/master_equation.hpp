#pragma once

#include <optional>
#include <vector>

#include "csl/types.hpp"

namespace csl {

// Time series of the energy bookkeeping: matter = Tr[rho H_A], noise = the
// compensating reservoir share (so the sum is conserved), interaction = 0.
// noise_energy_integrated carries the independent route (time integration of
// the double-commutator rate, sign fixed by the conservation requirement);
// crosscheck_residual is the worst disagreement between the two routes.
struct EnergyLedger {
    std::vector<double> times;
    std::vector<double> matter_energy;
    std::vector<double> noise_energy;
    std::vector<double> interaction_energy;
    std::vector<double> noise_energy_integrated;
    double crosscheck_residual = 0.0;
};

struct SpectrumGrid {
    std::optional<double> center; // default: midpoint of the H_A spectral range
    double half_width = 1.0;      // the symmetric cutoff
    Eigen::Index points = 1001;
};

struct EnergySpectrum {
    VectorR energies;
    VectorR density; // P(E) >= 0
    double cutoff = 0.0;
    std::vector<Eigen::Index> skipped; // grid indices where the solve was singular
};

struct LindbladRun {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    double max_trace_drift = 0.0; // before per-step renormalization
    double min_eigenvalue_seen = 0.0;
};

// Closed-form ensemble state for Hamiltonian-free evolution:
// entry (n, m) = c_n c_m^* exp[-(lambda t / 2)(a_n - a_m)^2].
DensityMatrix analytic_density(const VectorC& c, const VectorR& eigenvalues, double lambda,
                               double t);

// One fourth-order Runge-Kutta step of
//   d rho/dt = -i[H, rho] - (lambda/2) sum_k (A_k^2 rho - 2 A_k rho A_k + rho A_k^2),
// trace renormalized afterwards (drift reported via trace_drift when given).
DensityMatrix lindblad_step(const DensityMatrix& rho,
                            const std::optional<HermitianOperator>& hamiltonian,
                            const CollapseOperatorSet& collapse_ops, double lambda, double dt,
                            double* trace_drift = nullptr);

// Repeated lindblad_step with saves every save_every steps (state at t = 0
// included). Positivity is guarded: populations are checked every step, the
// full spectrum every psd_check_interval steps and at the end; a smallest
// eigenvalue below -1e-6 aborts with a diagnostic.
LindbladRun lindblad_evolve(const DensityMatrix& rho0,
                            const std::optional<HermitianOperator>& hamiltonian,
                            const CollapseOperatorSet& collapse_ops, double lambda, double dt,
                            Eigen::Index steps, Eigen::Index save_every = 1,
                            Eigen::Index psd_check_interval = 100);

// (lambda/2) sum_k Tr{rho [A_k, [A_k, H_A]]} - the rate at which the noise
// reservoir absorbs energy (equal to -d<H_A>/dt under the generator above).
double double_commutator_rate(const DensityMatrix& rho, const HermitianOperator& hamiltonian,
                              const CollapseOperatorSet& collapse_ops, double lambda);

// Energy bookkeeping along a uniformly spaced density path.
EnergyLedger mean_energies(const std::vector<DensityMatrix>& rho_path, double dt,
                           const HermitianOperator& hamiltonian,
                           const CollapseOperatorSet& collapse_ops, double lambda);

// Resolvent form of the total-energy distribution,
//   P(E) = (1/pi) <psi0| (E - H_A + i Gamma)^-1 Gamma (E - H_A - i Gamma)^-1 |psi0>
// with Gamma = (lambda/2) sum_k A_k^2, evaluated by a dense solve per grid
// point. Singular points (possible only at lambda = 0) are reported and
// skipped. P has E^-2 tails: the mean converges under the symmetric cutoff,
// the second moment grows without bound as the cutoff grows.
EnergySpectrum energy_distribution(const StateVector& psi0, const HermitianOperator& hamiltonian,
                                   const CollapseOperatorSet& collapse_ops, double lambda,
                                   const SpectrumGrid& grid);

// trapezoid rule on a sampled function
double trapezoid(const VectorR& x, const VectorR& y);

} // namespace csl
