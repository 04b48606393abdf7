#pragma once

#include <array>
#include <string>
#include <vector>

#include "csl/types.hpp"

namespace csl {

// Spatial lattice hosting one or two distinguishable particles in the
// position basis (tensor product for two). Open boundaries: the smearing
// kernels are simply truncated at the edges, so keep packets at least 2a
// from them (a warning is emitted otherwise).
struct LatticeSpec {
    int dimension = 1;   // 1, 2 or 3
    int extent = 2;      // sites per axis
    double spacing = 1.0; // cm
    std::vector<double> particle_masses = {1.0}; // g, one or two entries

    void validate() const;
    Eigen::Index sites_per_particle() const;
    Eigen::Index basis_dimension() const; // sites^particles
    // site index -> lattice coordinates (units of spacing)
    std::array<int, 3> site_coords(Eigen::Index site) const;
};

// Gaussian smearing profile at lattice site x_j for a particle of mass m at
// site z: (m/m0) (pi a^2)^(-d/4) exp[-|x_j - z|^2 / (2 a^2)]. The d/4 power
// generalizes the three-dimensional kernel so each dimension contributes the
// same continuum heating rate.
double smearing_kernel(const LatticeSpec& lattice, const ModelParams& params,
                       Eigen::Index site, Eigen::Index z, double mass);

// One collapse operator per lattice site, diagonal in the position basis.
// Each operator carries the channel measure factor spacing^(d/2), so the
// site sum over channels converges to the continuum spatial integral and the
// white-noise variance convention matches the spatially discretized measure.
// Refuses lattices whose basis dimension exceeds max_basis_dimension.
CollapseOperatorSet build_position_collapse_ops(const LatticeSpec& lattice,
                                                const ModelParams& params,
                                                WarningList* warnings = nullptr,
                                                Eigen::Index max_basis_dimension = 4096);

// Off-diagonal decay rate (lambda/2) sum_j [A_j(z) - A_j(z')]^2 between two
// position eigenstates of the first particle separated by the given distance
// (snapped to the site grid, centered on the lattice).
double pair_decay_rate(const LatticeSpec& lattice, const ModelParams& params, double separation,
                       WarningList* warnings = nullptr);

// Nearest-neighbor hopping Hamiltonian for one particle of the given mass:
// the discrete Laplacian scaled by hbar^2 / (2 m spacing^2), in the stated
// energy units of hbar (pass hbar = 1 for natural units).
HermitianOperator hopping_hamiltonian(const LatticeSpec& lattice, double hbar,
                                      std::size_t particle = 0);

// Normalized Gaussian wave packet centered mid-lattice (single particle).
StateVector gaussian_packet(const LatticeSpec& lattice, double center_cm, double width_cm);

} // namespace csl
