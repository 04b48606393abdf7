#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csl/types.hpp"

namespace csl {

// Two samplers of the same physical measure over noise realizations.
//   A: draw raw zero-mean Gaussian noise, carry the Radon-Nikodym weight
//      of the physical measure relative to that raw measure (importance
//      sampling; ensemble averages are weight-weighted).
//   B: sample the physical measure directly, one step at a time, via its
//      exact conditional (a mixture of Gaussians with the current squared
//      amplitudes as mixture weights); all trajectories carry weight 1.
enum class Scheme { A, B };

struct TrajectoryRecord {
    std::vector<double> save_times;
    std::vector<StateVector> states; // normalized, one per save time
    double weight = 1.0;             // final raw-measure importance weight (Scheme A)
    std::optional<std::string> outcome;
    std::optional<NoiseTrajectory> noise;
    std::uint64_t seed = 0;          // derived stream seed for this trajectory
};

struct ObservableMoments {
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
    double se_mean = 0.0;
    double se_second_moment = 0.0;
};

struct EnsembleSlice {
    double time = 0.0;
    std::optional<DensityMatrix> density; // weighted mean of outer products
    MatrixR density_se_re;                // per-entry standard error, real part
    MatrixR density_se_im;                // per-entry standard error, imag part
    std::vector<ObservableMoments> observables;
    double mean_weight = 1.0;             // unweighted mean of W_i(t)
};

struct EnsembleStats {
    std::vector<std::string> labels;
    std::map<std::string, double> outcome_frequencies; // weighted, resolved only
    std::map<std::string, double> outcome_se;
    double unresolved_fraction = 0.0;
    std::vector<EnsembleSlice> slices;
    long trajectory_count = 0;
    long aborted_count = 0;
    double mean_weight = 1.0;    // final-time, unweighted mean of W_i
    double se_mean_weight = 0.0;
    std::vector<std::string> abort_messages; // first few diagnostics
};

struct EnsembleConfig {
    StateVector initial;
    CollapseOperatorSet collapse_ops;
    std::optional<HermitianOperator> hamiltonian;
    ModelParams params;
    Scheme scheme = Scheme::B;
    long trajectories = 1000;
    double horizon = 1.0;
    std::vector<double> save_times;  // snapped to the dt grid
    std::uint64_t master_seed = 1;
    double outcome_tolerance = 1e-6;
    std::vector<std::pair<std::string, HermitianOperator>> observables;
    int threads = 1;
    bool store_noise = false; // run_trajectory only
};

// One step of the linear (unnormalized) dynamics: when a Hamiltonian is
// present a Trotter split applies exp(-i H dt) first; then, in the collapse
// eigenbasis, amplitude n is multiplied by
//     exp[-(dt/4 lambda) sum_k (w_k - 2 lambda a_k(n))^2].
// lambda = 0 with nonzero noise is rejected (the exponent divides by lambda).
StateVector linear_step(const StateVector& state, const VectorR& noise_slice,
                        const CollapseOperatorSet& collapse_ops,
                        const std::optional<HermitianOperator>& hamiltonian,
                        const ModelParams& params);

// Radon-Nikodym weight of the physical measure relative to the raw Gaussian
// sampling measure, evaluated on the given noise record: the squared norm of
// the linear evolution with the common raw-Gaussian factor divided out.
// Mean over raw draws is 1. Accumulated in log space with per-step
// renormalization, so long runs neither underflow nor overflow.
double trajectory_weight(const StateVector& initial, const NoiseTrajectory& noise,
                         const CollapseOperatorSet& collapse_ops,
                         const std::optional<HermitianOperator>& hamiltonian,
                         const ModelParams& params);

// One step of the physical-measure sampler: draws a basis label n with
// probability equal to the squared amplitude (after the unitary half-step,
// so schemes A and B sample the same discrete-time law), then each channel
// w_k from a normal with mean 2 lambda a_k(n) and variance lambda/dt, applies
// the collapse factor and renormalizes. Returns the new state and the drawn
// noise slice.
std::pair<StateVector, VectorR> physical_step(const StateVector& state, Rng& rng,
                                              const CollapseOperatorSet& collapse_ops,
                                              const std::optional<HermitianOperator>& hamiltonian,
                                              const ModelParams& params);

// Label m if p_m > 1 - tol, else absent. Collapse is asymptotic; unresolved
// states are never force-assigned.
std::optional<std::string> collapse_outcome(const StateVector& state, double tol);

// Monte Carlo ensemble over independent trajectories. Trajectory i uses the
// stream derived from (master_seed, i); reduction runs in ascending index
// (fixed 64-trajectory blocks), so results are bit-identical for any thread
// count. Aborted trajectories are excluded and counted.
EnsembleStats run_ensemble(const EnsembleConfig& config);

// Single trajectory (for replay tests and debugging).
TrajectoryRecord run_trajectory(const EnsembleConfig& config, long index);

// Projector |n><n| on the set's eigenbasis, as an operator in the original basis.
HermitianOperator basis_projector(const CollapseOperatorSet& ops, Eigen::Index n);

} // namespace csl
