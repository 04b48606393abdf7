#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csl/rng.hpp"
#include "csl/tolerances.hpp"

namespace csl {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using MatrixR = Eigen::MatrixXd;
using VectorC = Eigen::VectorXcd;
using VectorR = Eigen::VectorXd;

// Non-fatal diagnostics collected by operations that can proceed anyway.
using WarningList = std::vector<std::string>;

// Thrown on precondition violations and invalid inputs.
class InvalidInput : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a computation cannot proceed (numerical breakdown, aborts).
class RuntimeFailure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

double max_abs(const MatrixC& m);

// Complex amplitudes over a labeled finite basis.
class StateVector {
public:
    StateVector(std::vector<std::string> labels, VectorC amplitudes);

    // labels "0", "1", ...
    static StateVector from_amplitudes(VectorC amplitudes);

    Eigen::Index dim() const { return amplitudes_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const VectorC& amplitudes() const { return amplitudes_; }

    double squared_norm() const { return amplitudes_.squaredNorm(); }
    StateVector normalized() const;

    // squared amplitude of basis entry n, relative to the total norm
    double probability(Eigen::Index n) const;

private:
    std::vector<std::string> labels_;
    VectorC amplitudes_;
};

// Dense self-adjoint operator. Hermiticity is enforced on construction.
class HermitianOperator {
public:
    explicit HermitianOperator(MatrixC matrix,
                               const ToleranceConfig& tol = default_tolerances());

    static HermitianOperator diagonal(const VectorR& entries);

    Eigen::Index dim() const { return matrix_.rows(); }
    const MatrixC& matrix() const { return matrix_; }

private:
    MatrixC matrix_;
};

// A family of mutually commuting Hermitian operators sharing one eigenbasis.
// Stored as the eigenbasis plus the per-operator, per-basis-vector eigenvalue
// table; dense operator matrices are materialized on demand.
class CollapseOperatorSet {
public:
    // Operators diagonal in the given basis; eigenbasis is the identity.
    static CollapseOperatorSet diagonal(std::vector<std::string> labels,
                                        MatrixR eigenvalue_table);

    // Diagonalizes the first operator and verifies the rest are diagonal in
    // that basis. Sets handed to the dynamics are diagonal by construction,
    // so verification (not simultaneous diagonalization) is sufficient.
    static CollapseOperatorSet from_operators(const std::vector<HermitianOperator>& ops,
                                              std::vector<std::string> labels = {},
                                              const ToleranceConfig& tol = default_tolerances());

    // Empty channel set over an explicit basis (pure Hamiltonian evolution).
    static CollapseOperatorSet empty(std::vector<std::string> labels);

    Eigen::Index dim() const { return static_cast<Eigen::Index>(labels_.size()); }
    Eigen::Index channels() const { return eigenvalue_table_.rows(); }
    const std::vector<std::string>& labels() const { return labels_; }

    // rows = channels, cols = basis entries
    const MatrixR& eigenvalue_table() const { return eigenvalue_table_; }
    double eigenvalue(Eigen::Index channel, Eigen::Index n) const {
        return eigenvalue_table_(channel, n);
    }

    bool eigenbasis_is_identity() const { return identity_basis_; }
    const MatrixC& eigenbasis() const { return eigenbasis_; }

    // U diag(a_k) U^dag
    MatrixC operator_matrix(Eigen::Index channel) const;

    // max over pairs of max|[A_j, A_k]|; 0 for fewer than two channels
    double verify_commutation() const;

private:
    CollapseOperatorSet() = default;

    std::vector<std::string> labels_;
    MatrixR eigenvalue_table_; // channels x dim
    MatrixC eigenbasis_;       // dim x dim unitary
    bool identity_basis_ = true;
};

// Hermitian, unit-trace, positive semidefinite ensemble state.
// The constructor enforces hermiticity and trace; positivity is checked by
// min_eigenvalue() (wired into the evolution loops, where violations can
// actually develop).
class DensityMatrix {
public:
    explicit DensityMatrix(MatrixC matrix,
                           const ToleranceConfig& tol = default_tolerances());

    static DensityMatrix pure(const StateVector& psi);

    Eigen::Index dim() const { return matrix_.rows(); }
    const MatrixC& matrix() const { return matrix_; }

    double min_eigenvalue() const;

private:
    MatrixC matrix_;
};

// Model parameters in CGS: collapse rate lambda (1/s), smearing length a (cm),
// reference mass m0 (g), per-species coupling ratios alpha, integration step dt (s).
struct ModelParams {
    double lambda = 1e-16; // GRW value
    double a = 1e-5;       // GRW value, cm
    double m0 = 1.6726e-24; // proton mass, g
    std::vector<double> alpha = {1.0};
    double dt = 1.0;

    void validate() const;
};

// Per-step, per-channel noise samples. The raw-measure convention: each
// sample is zero-mean normal with variance lambda/dt.
struct NoiseTrajectory {
    Eigen::Index steps = 0;
    Eigen::Index channels = 0;
    MatrixR samples; // steps x channels
    double dt = 0.0;

    static NoiseTrajectory draw_raw(Rng& rng, Eigen::Index steps, Eigen::Index channels,
                                    double lambda, double dt);
};

// <psi|B|psi> / <psi|psi>; the imaginary residue must stay below tolerance.
double expectation(const HermitianOperator& op, const StateVector& state,
                   const ToleranceConfig& tol = default_tolerances());

// <B^2> - <B>^2, clamped to >= 0
double variance(const HermitianOperator& op, const StateVector& state,
                const ToleranceConfig& tol = default_tolerances());

// max over pairs of max|[A_j, A_k]| entries
double commutation_check(const std::vector<HermitianOperator>& ops);

} // namespace csl
