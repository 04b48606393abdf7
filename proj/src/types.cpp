#include "csl/types.hpp"

#include <cmath>
#include <sstream>

namespace csl {

double max_abs(const MatrixC& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

namespace {

std::vector<std::string> index_labels(Eigen::Index n) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    return labels;
}

} // namespace

StateVector::StateVector(std::vector<std::string> labels, VectorC amplitudes)
    : labels_(std::move(labels)), amplitudes_(std::move(amplitudes)) {
    if (static_cast<Eigen::Index>(labels_.size()) != amplitudes_.size())
        throw InvalidInput("StateVector: label count does not match amplitude count");
    if (amplitudes_.size() == 0)
        throw InvalidInput("StateVector: empty basis");
    if (!amplitudes_.allFinite())
        throw InvalidInput("StateVector: non-finite amplitude");
}

StateVector StateVector::from_amplitudes(VectorC amplitudes) {
    auto labels = index_labels(amplitudes.size());
    return StateVector(std::move(labels), std::move(amplitudes));
}

StateVector StateVector::normalized() const {
    const double n2 = squared_norm();
    if (n2 <= 0.0)
        throw InvalidInput("StateVector: cannot normalize a zero state");
    return StateVector(labels_, amplitudes_ / std::sqrt(n2));
}

double StateVector::probability(Eigen::Index n) const {
    if (n < 0 || n >= dim()) throw InvalidInput("StateVector: index out of range");
    const double n2 = squared_norm();
    if (n2 <= 0.0) throw InvalidInput("StateVector: zero norm");
    return std::norm(amplitudes_[n]) / n2;
}

HermitianOperator::HermitianOperator(MatrixC matrix, const ToleranceConfig& tol)
    : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols())
        throw InvalidInput("HermitianOperator: matrix is not square");
    if (matrix_.size() == 0)
        throw InvalidInput("HermitianOperator: empty matrix");
    const double scale = max_abs(matrix_);
    const double dev = max_abs(matrix_ - matrix_.adjoint());
    if (dev > tol.hermitian_rel * std::max(scale, 1e-300))
        throw InvalidInput("HermitianOperator: matrix is not self-adjoint (max deviation " +
                           std::to_string(dev) + ")");
}

HermitianOperator HermitianOperator::diagonal(const VectorR& entries) {
    MatrixC m = MatrixC::Zero(entries.size(), entries.size());
    for (Eigen::Index i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return HermitianOperator(std::move(m));
}

CollapseOperatorSet CollapseOperatorSet::diagonal(std::vector<std::string> labels,
                                                  MatrixR eigenvalue_table) {
    if (labels.empty()) throw InvalidInput("CollapseOperatorSet: empty basis");
    if (eigenvalue_table.cols() != static_cast<Eigen::Index>(labels.size()))
        throw InvalidInput("CollapseOperatorSet: eigenvalue table width does not match basis");
    CollapseOperatorSet set;
    set.labels_ = std::move(labels);
    set.eigenvalue_table_ = std::move(eigenvalue_table);
    set.eigenbasis_ = MatrixC::Identity(set.dim(), set.dim());
    set.identity_basis_ = true;
    return set;
}

CollapseOperatorSet CollapseOperatorSet::empty(std::vector<std::string> labels) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    return diagonal(std::move(labels), MatrixR::Zero(0, n));
}

CollapseOperatorSet CollapseOperatorSet::from_operators(
    const std::vector<HermitianOperator>& ops, std::vector<std::string> labels,
    const ToleranceConfig& tol) {
    if (ops.empty())
        throw InvalidInput("CollapseOperatorSet: need at least one operator (or use empty())");
    const Eigen::Index n = ops.front().dim();
    for (const auto& op : ops)
        if (op.dim() != n)
            throw InvalidInput("CollapseOperatorSet: operator dimensions differ");
    if (labels.empty()) labels = index_labels(n);
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw InvalidInput("CollapseOperatorSet: label count does not match dimension");

    Eigen::SelfAdjointEigenSolver<MatrixC> solver(ops.front().matrix());
    if (solver.info() != Eigen::Success)
        throw RuntimeFailure("CollapseOperatorSet: eigendecomposition failed");
    const MatrixC U = solver.eigenvectors();

    MatrixR table(static_cast<Eigen::Index>(ops.size()), n);
    double scale_bound = 0.0;
    for (const auto& op : ops) scale_bound = std::max(scale_bound, max_abs(op.matrix()));
    for (std::size_t k = 0; k < ops.size(); ++k) {
        MatrixC d = U.adjoint() * ops[k].matrix() * U;
        MatrixC off = d;
        off.diagonal().setZero();
        if (max_abs(off) > tol.eigen_roundtrip * std::max(scale_bound, 1e-300))
            throw InvalidInput(
                "CollapseOperatorSet: operator " + std::to_string(k) +
                " is not diagonal in the shared eigenbasis; the set does not commute");
        for (Eigen::Index i = 0; i < n; ++i) {
            const Complex e = d(i, i);
            table(static_cast<Eigen::Index>(k), i) = e.real();
        }
    }

    CollapseOperatorSet set;
    set.labels_ = std::move(labels);
    set.eigenvalue_table_ = std::move(table);
    set.eigenbasis_ = U;
    set.identity_basis_ = max_abs(U - MatrixC::Identity(n, n)) == 0.0;
    return set;
}

MatrixC CollapseOperatorSet::operator_matrix(Eigen::Index channel) const {
    if (channel < 0 || channel >= channels())
        throw InvalidInput("CollapseOperatorSet: channel out of range");
    const VectorR d = eigenvalue_table_.row(channel);
    if (identity_basis_) {
        MatrixC m = MatrixC::Zero(dim(), dim());
        m.diagonal() = d.cast<Complex>();
        return m;
    }
    return eigenbasis_ * d.cast<Complex>().asDiagonal() * eigenbasis_.adjoint();
}

double CollapseOperatorSet::verify_commutation() const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < channels(); ++j) {
        const MatrixC aj = operator_matrix(j);
        for (Eigen::Index k = j + 1; k < channels(); ++k) {
            const MatrixC ak = operator_matrix(k);
            worst = std::max(worst, max_abs(aj * ak - ak * aj));
        }
    }
    return worst;
}

DensityMatrix::DensityMatrix(MatrixC matrix, const ToleranceConfig& tol)
    : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.size() == 0)
        throw InvalidInput("DensityMatrix: matrix must be square and nonempty");
    const double scale = std::max(max_abs(matrix_), 1e-300);
    if (max_abs(matrix_ - matrix_.adjoint()) > tol.density_hermitian * scale)
        throw InvalidInput("DensityMatrix: not Hermitian within tolerance");
    const double tr = matrix_.trace().real();
    if (std::abs(tr - 1.0) > tol.density_trace)
        throw InvalidInput("DensityMatrix: trace " + std::to_string(tr) + " is not 1");
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
    const VectorC v = psi.normalized().amplitudes();
    return DensityMatrix(v * v.adjoint());
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<MatrixC> solver(matrix_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void ModelParams::validate() const {
    if (lambda < 0.0) throw InvalidInput("ModelParams: lambda must be >= 0");
    if (!(a > 0.0)) throw InvalidInput("ModelParams: a must be > 0");
    if (!(m0 > 0.0)) throw InvalidInput("ModelParams: m0 must be > 0");
    if (!(dt > 0.0)) throw InvalidInput("ModelParams: dt must be > 0");
}

NoiseTrajectory NoiseTrajectory::draw_raw(Rng& rng, Eigen::Index steps, Eigen::Index channels,
                                          double lambda, double dt) {
    if (steps < 0 || channels < 0) throw InvalidInput("NoiseTrajectory: negative shape");
    if (lambda < 0.0 || !(dt > 0.0)) throw InvalidInput("NoiseTrajectory: bad lambda or dt");
    NoiseTrajectory traj;
    traj.steps = steps;
    traj.channels = channels;
    traj.dt = dt;
    traj.samples = MatrixR(steps, channels);
    const double sigma = std::sqrt(lambda / dt);
    for (Eigen::Index i = 0; i < steps; ++i)
        for (Eigen::Index k = 0; k < channels; ++k)
            traj.samples(i, k) = rng.normal(0.0, sigma);
    return traj;
}

double expectation(const HermitianOperator& op, const StateVector& state,
                   const ToleranceConfig& tol) {
    if (op.dim() != state.dim())
        throw InvalidInput("expectation: dimension mismatch");
    const double n2 = state.squared_norm();
    if (n2 <= 0.0) throw InvalidInput("expectation: zero-norm state");
    const Complex val = state.amplitudes().dot(op.matrix() * state.amplitudes()) / n2;
    if (std::abs(val.imag()) > tol.expectation_imag * std::max(1.0, std::abs(val.real())))
        throw RuntimeFailure("expectation: imaginary residue " + std::to_string(val.imag()));
    return val.real();
}

double variance(const HermitianOperator& op, const StateVector& state,
                const ToleranceConfig& tol) {
    if (op.dim() != state.dim())
        throw InvalidInput("variance: dimension mismatch");
    const double n2 = state.squared_norm();
    if (n2 <= 0.0) throw InvalidInput("variance: zero-norm state");
    const VectorC bpsi = op.matrix() * state.amplitudes();
    const double mean = (state.amplitudes().dot(bpsi) / n2).real();
    const double second = bpsi.squaredNorm() / n2;
    double var = second - mean * mean;
    (void)tol;
    return var < 0.0 ? 0.0 : var;
}

double commutation_check(const std::vector<HermitianOperator>& ops) {
    if (ops.size() < 2) return 0.0;
    const Eigen::Index n = ops.front().dim();
    for (const auto& op : ops)
        if (op.dim() != n) throw InvalidInput("commutation_check: dimensions differ");
    double worst = 0.0;
    for (std::size_t j = 0; j < ops.size(); ++j)
        for (std::size_t k = j + 1; k < ops.size(); ++k) {
            const MatrixC c = ops[j].matrix() * ops[k].matrix() - ops[k].matrix() * ops[j].matrix();
            worst = std::max(worst, max_abs(c));
        }
    return worst;
}

} // namespace csl
