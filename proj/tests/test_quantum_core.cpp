#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csl/types.hpp"

using namespace csl;

namespace {

StateVector make_state(std::initializer_list<Complex> amps) {
    VectorC v(static_cast<Eigen::Index>(amps.size()));
    Eigen::Index i = 0;
    for (auto a : amps) v[i++] = a;
    return StateVector::from_amplitudes(v);
}

HermitianOperator sigma_z() {
    MatrixC m(2, 2);
    m << 1, 0, 0, -1;
    return HermitianOperator(m);
}

MatrixC random_unitary(Eigen::Index n, Rng& rng) {
    MatrixC g(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
    Eigen::HouseholderQR<MatrixC> qr(g);
    return qr.householderQ();
}

} // namespace

TEST_CASE("expectation on pinned two-level cases") {
    const auto sz = sigma_z();
    CHECK(expectation(sz, make_state({1.0, 0.0})) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expectation(sz, make_state({M_SQRT1_2, M_SQRT1_2})) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(expectation(sz, make_state({std::sqrt(0.3), std::sqrt(0.7)})) ==
          doctest::Approx(-0.4).epsilon(1e-12));
}

TEST_CASE("variance on pinned two-level cases") {
    const auto sz = sigma_z();
    CHECK(variance(sz, make_state({1.0, 0.0})) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(variance(sz, make_state({M_SQRT1_2, M_SQRT1_2})) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(variance(sz, make_state({std::sqrt(0.3), std::sqrt(0.7)})) ==
          doctest::Approx(0.84).epsilon(1e-12));
}

TEST_CASE("commutation_check") {
    MatrixC sx(2, 2), sy(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, Complex(0, -1), Complex(0, 1), 0;
    const HermitianOperator x(sx), y(sy);

    CHECK(commutation_check({HermitianOperator::diagonal(VectorR::LinSpaced(3, 1, 3)),
                             HermitianOperator::diagonal(VectorR::LinSpaced(3, -1, 5))}) == 0.0);
    // [sigma_x, sigma_y] = 2i sigma_z: entries of magnitude 2
    CHECK(commutation_check({x, y}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(commutation_check({x}) == 0.0);
}

TEST_CASE("expectation invariant under state rescaling") {
    Rng rng(2024, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform() * 6);
        MatrixC g(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
        const HermitianOperator op((g + MatrixC(g.adjoint())) / 2.0);
        VectorC amps(n);
        for (Eigen::Index i = 0; i < n; ++i) amps[i] = Complex(rng.normal(), rng.normal());
        const auto psi = StateVector::from_amplitudes(amps);
        const Complex scale = Complex(rng.normal(), rng.normal()) * 7.3;
        if (std::abs(scale) == 0.0) continue;
        const auto scaled = StateVector::from_amplitudes(amps * scale);
        const double base = expectation(op, psi);
        const double other = expectation(op, scaled);
        CHECK(std::abs(base - other) <= 1e-12 * std::max(1.0, std::abs(base)));
    }
}

TEST_CASE("variance vanishes exactly on eigenvectors") {
    Rng rng(7, 0);
    const MatrixC u = random_unitary(4, rng);
    VectorR evals(4);
    evals << -2.0, 0.5, 0.5, 3.0;
    const HermitianOperator op(u * evals.cast<Complex>().asDiagonal() * u.adjoint());
    for (Eigen::Index i = 0; i < 4; ++i) {
        const auto eigvec = StateVector::from_amplitudes(u.col(i));
        CHECK(variance(op, eigvec) <= 1e-10);
    }
    // generic superposition must not vanish
    const auto mix = StateVector::from_amplitudes(u.col(0) + u.col(3));
    CHECK(variance(op, mix) > 0.1);
}

TEST_CASE("collapse operator set round-trips through its eigenvalue table") {
    Rng rng(99, 0);
    const Eigen::Index n = 5;
    const MatrixC u = random_unitary(n, rng);
    std::vector<HermitianOperator> ops;
    MatrixR table(3, n);
    for (int k = 0; k < 3; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) table(k, i) = std::round(rng.normal() * 4.0) / 2.0;
        ops.emplace_back(u * table.row(k).transpose().cast<Complex>().asDiagonal() * u.adjoint());
    }
    // distinct eigenvalues in channel 0 so the solver basis is unambiguous
    table.row(0) = VectorR::LinSpaced(n, -2, 2).transpose();
    ops[0] = HermitianOperator(u * table.row(0).transpose().cast<Complex>().asDiagonal() *
                               u.adjoint());

    const auto set = CollapseOperatorSet::from_operators(ops);
    CHECK(set.channels() == 3);
    CHECK(set.verify_commutation() <= 1e-10);
    for (int k = 0; k < 3; ++k)
        CHECK(max_abs(set.operator_matrix(k) - ops[static_cast<std::size_t>(k)].matrix()) <=
              1e-10);
}

TEST_CASE("from_operators rejects a non-commuting family") {
    MatrixC sx(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sz << 1, 0, 0, -1;
    CHECK_THROWS_AS(CollapseOperatorSet::from_operators({HermitianOperator(sz),
                                                         HermitianOperator(sx)}),
                    InvalidInput);
}

TEST_CASE("hermiticity is enforced") {
    MatrixC bad(2, 2);
    bad << 1, 2, 3, 4;
    CHECK_THROWS_AS(HermitianOperator{bad}, InvalidInput);
}

TEST_CASE("density matrix invariants") {
    MatrixC ok(2, 2);
    ok << 0.25, 0.1, 0.1, 0.75;
    CHECK(DensityMatrix(ok).min_eigenvalue() > 0.0);

    MatrixC bad_trace(2, 2);
    bad_trace << 0.6, 0, 0, 0.6;
    CHECK_THROWS_AS(DensityMatrix{bad_trace}, InvalidInput);

    const auto pure = DensityMatrix::pure(make_state({1.0, 2.0}));
    CHECK(std::abs(pure.matrix().trace().real() - 1.0) <= 1e-12);
    CHECK(pure.min_eigenvalue() >= -1e-12);
}

TEST_CASE("model params validation") {
    ModelParams p;
    p.validate(); // GRW defaults are valid
    CHECK(p.lambda == doctest::Approx(1e-16));
    CHECK(p.a == doctest::Approx(1e-5));

    ModelParams bad = p;
    bad.lambda = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad = p;
    bad.dt = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("raw noise measure: zero mean, variance lambda/dt") {
    Rng rng(5, 1);
    const double lambda = 0.8, dt = 0.05;
    const auto noise = NoiseTrajectory::draw_raw(rng, 4000, 4, lambda, dt);
    const double mean = noise.samples.mean();
    double var = 0.0;
    for (Eigen::Index i = 0; i < noise.steps; ++i)
        for (Eigen::Index k = 0; k < noise.channels; ++k)
            var += (noise.samples(i, k) - mean) * (noise.samples(i, k) - mean);
    var /= static_cast<double>(noise.steps * noise.channels - 1);
    const double sigma2 = lambda / dt;
    const double se_mean = std::sqrt(sigma2 / (4000.0 * 4.0));
    CHECK(std::abs(mean) < 4.0 * se_mean);
    CHECK(var == doctest::Approx(sigma2).epsilon(0.05));
}

TEST_CASE("dimension mismatches are rejected") {
    const auto sz = sigma_z();
    const auto psi3 = make_state({1.0, 0.0, 0.0});
    CHECK_THROWS_AS(expectation(sz, psi3), InvalidInput);
    CHECK_THROWS_AS(variance(sz, psi3), InvalidInput);
}
