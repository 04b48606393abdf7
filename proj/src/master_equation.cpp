#include "csl/master_equation.hpp"

#include <cmath>

namespace csl {

namespace {

// Prepared generator in the collapse eigenbasis: d rho/dt = -i[H, rho] - G o rho,
// where (G o rho) is the entrywise product with the dephasing rate matrix
// G(n,m) = (lambda/2) sum_k (a_k(n) - a_k(m))^2.
struct Generator {
    MatrixC h;      // Hamiltonian in eigenbasis (zero if absent)
    MatrixR rates;  // dephasing rates
    bool has_h = false;

    MatrixC apply(const MatrixC& rho) const {
        MatrixC out = -rho.cwiseProduct(rates.cast<Complex>());
        if (has_h) out.noalias() += Complex(0.0, -1.0) * (h * rho - rho * h);
        return out;
    }
};

Generator make_generator(const std::optional<HermitianOperator>& hamiltonian,
                         const CollapseOperatorSet& ops, double lambda) {
    if (lambda < 0.0) throw InvalidInput("lindblad: lambda must be >= 0");
    const Eigen::Index n = ops.dim();
    Generator g;
    g.rates = MatrixR::Zero(n, n);
    const MatrixR& table = ops.eigenvalue_table();
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < ops.channels(); ++k) {
                const double d = table(k, r) - table(k, c);
                s += d * d;
            }
            g.rates(r, c) = 0.5 * lambda * s;
        }
    if (hamiltonian) {
        if (hamiltonian->dim() != n) throw InvalidInput("lindblad: hamiltonian dimension mismatch");
        g.h = hamiltonian->matrix();
        if (!ops.eigenbasis_is_identity())
            g.h = ops.eigenbasis().adjoint() * g.h * ops.eigenbasis();
        g.has_h = true;
    }
    return g;
}

MatrixC rk4_step(const Generator& g, const MatrixC& rho, double dt) {
    const MatrixC k1 = g.apply(rho);
    const MatrixC k2 = g.apply(rho + (0.5 * dt) * k1);
    const MatrixC k3 = g.apply(rho + (0.5 * dt) * k2);
    const MatrixC k4 = g.apply(rho + dt * k3);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// renormalize trace to 1, report the pre-renormalization drift
double renormalize(MatrixC& rho) {
    const double tr = rho.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr))
        throw RuntimeFailure("lindblad: trace collapsed to " + std::to_string(tr));
    rho /= tr;
    return std::abs(tr - 1.0);
}

void check_populations(const MatrixC& rho, Eigen::Index step) {
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        if (rho(i, i).real() < -1e-6)
            throw RuntimeFailure("lindblad: population " + std::to_string(i) + " fell to " +
                                 std::to_string(rho(i, i).real()) + " at step " +
                                 std::to_string(step));
}

double min_eig(const MatrixC& rho) {
    Eigen::SelfAdjointEigenSolver<MatrixC> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

MatrixC to_eigenbasis(const CollapseOperatorSet& ops, const MatrixC& rho) {
    if (ops.eigenbasis_is_identity()) return rho;
    return ops.eigenbasis().adjoint() * rho * ops.eigenbasis();
}

MatrixC from_eigenbasis(const CollapseOperatorSet& ops, const MatrixC& rho) {
    if (ops.eigenbasis_is_identity()) return rho;
    return ops.eigenbasis() * rho * ops.eigenbasis().adjoint();
}

} // namespace

DensityMatrix analytic_density(const VectorC& c, const VectorR& eigenvalues, double lambda,
                               double t) {
    if (c.size() != eigenvalues.size())
        throw InvalidInput("analytic_density: amplitude/eigenvalue size mismatch");
    if (t < 0.0) throw InvalidInput("analytic_density: negative time");
    if (lambda < 0.0) throw InvalidInput("analytic_density: negative lambda");
    if (std::abs(c.squaredNorm() - 1.0) > 1e-10)
        throw InvalidInput("analytic_density: amplitudes are not normalized");
    const Eigen::Index n = c.size();
    MatrixC rho(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index s = 0; s < n; ++s) {
            const double d = eigenvalues[r] - eigenvalues[s];
            rho(r, s) = c[r] * std::conj(c[s]) * std::exp(-0.5 * lambda * t * d * d);
        }
    return DensityMatrix(std::move(rho));
}

DensityMatrix lindblad_step(const DensityMatrix& rho,
                            const std::optional<HermitianOperator>& hamiltonian,
                            const CollapseOperatorSet& collapse_ops, double lambda, double dt,
                            double* trace_drift) {
    if (!(dt > 0.0)) throw InvalidInput("lindblad_step: dt must be > 0");
    if (rho.dim() != collapse_ops.dim())
        throw InvalidInput("lindblad_step: density matrix dimension mismatch");
    const Generator g = make_generator(hamiltonian, collapse_ops, lambda);
    MatrixC r = to_eigenbasis(collapse_ops, rho.matrix());
    r = rk4_step(g, r, dt);
    const double drift = renormalize(r);
    if (trace_drift) *trace_drift = drift;
    check_populations(r, 0);
    const double floor = min_eig(r);
    if (floor < -1e-6)
        throw RuntimeFailure("lindblad_step: positivity violated, smallest eigenvalue " +
                             std::to_string(floor));
    return DensityMatrix(from_eigenbasis(collapse_ops, r));
}

LindbladRun lindblad_evolve(const DensityMatrix& rho0,
                            const std::optional<HermitianOperator>& hamiltonian,
                            const CollapseOperatorSet& collapse_ops, double lambda, double dt,
                            Eigen::Index steps, Eigen::Index save_every,
                            Eigen::Index psd_check_interval) {
    if (!(dt > 0.0) || steps < 0 || save_every <= 0 || psd_check_interval <= 0)
        throw InvalidInput("lindblad_evolve: bad step configuration");
    if (rho0.dim() != collapse_ops.dim())
        throw InvalidInput("lindblad_evolve: density matrix dimension mismatch");
    const Generator g = make_generator(hamiltonian, collapse_ops, lambda);

    LindbladRun run;
    MatrixC r = to_eigenbasis(collapse_ops, rho0.matrix());
    run.min_eigenvalue_seen = min_eig(r);
    auto save = [&](Eigen::Index step) {
        run.times.push_back(static_cast<double>(step) * dt);
        MatrixC out = from_eigenbasis(collapse_ops, r);
        run.states.emplace_back((out + out.adjoint()) / 2.0);
    };
    save(0);
    for (Eigen::Index step = 1; step <= steps; ++step) {
        r = rk4_step(g, r, dt);
        run.max_trace_drift = std::max(run.max_trace_drift, renormalize(r));
        check_populations(r, step);
        if (step % psd_check_interval == 0 || step == steps) {
            const double floor = min_eig(r);
            run.min_eigenvalue_seen = std::min(run.min_eigenvalue_seen, floor);
            if (floor < -1e-6)
                throw RuntimeFailure("lindblad_evolve: positivity violated at step " +
                                     std::to_string(step) + ", smallest eigenvalue " +
                                     std::to_string(floor));
        }
        if (step % save_every == 0) save(step);
    }
    return run;
}

double double_commutator_rate(const DensityMatrix& rho, const HermitianOperator& hamiltonian,
                              const CollapseOperatorSet& collapse_ops, double lambda) {
    if (rho.dim() != collapse_ops.dim() || hamiltonian.dim() != collapse_ops.dim())
        throw InvalidInput("double_commutator_rate: dimension mismatch");
    const Generator g = make_generator(hamiltonian, collapse_ops, lambda);
    const MatrixC r = to_eigenbasis(collapse_ops, rho.matrix());
    // Tr[rho (G o H)] with G the dephasing rate matrix
    const MatrixC gh = g.h.cwiseProduct(g.rates.cast<Complex>());
    return (r * gh).trace().real();
}

EnergyLedger mean_energies(const std::vector<DensityMatrix>& rho_path, double dt,
                           const HermitianOperator& hamiltonian,
                           const CollapseOperatorSet& collapse_ops, double lambda) {
    if (rho_path.empty()) throw InvalidInput("mean_energies: empty path");
    if (!(dt > 0.0)) throw InvalidInput("mean_energies: dt must be > 0");
    for (const auto& rho : rho_path)
        if (rho.dim() != hamiltonian.dim())
            throw InvalidInput("mean_energies: mismatched grids");

    EnergyLedger ledger;
    const std::size_t n = rho_path.size();
    ledger.times.resize(n);
    ledger.matter_energy.resize(n);
    ledger.noise_energy.resize(n);
    ledger.interaction_energy.assign(n, 0.0);
    ledger.noise_energy_integrated.resize(n);

    std::vector<double> rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        ledger.times[i] = static_cast<double>(i) * dt;
        ledger.matter_energy[i] = (rho_path[i].matrix() * hamiltonian.matrix()).trace().real();
        rate[i] = double_commutator_rate(rho_path[i], hamiltonian, collapse_ops, lambda);
    }
    for (std::size_t i = 0; i < n; ++i)
        ledger.noise_energy[i] = -(ledger.matter_energy[i] - ledger.matter_energy[0]);

    // trapezoid integral of the rate; the sign is fixed by the conservation
    // requirement (it lands on +1 for this generator)
    std::vector<double> integral(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        integral[i] = integral[i - 1] + 0.5 * dt * (rate[i - 1] + rate[i]);
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        plus = std::max(plus, std::abs(integral[i] - ledger.noise_energy[i]));
        minus = std::max(minus, std::abs(-integral[i] - ledger.noise_energy[i]));
    }
    const double sign = plus <= minus ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) ledger.noise_energy_integrated[i] = sign * integral[i];
    ledger.crosscheck_residual = std::min(plus, minus);
    return ledger;
}

EnergySpectrum energy_distribution(const StateVector& psi0, const HermitianOperator& hamiltonian,
                                   const CollapseOperatorSet& collapse_ops, double lambda,
                                   const SpectrumGrid& grid) {
    if (psi0.dim() != collapse_ops.dim() || hamiltonian.dim() != collapse_ops.dim())
        throw InvalidInput("energy_distribution: dimension mismatch");
    if (!(grid.half_width > 0.0) || grid.points < 2)
        throw InvalidInput("energy_distribution: bad grid");
    if (lambda < 0.0) throw InvalidInput("energy_distribution: negative lambda");

    const Eigen::Index dim = collapse_ops.dim();
    MatrixC h = hamiltonian.matrix();
    if (!collapse_ops.eigenbasis_is_identity())
        h = collapse_ops.eigenbasis().adjoint() * h * collapse_ops.eigenbasis();
    VectorC psi = psi0.normalized().amplitudes();
    if (!collapse_ops.eigenbasis_is_identity())
        psi = collapse_ops.eigenbasis().adjoint() * psi;

    // Gamma is diagonal in the collapse eigenbasis
    VectorR gamma = VectorR::Zero(dim);
    const MatrixR& table = collapse_ops.eigenvalue_table();
    for (Eigen::Index n = 0; n < dim; ++n)
        gamma[n] = 0.5 * lambda * table.col(n).squaredNorm();

    double center;
    if (grid.center) {
        center = *grid.center;
    } else {
        Eigen::SelfAdjointEigenSolver<MatrixC> es(h, Eigen::EigenvaluesOnly);
        center = 0.5 * (es.eigenvalues().minCoeff() + es.eigenvalues().maxCoeff());
    }

    EnergySpectrum spec;
    spec.cutoff = grid.half_width;
    spec.energies.resize(grid.points);
    spec.density = VectorR::Zero(grid.points);
    MatrixC m(dim, dim);
    for (Eigen::Index i = 0; i < grid.points; ++i) {
        const double e = center - grid.half_width +
                         2.0 * grid.half_width * static_cast<double>(i) /
                             static_cast<double>(grid.points - 1);
        spec.energies[i] = e;
        m = -h;
        m.diagonal().array() += e;
        m.diagonal() -= Complex(0.0, 1.0) * gamma.cast<Complex>();
        Eigen::PartialPivLU<MatrixC> lu(m);
        const VectorC x = lu.solve(psi);
        if (!x.allFinite() || (m * x - psi).norm() > 1e-8 * psi.norm()) {
            spec.skipped.push_back(i);
            continue;
        }
        const double p = (x.array().abs2() * gamma.array()).sum() / M_PI;
        spec.density[i] = p < 0.0 ? 0.0 : p;
    }
    return spec;
}

double trapezoid(const VectorR& x, const VectorR& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("trapezoid: bad input");
    double s = 0.0;
    for (Eigen::Index i = 1; i < x.size(); ++i)
        s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

} // namespace csl
