#include "csl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace csl {

namespace {

struct Prepared {
    MatrixR table;  // channels x dim, eigenvalues a_k(n)
    VectorR sqsum;  // per basis entry, sum_k a_k(n)^2
    std::optional<MatrixC> propagator; // exp(-i H dt) in the collapse eigenbasis
    double lambda = 0.0;
    double dt = 0.0;
    Eigen::Index dim = 0;
    Eigen::Index channels = 0;
};

Prepared prepare(const CollapseOperatorSet& ops,
                 const std::optional<HermitianOperator>& hamiltonian,
                 const ModelParams& params) {
    params.validate();
    Prepared p;
    p.table = ops.eigenvalue_table();
    p.dim = ops.dim();
    p.channels = ops.channels();
    p.lambda = params.lambda;
    p.dt = params.dt;
    p.sqsum = VectorR::Zero(p.dim);
    for (Eigen::Index n = 0; n < p.dim; ++n) p.sqsum[n] = p.table.col(n).squaredNorm();
    if (hamiltonian) {
        if (hamiltonian->dim() != p.dim)
            throw InvalidInput("dynamics: hamiltonian dimension mismatch");
        MatrixC h = hamiltonian->matrix();
        if (!ops.eigenbasis_is_identity())
            h = ops.eigenbasis().adjoint() * h * ops.eigenbasis();
        Eigen::SelfAdjointEigenSolver<MatrixC> es(h);
        if (es.info() != Eigen::Success)
            throw RuntimeFailure("dynamics: hamiltonian eigendecomposition failed");
        VectorC phases(p.dim);
        for (Eigen::Index i = 0; i < p.dim; ++i)
            phases[i] = std::exp(Complex(0.0, -es.eigenvalues()[i] * p.dt));
        p.propagator = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    }
    return p;
}

VectorC to_eigenbasis(const CollapseOperatorSet& ops, const StateVector& state) {
    if (state.dim() != ops.dim())
        throw InvalidInput("dynamics: state dimension does not match collapse operators");
    if (ops.eigenbasis_is_identity()) return state.amplitudes();
    return ops.eigenbasis().adjoint() * state.amplitudes();
}

VectorC from_eigenbasis(const CollapseOperatorSet& ops, const VectorC& psi) {
    if (ops.eigenbasis_is_identity()) return psi;
    return ops.eigenbasis() * psi;
}

// Renormalized stepping of a single trajectory in the collapse eigenbasis.
// The raw-Gaussian reference factor common to all amplitudes is divided out,
// so the per-step relative amplitude factor is exp[a_k(n) w_k dt - lambda
// a_k(n)^2 dt] per channel, and the accumulated log of the squared-norm
// growth is the log of the Radon-Nikodym weight of the physical measure
// relative to raw Gaussian sampling.
class Stepper {
public:
    Stepper(const Prepared& p, VectorC psi0) : p_(p), psi_(std::move(psi0)) {
        const double n2 = psi_.squaredNorm();
        if (!(n2 > 0.0)) throw InvalidInput("dynamics: initial state has zero norm");
        psi_ /= std::sqrt(n2);
        scratch_.resize(p_.dim);
        noise_.resize(p_.channels);
    }

    void apply_unitary() {
        if (p_.propagator) psi_ = (*p_.propagator) * psi_;
    }

    // Collapse factors for a given noise slice; renormalizes and accumulates
    // the weight. Throws on norm underflow or non-finite amplitudes.
    void apply_collapse(const VectorR& w, Eigen::Index step) {
        if (p_.channels > 0) {
            scratch_.noalias() = p_.table.transpose() * w;
            scratch_ = p_.dt * scratch_ - (p_.lambda * p_.dt) * p_.sqsum;
            psi_.array() *= scratch_.array().exp().cast<Complex>();
        }
        const double n2 = psi_.squaredNorm();
        if (!std::isfinite(n2) || n2 <= 0.0)
            throw RuntimeFailure("trajectory aborted: norm underflow at step " +
                                 std::to_string(step));
        log_weight_ += std::log(n2);
        psi_ /= std::sqrt(n2);
    }

    const VectorR& draw_raw(Rng& rng) {
        const double sigma = std::sqrt(p_.lambda / p_.dt);
        for (Eigen::Index k = 0; k < p_.channels; ++k) noise_[k] = rng.normal(0.0, sigma);
        return noise_;
    }

    // Mixture of Gaussians with the current squared amplitudes as weights:
    // the exact one-step conditional of the physical measure.
    const VectorR& draw_physical(Rng& rng) {
        const double u = rng.uniform();
        double cum = 0.0;
        Eigen::Index n = p_.dim - 1;
        for (Eigen::Index i = 0; i < p_.dim; ++i) {
            cum += std::norm(psi_[i]);
            if (u < cum) {
                n = i;
                break;
            }
        }
        const double sigma = std::sqrt(p_.lambda / p_.dt);
        for (Eigen::Index k = 0; k < p_.channels; ++k)
            noise_[k] = rng.normal(2.0 * p_.lambda * p_.table(k, n), sigma);
        return noise_;
    }

    const VectorC& psi() const { return psi_; }
    double log_weight() const { return log_weight_; }

private:
    const Prepared& p_;
    VectorC psi_;
    VectorR scratch_;
    VectorR noise_;
    double log_weight_ = 0.0;
};

std::optional<Eigen::Index> outcome_index(const VectorC& psi, double tol) {
    Eigen::Index best = 0;
    double pmax = 0.0;
    const double n2 = psi.squaredNorm();
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        const double pi = std::norm(psi[i]) / n2;
        if (pi > pmax) {
            pmax = pi;
            best = i;
        }
    }
    if (pmax > 1.0 - tol) return best;
    return std::nullopt;
}

std::vector<Eigen::Index> snap_save_steps(const std::vector<double>& times, double dt,
                                          Eigen::Index total_steps) {
    std::vector<Eigen::Index> steps;
    steps.reserve(times.size());
    for (double t : times) {
        if (t < 0.0) throw InvalidInput("dynamics: negative save time");
        const auto s = static_cast<Eigen::Index>(std::llround(t / dt));
        if (s > total_steps)
            throw InvalidInput("dynamics: save time beyond horizon");
        steps.push_back(s);
    }
    for (std::size_t i = 1; i < steps.size(); ++i)
        if (steps[i] <= steps[i - 1])
            throw InvalidInput("dynamics: save times must be strictly increasing on the dt grid");
    return steps;
}

// Accumulators for one contiguous block of trajectories. Sums run in
// ascending trajectory index; blocks merge in ascending block index, so the
// reduction is independent of thread scheduling.
struct SliceAcc {
    double sw = 0.0, sw2 = 0.0;
    MatrixC swz;
    MatrixR s2re, s2re2, s2im, s2im2;
    struct Obs {
        double swx = 0, swx2 = 0, sw2x = 0, sw2x2 = 0, sw2x4 = 0;
    };
    std::vector<Obs> obs;

    void init(Eigen::Index dim, std::size_t nobs) {
        swz = MatrixC::Zero(dim, dim);
        s2re = MatrixR::Zero(dim, dim);
        s2re2 = MatrixR::Zero(dim, dim);
        s2im = MatrixR::Zero(dim, dim);
        s2im2 = MatrixR::Zero(dim, dim);
        obs.assign(nobs, Obs{});
    }

    void add(double W, const VectorC& psi, const std::vector<MatrixC>& obs_ops) {
        const double W2 = W * W;
        sw += W;
        sw2 += W2;
        const MatrixC z = psi * psi.adjoint();
        swz += W * z;
        const MatrixR zre = z.real(), zim = z.imag();
        s2re += W2 * zre;
        s2re2 += W2 * zre.cwiseProduct(zre);
        s2im += W2 * zim;
        s2im2 += W2 * zim.cwiseProduct(zim);
        for (std::size_t j = 0; j < obs_ops.size(); ++j) {
            const double x = psi.dot(obs_ops[j] * psi).real();
            const double x2 = x * x;
            auto& o = obs[j];
            o.swx += W * x;
            o.swx2 += W * x2;
            o.sw2x += W2 * x;
            o.sw2x2 += W2 * x2;
            o.sw2x4 += W2 * x2 * x2;
        }
    }

    void merge(const SliceAcc& b) {
        sw += b.sw;
        sw2 += b.sw2;
        swz += b.swz;
        s2re += b.s2re;
        s2re2 += b.s2re2;
        s2im += b.s2im;
        s2im2 += b.s2im2;
        for (std::size_t j = 0; j < obs.size(); ++j) {
            obs[j].swx += b.obs[j].swx;
            obs[j].swx2 += b.obs[j].swx2;
            obs[j].sw2x += b.obs[j].sw2x;
            obs[j].sw2x2 += b.obs[j].sw2x2;
            obs[j].sw2x4 += b.obs[j].sw2x4;
        }
    }
};

struct BlockAcc {
    std::vector<SliceAcc> slices;
    VectorR sw_label, sw2_label;
    double sw_unresolved = 0.0, sw2_unresolved = 0.0;
    double sw_final = 0.0, sw2_final = 0.0;
    long completed = 0, aborted = 0;
    std::vector<std::string> abort_messages;

    void init(Eigen::Index dim, std::size_t nslices, std::size_t nobs) {
        slices.resize(nslices);
        for (auto& s : slices) s.init(dim, nobs);
        sw_label = VectorR::Zero(dim);
        sw2_label = VectorR::Zero(dim);
    }

    void merge(const BlockAcc& b) {
        for (std::size_t i = 0; i < slices.size(); ++i) slices[i].merge(b.slices[i]);
        sw_label += b.sw_label;
        sw2_label += b.sw2_label;
        sw_unresolved += b.sw_unresolved;
        sw2_unresolved += b.sw2_unresolved;
        sw_final += b.sw_final;
        sw2_final += b.sw2_final;
        completed += b.completed;
        aborted += b.aborted;
        for (const auto& m : b.abort_messages)
            if (abort_messages.size() < 8) abort_messages.push_back(m);
    }
};

constexpr long kBlockSize = 64;

void run_block(const EnsembleConfig& cfg, const Prepared& p, const VectorC& psi0,
               const std::vector<Eigen::Index>& save_steps, Eigen::Index total_steps,
               const std::vector<MatrixC>& obs_ops, long begin, long end, BlockAcc& acc) {
    for (long i = begin; i < end; ++i) {
        Rng rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        try {
            Stepper st(p, psi0);
            std::size_t cursor = 0;
            auto record = [&](std::size_t slice) {
                const double W = cfg.scheme == Scheme::A ? std::exp(st.log_weight()) : 1.0;
                if (!std::isfinite(W))
                    throw RuntimeFailure("trajectory aborted: non-finite importance weight");
                acc.slices[slice].add(W, st.psi(), obs_ops);
            };
            while (cursor < save_steps.size() && save_steps[cursor] == 0) record(cursor++);
            for (Eigen::Index step = 1; step <= total_steps; ++step) {
                st.apply_unitary();
                const VectorR& w = cfg.scheme == Scheme::A ? st.draw_raw(rng)
                                                           : st.draw_physical(rng);
                st.apply_collapse(w, step);
                while (cursor < save_steps.size() && save_steps[cursor] == step)
                    record(cursor++);
            }
            const double W = cfg.scheme == Scheme::A ? std::exp(st.log_weight()) : 1.0;
            if (!std::isfinite(W))
                throw RuntimeFailure("trajectory aborted: non-finite importance weight");
            acc.sw_final += W;
            acc.sw2_final += W * W;
            if (auto n = outcome_index(st.psi(), cfg.outcome_tolerance)) {
                acc.sw_label[*n] += W;
                acc.sw2_label[*n] += W * W;
            } else {
                acc.sw_unresolved += W;
                acc.sw2_unresolved += W * W;
            }
            acc.completed += 1;
        } catch (const RuntimeFailure& e) {
            acc.aborted += 1;
            if (acc.abort_messages.size() < 8)
                acc.abort_messages.push_back("trajectory " + std::to_string(i) + ": " + e.what());
        }
    }
}

// standard error of a self-normalized weighted mean:
// sqrt(sum W^2 (x - xbar)^2) / sum W, from the accumulated power sums
double weighted_se(double sw, double sw2_stat, double sw2x, double sw2x2, double xbar) {
    const double num = std::max(0.0, sw2x2 - 2.0 * xbar * sw2x + xbar * xbar * sw2_stat);
    return sw > 0.0 ? std::sqrt(num) / sw : 0.0;
}

} // namespace

StateVector linear_step(const StateVector& state, const VectorR& noise_slice,
                        const CollapseOperatorSet& collapse_ops,
                        const std::optional<HermitianOperator>& hamiltonian,
                        const ModelParams& params) {
    const Prepared p = prepare(collapse_ops, hamiltonian, params);
    if (noise_slice.size() != p.channels)
        throw InvalidInput("linear_step: noise slice has wrong channel count");
    if (p.lambda == 0.0 && p.channels > 0 && noise_slice.cwiseAbs().maxCoeff() > 0.0)
        throw InvalidInput("linear_step: lambda = 0 with nonzero noise (division by zero)");
    if (!(state.squared_norm() > 0.0)) throw InvalidInput("linear_step: zero-norm state");

    VectorC psi = to_eigenbasis(collapse_ops, state);
    if (p.propagator) psi = (*p.propagator) * psi;
    if (p.channels > 0 && p.lambda > 0.0) {
        for (Eigen::Index n = 0; n < p.dim; ++n) {
            double expo = 0.0;
            for (Eigen::Index k = 0; k < p.channels; ++k) {
                const double d = noise_slice[k] - 2.0 * p.lambda * p.table(k, n);
                expo += d * d;
            }
            psi[n] *= std::exp(-(p.dt / (4.0 * p.lambda)) * expo);
        }
    }
    return StateVector(state.labels(), from_eigenbasis(collapse_ops, psi));
}

double trajectory_weight(const StateVector& initial, const NoiseTrajectory& noise,
                         const CollapseOperatorSet& collapse_ops,
                         const std::optional<HermitianOperator>& hamiltonian,
                         const ModelParams& params) {
    const Prepared p = prepare(collapse_ops, hamiltonian, params);
    if (noise.channels != p.channels)
        throw InvalidInput("trajectory_weight: noise channel count mismatch");
    if (noise.steps > 0 && noise.dt != p.dt)
        throw InvalidInput("trajectory_weight: noise step size differs from params.dt");
    if (p.lambda == 0.0 && p.channels > 0 && noise.steps > 0 &&
        noise.samples.cwiseAbs().maxCoeff() > 0.0)
        throw InvalidInput("trajectory_weight: lambda = 0 with nonzero noise");

    Stepper st(p, to_eigenbasis(collapse_ops, initial));
    for (Eigen::Index i = 0; i < noise.steps; ++i) {
        st.apply_unitary();
        st.apply_collapse(noise.samples.row(i).transpose(), i);
    }
    return std::exp(st.log_weight());
}

std::pair<StateVector, VectorR> physical_step(const StateVector& state, Rng& rng,
                                              const CollapseOperatorSet& collapse_ops,
                                              const std::optional<HermitianOperator>& hamiltonian,
                                              const ModelParams& params) {
    const Prepared p = prepare(collapse_ops, hamiltonian, params);
    Stepper st(p, to_eigenbasis(collapse_ops, state));
    st.apply_unitary();
    const VectorR w = st.draw_physical(rng);
    st.apply_collapse(w, 0);
    return {StateVector(state.labels(), from_eigenbasis(collapse_ops, st.psi())), w};
}

std::optional<std::string> collapse_outcome(const StateVector& state, double tol) {
    if (!(tol > 0.0) || tol >= 1.0)
        throw InvalidInput("collapse_outcome: tolerance must be in (0, 1)");
    if (auto n = outcome_index(state.amplitudes(), tol)) return state.labels()[*n];
    return std::nullopt;
}

EnsembleStats run_ensemble(const EnsembleConfig& cfg) {
    if (cfg.trajectories <= 0) throw InvalidInput("run_ensemble: trajectory count must be > 0");
    if (!(cfg.horizon >= 0.0)) throw InvalidInput("run_ensemble: negative horizon");
    const Prepared p = prepare(cfg.collapse_ops, cfg.hamiltonian, cfg.params);
    const VectorC psi0 = to_eigenbasis(cfg.collapse_ops, cfg.initial.normalized());
    const auto total_steps = static_cast<Eigen::Index>(std::llround(cfg.horizon / cfg.params.dt));
    const auto save_steps = snap_save_steps(cfg.save_times, cfg.params.dt, total_steps);

    std::vector<MatrixC> obs_ops;
    for (const auto& [name, op] : cfg.observables) {
        if (op.dim() != p.dim)
            throw InvalidInput("run_ensemble: observable '" + name + "' has wrong dimension");
        MatrixC m = op.matrix();
        if (!cfg.collapse_ops.eigenbasis_is_identity())
            m = cfg.collapse_ops.eigenbasis().adjoint() * m * cfg.collapse_ops.eigenbasis();
        obs_ops.push_back(std::move(m));
    }

    const long nblocks = (cfg.trajectories + kBlockSize - 1) / kBlockSize;
    std::vector<BlockAcc> blocks(static_cast<std::size_t>(nblocks));
    for (auto& b : blocks) b.init(p.dim, save_steps.size(), obs_ops.size());

    auto process = [&](long bi) {
        const long begin = bi * kBlockSize;
        const long end = std::min(cfg.trajectories, begin + kBlockSize);
        run_block(cfg, p, psi0, save_steps, total_steps, obs_ops, begin, end,
                  blocks[static_cast<std::size_t>(bi)]);
    };

    const int workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(nblocks)));
    if (workers == 1) {
        for (long bi = 0; bi < nblocks; ++bi) process(bi);
    } else {
        std::vector<std::future<void>> futs;
        for (int wi = 0; wi < workers; ++wi)
            futs.push_back(std::async(std::launch::async, [&, wi] {
                for (long bi = wi; bi < nblocks; bi += workers) process(bi);
            }));
        for (auto& f : futs) f.get();
    }

    BlockAcc total;
    total.init(p.dim, save_steps.size(), obs_ops.size());
    for (const auto& b : blocks) total.merge(b);

    if (total.completed == 0)
        throw RuntimeFailure("run_ensemble: every trajectory aborted");

    EnsembleStats stats;
    stats.labels = cfg.collapse_ops.labels();
    stats.trajectory_count = total.completed;
    stats.aborted_count = total.aborted;
    stats.abort_messages = total.abort_messages;

    const double SW = total.sw_final;
    const double SW2 = total.sw2_final;
    for (Eigen::Index n = 0; n < p.dim; ++n) {
        if (total.sw_label[n] == 0.0) continue;
        const double f = total.sw_label[n] / SW;
        const double num = total.sw2_label[n] * (1.0 - f) * (1.0 - f) +
                           (SW2 - total.sw2_label[n]) * f * f;
        stats.outcome_frequencies[stats.labels[static_cast<std::size_t>(n)]] = f;
        stats.outcome_se[stats.labels[static_cast<std::size_t>(n)]] = std::sqrt(num) / SW;
    }
    stats.unresolved_fraction = total.sw_unresolved / SW;

    const double n = static_cast<double>(total.completed);
    stats.mean_weight = SW / n;
    if (total.completed > 1) {
        const double var = std::max(0.0, (SW2 - SW * SW / n) / (n - 1.0));
        stats.se_mean_weight = std::sqrt(var / n);
    }

    for (std::size_t si = 0; si < save_steps.size(); ++si) {
        const auto& a = total.slices[si];
        EnsembleSlice slice;
        slice.time = static_cast<double>(save_steps[si]) * cfg.params.dt;
        slice.mean_weight = a.sw / n;
        MatrixC rho = a.swz / a.sw;
        if (!cfg.collapse_ops.eigenbasis_is_identity())
            rho = cfg.collapse_ops.eigenbasis() * rho * cfg.collapse_ops.eigenbasis().adjoint();
        slice.density = DensityMatrix((rho + rho.adjoint()) / 2.0);
        slice.density_se_re = MatrixR::Zero(p.dim, p.dim);
        slice.density_se_im = MatrixR::Zero(p.dim, p.dim);
        const MatrixR mre = (a.swz / a.sw).real(), mim = (a.swz / a.sw).imag();
        for (Eigen::Index r = 0; r < p.dim; ++r)
            for (Eigen::Index c = 0; c < p.dim; ++c) {
                slice.density_se_re(r, c) =
                    weighted_se(a.sw, a.sw2, a.s2re(r, c), a.s2re2(r, c), mre(r, c));
                slice.density_se_im(r, c) =
                    weighted_se(a.sw, a.sw2, a.s2im(r, c), a.s2im2(r, c), mim(r, c));
            }
        for (const auto& o : a.obs) {
            ObservableMoments m;
            m.mean = o.swx / a.sw;
            m.second_moment = o.swx2 / a.sw;
            m.variance = std::max(0.0, m.second_moment - m.mean * m.mean);
            m.se_mean = weighted_se(a.sw, a.sw2, o.sw2x, o.sw2x2, m.mean);
            m.se_second_moment = weighted_se(a.sw, a.sw2, o.sw2x2, o.sw2x4, m.second_moment);
            slice.observables.push_back(m);
        }
        stats.slices.push_back(std::move(slice));
    }
    return stats;
}

TrajectoryRecord run_trajectory(const EnsembleConfig& cfg, long index) {
    const Prepared p = prepare(cfg.collapse_ops, cfg.hamiltonian, cfg.params);
    const VectorC psi0 = to_eigenbasis(cfg.collapse_ops, cfg.initial.normalized());
    const auto total_steps = static_cast<Eigen::Index>(std::llround(cfg.horizon / cfg.params.dt));
    const auto save_steps = snap_save_steps(cfg.save_times, cfg.params.dt, total_steps);

    TrajectoryRecord rec;
    rec.seed = Rng::derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index));
    Rng rng(cfg.master_seed, static_cast<std::uint64_t>(index));
    Stepper st(p, psi0);

    MatrixR noise(total_steps, p.channels);
    std::size_t cursor = 0;
    auto record = [&](std::size_t slice) {
        rec.save_times.push_back(static_cast<double>(save_steps[slice]) * cfg.params.dt);
        rec.states.emplace_back(cfg.initial.labels(),
                                from_eigenbasis(cfg.collapse_ops, st.psi()));
    };
    while (cursor < save_steps.size() && save_steps[cursor] == 0) record(cursor++);
    for (Eigen::Index step = 1; step <= total_steps; ++step) {
        st.apply_unitary();
        const VectorR& w = cfg.scheme == Scheme::A ? st.draw_raw(rng) : st.draw_physical(rng);
        if (cfg.store_noise) noise.row(step - 1) = w.transpose();
        st.apply_collapse(w, step);
        while (cursor < save_steps.size() && save_steps[cursor] == step) record(cursor++);
    }
    rec.weight = cfg.scheme == Scheme::A ? std::exp(st.log_weight()) : 1.0;
    if (auto n = outcome_index(st.psi(), cfg.outcome_tolerance))
        rec.outcome = cfg.collapse_ops.labels()[static_cast<std::size_t>(*n)];
    if (cfg.store_noise) {
        NoiseTrajectory nt;
        nt.steps = total_steps;
        nt.channels = p.channels;
        nt.dt = cfg.params.dt;
        nt.samples = std::move(noise);
        rec.noise = std::move(nt);
    }
    return rec;
}

HermitianOperator basis_projector(const CollapseOperatorSet& ops, Eigen::Index n) {
    if (n < 0 || n >= ops.dim()) throw InvalidInput("basis_projector: index out of range");
    MatrixC m = MatrixC::Zero(ops.dim(), ops.dim());
    m(n, n) = 1.0;
    if (!ops.eigenbasis_is_identity())
        m = ops.eigenbasis() * m * ops.eigenbasis().adjoint();
    return HermitianOperator(std::move(m));
}

} // namespace csl
