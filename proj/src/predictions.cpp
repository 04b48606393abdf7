#include "csl/predictions.hpp"

#include <cmath>

namespace csl {

void SpeciesCensus::validate() const {
    for (const auto& e : entries) {
        if (e.count < 0.0) throw InvalidInput("SpeciesCensus: negative count");
        if (!(e.mass > 0.0)) throw InvalidInput("SpeciesCensus: mass must be > 0");
    }
}

void DiscSpec::validate() const {
    if (!(radius > 0.0) || !(thickness > 0.0) || !(density > 0.0) || !(form_factor > 0.0))
        throw InvalidInput("DiscSpec: all parameters must be > 0");
    if (amplification && !(*amplification > 0.0))
        throw InvalidInput("DiscSpec: amplification must be > 0");
}

void TwoParticleBoundToy::validate() const {
    if (!(m1 > 0.0) || !(m2 > 0.0) || !(spring > 0.0) || !(hbar > 0.0))
        throw InvalidInput("TwoParticleBoundToy: masses, spring and hbar must be > 0");
    if (grid_points < 16) throw InvalidInput("TwoParticleBoundToy: grid too coarse");
    if (!(half_width_lengths > 1.0))
        throw InvalidInput("TwoParticleBoundToy: grid half-width too small");
}

EnergyGain energy_gain_rate(const SpeciesCensus& census, const ModelParams& params,
                            double duration_s) {
    census.validate();
    params.validate();
    if (duration_s < 0.0) throw InvalidInput("energy_gain_rate: negative duration");
    double rate = 0.0;
    for (const auto& e : census.entries)
        rate += 3.0 * params.lambda * e.alpha * e.alpha * e.count * constants::hbar *
                constants::hbar / (4.0 * e.mass * params.a * params.a);
    return {rate, rate * duration_s};
}

double excitation_rate(const ModelParams& params, double matrix_element_cm) {
    params.validate();
    return 0.5 * params.lambda / (params.a * params.a) * matrix_element_cm * matrix_element_cm;
}

double com_vanishing_demo(const TwoParticleBoundToy& toy, double alpha1, double alpha2) {
    toy.validate();
    const double total_mass = toy.m1 + toy.m2;
    const double mu = toy.m1 * toy.m2 / total_mass;
    const double omega = std::sqrt(toy.spring / mu);
    const double osc_length = std::sqrt(toy.hbar / (mu * omega));
    const double half_width = toy.half_width_lengths * osc_length;
    const Eigen::Index n = toy.grid_points;
    const double h = 2.0 * half_width / static_cast<double>(n - 1);

    // relative-coordinate Hamiltonian: kinetic hopping + harmonic binding
    const double t = toy.hbar * toy.hbar / (2.0 * mu * h * h);
    MatrixC ham = MatrixC::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = -half_width + h * static_cast<double>(i);
        ham(i, i) = 2.0 * t + 0.5 * toy.spring * r * r;
        if (i + 1 < n) {
            ham(i, i + 1) = -t;
            ham(i + 1, i) = -t;
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixC> es(ham);
    if (es.info() != Eigen::Success)
        throw RuntimeFailure("com_vanishing_demo: diagonalization failed");
    const VectorC ground = es.eigenvectors().col(0);
    const VectorC excited = es.eigenvectors().col(1);

    // alpha_1 r_1 + alpha_2 r_2 at fixed center of mass reduces to
    // [(alpha_1 m_2 - alpha_2 m_1)/M] r
    const double coeff = (alpha1 * toy.m2 - alpha2 * toy.m1) / total_mass;
    Complex overlap = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = -half_width + h * static_cast<double>(i);
        overlap += std::conj(excited[i]) * r * ground[i];
    }
    return std::abs(coeff * overlap);
}

InterferenceBound interference_decay_bound(double time_of_flight_s, double nucleon_count,
                                           double contrast_accuracy) {
    if (!(time_of_flight_s > 0.0) || !(nucleon_count > 0.0) || !(contrast_accuracy > 0.0))
        throw InvalidInput("interference_decay_bound: inputs must be > 0");
    InterferenceBound b;
    b.decay_exponent = time_of_flight_s * nucleon_count * nucleon_count;
    b.lambda_max = contrast_accuracy / b.decay_exponent;
    b.lambda_inverse_min = 1.0 / b.lambda_max;
    return b;
}

SphereCollapse sphere_collapse_rate(double lambda, double nucleons_in_a3, double nucleons_total,
                                    double elapsed_s) {
    if (lambda < 0.0 || nucleons_in_a3 < 0.0 || nucleons_total < 0.0 || elapsed_s < 0.0)
        throw InvalidInput("sphere_collapse_rate: inputs must be >= 0");
    SphereCollapse r;
    r.rate = lambda * nucleons_in_a3 * nucleons_total;
    r.tail_exponent = r.rate * elapsed_s;
    return r;
}

DiscDiffusion disc_diffusion(const DiscSpec& disc, const ModelParams& params, double t_s) {
    disc.validate();
    params.validate();
    if (!(t_s >= 0.0)) throw InvalidInput("disc_diffusion: negative time");
    DiscDiffusion out;
    out.mass = M_PI * disc.radius * disc.radius * disc.thickness * disc.density;
    const double mass_ratio = out.mass / params.m0;
    out.lambda_eff = params.lambda * disc.amplification.value_or(mass_ratio * mass_ratio);
    const double a2 = params.a * params.a;
    out.dtheta_csl = constants::hbar / (out.mass * a2) *
                     std::sqrt(out.lambda_eff * disc.form_factor * t_s * t_s * t_s / 12.0);
    out.dtheta_qm =
        8.0 * constants::hbar * t_s / (M_PI * out.mass * disc.radius * disc.radius);
    const double c = 2.0 * M_PI * out.mass * a2 / constants::hbar;
    out.time_to_2pi = std::cbrt(c * c * 12.0 / (out.lambda_eff * disc.form_factor));
    return out;
}

} // namespace csl
