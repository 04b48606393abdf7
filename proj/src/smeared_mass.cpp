#include "csl/smeared_mass.hpp"

#include <cmath>

namespace csl {

void LatticeSpec::validate() const {
    if (dimension < 1 || dimension > 3)
        throw InvalidInput("LatticeSpec: dimension must be 1, 2 or 3");
    if (extent < 2) throw InvalidInput("LatticeSpec: extent must be >= 2");
    if (!(spacing > 0.0)) throw InvalidInput("LatticeSpec: spacing must be > 0");
    if (particle_masses.empty() || particle_masses.size() > 2)
        throw InvalidInput("LatticeSpec: one or two particles supported");
    for (double m : particle_masses)
        if (!(m > 0.0)) throw InvalidInput("LatticeSpec: particle mass must be > 0");
}

Eigen::Index LatticeSpec::sites_per_particle() const {
    Eigen::Index s = 1;
    for (int d = 0; d < dimension; ++d) s *= extent;
    return s;
}

Eigen::Index LatticeSpec::basis_dimension() const {
    Eigen::Index b = 1;
    for (std::size_t p = 0; p < particle_masses.size(); ++p) b *= sites_per_particle();
    return b;
}

std::array<int, 3> LatticeSpec::site_coords(Eigen::Index site) const {
    std::array<int, 3> c = {0, 0, 0};
    for (int d = 0; d < dimension; ++d) {
        c[static_cast<std::size_t>(d)] = static_cast<int>(site % extent);
        site /= extent;
    }
    return c;
}

namespace {

double site_distance_sq_cm2(const LatticeSpec& lat, Eigen::Index s1, Eigen::Index s2) {
    const auto c1 = lat.site_coords(s1);
    const auto c2 = lat.site_coords(s2);
    double r2 = 0.0;
    for (int d = 0; d < lat.dimension; ++d) {
        const double dx = (c1[static_cast<std::size_t>(d)] - c2[static_cast<std::size_t>(d)]) *
                          lat.spacing;
        r2 += dx * dx;
    }
    return r2;
}

void warn(WarningList* warnings, const std::string& msg) {
    if (warnings) warnings->push_back(msg);
}

std::string config_label(const LatticeSpec& lat, Eigen::Index basis_index) {
    const Eigen::Index sites = lat.sites_per_particle();
    std::string label = "z" + std::to_string(basis_index % sites);
    if (lat.particle_masses.size() == 2)
        label += "|z" + std::to_string(basis_index / sites);
    return label;
}

} // namespace

double smearing_kernel(const LatticeSpec& lattice, const ModelParams& params, Eigen::Index site,
                       Eigen::Index z, double mass) {
    lattice.validate();
    params.validate();
    const double a2 = params.a * params.a;
    const double norm = (mass / params.m0) *
                        std::pow(M_PI * a2, -0.25 * static_cast<double>(lattice.dimension));
    return norm * std::exp(-site_distance_sq_cm2(lattice, site, z) / (2.0 * a2));
}

CollapseOperatorSet build_position_collapse_ops(const LatticeSpec& lattice,
                                                const ModelParams& params, WarningList* warnings,
                                                Eigen::Index max_basis_dimension) {
    lattice.validate();
    params.validate();
    const Eigen::Index dim = lattice.basis_dimension();
    if (dim > max_basis_dimension)
        throw InvalidInput("build_position_collapse_ops: basis dimension " + std::to_string(dim) +
                           " exceeds the cap " + std::to_string(max_basis_dimension));
    if (lattice.spacing * lattice.extent < 4.0 * params.a)
        warn(warnings, "lattice span " + std::to_string(lattice.spacing * lattice.extent) +
                           " cm is below the recommended 4a; kernels are strongly truncated");

    const Eigen::Index sites = lattice.sites_per_particle();
    const double measure = std::pow(lattice.spacing, 0.5 * lattice.dimension);

    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(dim));
    for (Eigen::Index b = 0; b < dim; ++b) labels.push_back(config_label(lattice, b));

    MatrixR table(sites, dim);
    for (Eigen::Index j = 0; j < sites; ++j) {
        for (Eigen::Index b = 0; b < dim; ++b) {
            double entry = 0.0;
            Eigen::Index rest = b;
            for (std::size_t pth = 0; pth < lattice.particle_masses.size(); ++pth) {
                const Eigen::Index z = rest % sites;
                rest /= sites;
                entry += smearing_kernel(lattice, params, j, z, lattice.particle_masses[pth]);
            }
            table(j, b) = measure * entry;
        }
    }
    return CollapseOperatorSet::diagonal(std::move(labels), std::move(table));
}

double pair_decay_rate(const LatticeSpec& lattice, const ModelParams& params, double separation,
                       WarningList* warnings) {
    lattice.validate();
    params.validate();
    if (separation < 0.0) throw InvalidInput("pair_decay_rate: negative separation");
    const auto offset = static_cast<Eigen::Index>(std::llround(separation / lattice.spacing));
    if (offset > lattice.extent - 1)
        throw InvalidInput("pair_decay_rate: separation beyond lattice extent");

    // the two configurations sit on the first axis, centered on the lattice
    const Eigen::Index left_x = (lattice.extent - 1 - offset) / 2;
    const Eigen::Index right_x = left_x + offset;
    const Eigen::Index mid = (lattice.extent - 1) / 2;
    Eigen::Index z1 = left_x, z2 = right_x;
    Eigen::Index stride = lattice.extent;
    for (int d = 1; d < lattice.dimension; ++d) {
        z1 += mid * stride;
        z2 += mid * stride;
        stride *= lattice.extent;
    }

    const double edge_cm = std::min(left_x, lattice.extent - 1 - right_x) * lattice.spacing;
    if (edge_cm < 2.0 * params.a)
        warn(warnings, "packet within 2a of an open boundary; truncated kernels bias the rate");

    const double measure2 = std::pow(lattice.spacing, static_cast<double>(lattice.dimension));
    const double mass = lattice.particle_masses.front();
    const Eigen::Index sites = lattice.sites_per_particle();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < sites; ++j) {
        const double d = smearing_kernel(lattice, params, j, z1, mass) -
                         smearing_kernel(lattice, params, j, z2, mass);
        sum += measure2 * d * d;
    }
    return 0.5 * params.lambda * sum;
}

HermitianOperator hopping_hamiltonian(const LatticeSpec& lattice, double hbar,
                                      std::size_t particle) {
    lattice.validate();
    if (lattice.particle_masses.size() != 1 || particle != 0)
        throw InvalidInput("hopping_hamiltonian: single-particle lattices only");
    const double m = lattice.particle_masses[particle];
    const double t = hbar * hbar / (2.0 * m * lattice.spacing * lattice.spacing);
    const Eigen::Index sites = lattice.sites_per_particle();
    MatrixC h = MatrixC::Zero(sites, sites);
    for (Eigen::Index s = 0; s < sites; ++s) {
        h(s, s) = 2.0 * t * lattice.dimension;
        Eigen::Index stride = 1;
        for (int d = 0; d < lattice.dimension; ++d) {
            const int coord = lattice.site_coords(s)[static_cast<std::size_t>(d)];
            if (coord + 1 < lattice.extent) {
                h(s, s + stride) = -t;
                h(s + stride, s) = -t;
            }
            stride *= lattice.extent;
        }
    }
    return HermitianOperator(std::move(h));
}

StateVector gaussian_packet(const LatticeSpec& lattice, double center_cm, double width_cm) {
    lattice.validate();
    if (lattice.particle_masses.size() != 1)
        throw InvalidInput("gaussian_packet: single-particle lattices only");
    if (!(width_cm > 0.0)) throw InvalidInput("gaussian_packet: width must be > 0");
    const Eigen::Index sites = lattice.sites_per_particle();
    VectorC amps(sites);
    for (Eigen::Index s = 0; s < sites; ++s) {
        const auto c = lattice.site_coords(s);
        double r2 = 0.0;
        for (int d = 0; d < lattice.dimension; ++d) {
            const double dx = c[static_cast<std::size_t>(d)] * lattice.spacing - center_cm;
            r2 += dx * dx;
        }
        amps[s] = std::exp(-r2 / (4.0 * width_cm * width_cm));
    }
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(sites));
    for (Eigen::Index s = 0; s < sites; ++s) labels.push_back("z" + std::to_string(s));
    return StateVector(std::move(labels), std::move(amps)).normalized();
}

} // namespace csl
