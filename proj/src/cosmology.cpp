#include "csl/cosmology.hpp"

#include <algorithm>
#include <cmath>

namespace csl {

void ToyCreationParams::validate() const {
    if (!(m > 0.0)) throw InvalidInput("ToyCreationParams: m must be > 0");
    if (!(v1 > 0.0)) throw InvalidInput("ToyCreationParams: V1 must be > 0");
    if (!(m0 > 0.0)) throw InvalidInput("ToyCreationParams: m0 must be > 0");
    if (lambda0 < 0.0) throw InvalidInput("ToyCreationParams: lambda0 must be >= 0");
}

ToyMeans toy_creation_means(const ToyCreationParams& p, double t) {
    p.validate();
    if (t < 0.0) throw InvalidInput("toy_creation_means: negative time");
    const double lambda = p.effective_lambda();
    const double half = 0.5 * lambda;
    const double denom = p.m * p.m + half * half;
    // theta = 2 arctan(2m/lambda); at lambda = 0 this is pi and the means
    // reduce to the oscillatory source-only result with zero net energy
    const double theta = 2.0 * std::atan(2.0 * p.m / lambda);
    const double envelope = std::exp(-half * t);

    ToyMeans out;
    out.particles = p.g * p.g * p.v1 / denom *
                    (lambda * t - 2.0 * (std::cos(theta) - envelope * std::cos(theta + p.m * t)));
    out.quadrature = -p.g * p.m * p.v1 / denom *
                     (1.0 - envelope * (std::cos(p.m * t) +
                                        half / p.m * std::sin(p.m * t)));
    out.matter_energy = p.m * out.particles + 2.0 * p.g * out.quadrature;
    out.noise_energy = -out.matter_energy;
    return out;
}

void FRWState::validate() const {
    if (!(hubble > 0.0)) throw InvalidInput("FRWState: H0 must be > 0");
}

FRWBudget frw_budget(const FRWState& s) {
    s.validate();
    FRWBudget b;
    b.omega_k = 1.0 - (s.omega_m + s.omega_w + s.omega_lambda);
    b.q0 = 0.5 * (s.omega_m + s.omega_w) - s.omega_lambda;
    return b;
}

namespace {

// dx/dt for x = R/R0 on the expansion branch; negative radicand flags the
// turning point of a recollapsing solution
bool frw_rhs(const FRWState& s, double omega_k, double x, double& f) {
    const double radicand = (s.omega_m + s.omega_w) / x + s.omega_lambda * x * x + omega_k;
    if (radicand < 0.0) return false;
    f = s.hubble * std::sqrt(radicand);
    return true;
}

} // namespace

ScaleFactorSeries scale_factor_evolve(const FRWState& s, const std::vector<double>& t_grid,
                                      double tolerance) {
    s.validate();
    if (!(tolerance > 0.0)) throw InvalidInput("scale_factor_evolve: tolerance must be > 0");
    if (t_grid.empty()) throw InvalidInput("scale_factor_evolve: empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0.0) throw InvalidInput("scale_factor_evolve: negative time");
        if (i > 0 && t_grid[i] <= t_grid[i - 1])
            throw InvalidInput("scale_factor_evolve: times must be strictly increasing");
    }
    const double omega_k = frw_budget(s).omega_k;
    const double span = std::max(t_grid.back(), 1e-300);

    // Cash-Karp embedded pair
    static const double a21 = 1.0 / 5.0;
    static const double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static const double a41 = 3.0 / 10.0, a42 = -9.0 / 10.0, a43 = 6.0 / 5.0;
    static const double a51 = -11.0 / 54.0, a52 = 5.0 / 2.0, a53 = -70.0 / 27.0,
                        a54 = 35.0 / 27.0;
    static const double a61 = 1631.0 / 55296.0, a62 = 175.0 / 512.0, a63 = 575.0 / 13824.0,
                        a64 = 44275.0 / 110592.0, a65 = 253.0 / 4096.0;
    static const double b1 = 37.0 / 378.0, b3 = 250.0 / 621.0, b4 = 125.0 / 594.0,
                        b6 = 512.0 / 1771.0;
    static const double d1 = 2825.0 / 27648.0, d3 = 18575.0 / 48384.0, d4 = 13525.0 / 55296.0,
                        d5 = 277.0 / 14336.0, d6 = 1.0 / 4.0;

    ScaleFactorSeries out;
    double t = 0.0;
    double x = 1.0;
    double h = span / 100.0;

    for (double target : t_grid) {
        if (target == 0.0) {
            out.times.push_back(0.0);
            out.scale.push_back(1.0);
            continue;
        }
        bool turned = false;
        while (t < target) {
            h = std::min(h, target - t);
            double k1, k2, k3, k4, k5, k6, f;
            bool ok = frw_rhs(s, omega_k, x, k1);
            if (ok) ok = frw_rhs(s, omega_k, x + h * a21 * k1, k2);
            if (ok) ok = frw_rhs(s, omega_k, x + h * (a31 * k1 + a32 * k2), k3);
            if (ok) ok = frw_rhs(s, omega_k, x + h * (a41 * k1 + a42 * k2 + a43 * k3), k4);
            if (ok)
                ok = frw_rhs(s, omega_k, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
            if (ok)
                ok = frw_rhs(s, omega_k,
                             x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
            if (ok) {
                const double x5 = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b6 * k6);
                const double x4 =
                    x + h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
                ok = frw_rhs(s, omega_k, x5, f);
                const double err_rate = std::abs(x5 - x4) / h; // error per unit time
                const double budget = tolerance * std::max(1.0, std::abs(x)) / span;
                if (ok && err_rate <= budget) {
                    t += h;
                    x = x5;
                    const double grow = err_rate > 0.0
                                            ? 0.9 * std::pow(budget / err_rate, 0.25)
                                            : 5.0;
                    h *= std::clamp(grow, 0.2, 5.0);
                    continue;
                }
                if (ok) {
                    h *= std::clamp(0.9 * std::pow(budget / err_rate, 0.25), 0.2, 0.9);
                    continue;
                }
            }
            // a stage left the expansion branch: shrink toward the turning time
            h *= 0.5;
            if (h < 1e-14 * span) {
                out.turning_time = t;
                turned = true;
                break;
            }
        }
        if (turned) break;
        out.times.push_back(target);
        out.scale.push_back(x);
    }
    return out;
}

} // namespace csl
