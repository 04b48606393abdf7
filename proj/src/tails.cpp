#include "csl/tails.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csl {

StuffDistribution StuffDistribution::from_pairs(std::vector<std::pair<double, double>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    StuffDistribution d;
    d.values.resize(static_cast<Eigen::Index>(pairs.size()));
    d.weights.resize(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        d.values[static_cast<Eigen::Index>(i)] = pairs[i].first;
        d.weights[static_cast<Eigen::Index>(i)] = pairs[i].second;
    }
    d.validate();
    return d;
}

void StuffDistribution::validate() const {
    if (values.size() == 0 || values.size() != weights.size())
        throw InvalidInput("StuffDistribution: empty or mismatched arrays");
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw InvalidInput("StuffDistribution: non-finite value");
        if (!(weights[i] >= 0.0)) throw InvalidInput("StuffDistribution: negative weight");
        if (i > 0 && values[i] < values[i - 1])
            throw InvalidInput("StuffDistribution: values must be sorted");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-9)
        throw InvalidInput("StuffDistribution: weights sum to " + std::to_string(weights.sum()));
}

void ObservationSpec::validate() const {
    if (!(error_bar > 0.0)) throw InvalidInput("ObservationSpec: error bar must be > 0");
    if (!(p_falsify > 0.0) || p_falsify >= 1.0)
        throw InvalidInput("ObservationSpec: p_falsify must be in (0, 1)");
}

std::optional<double> smd_possessed(double mean, double variance, double ratio_small,
                                    double ratio_large, double density_scale,
                                    double density_small) {
    if (!(variance >= 0.0)) throw InvalidInput("smd_possessed: variance must be >= 0");
    if (!(ratio_small > 0.0) || ratio_small >= 1.0)
        throw InvalidInput("smd_possessed: ratio_small must be in (0, 1)");
    if (!(ratio_large > 1.0)) throw InvalidInput("smd_possessed: ratio_large must be > 1");
    if (!(density_scale > 0.0) || !(density_small > 0.0))
        throw InvalidInput("smd_possessed: density thresholds must be > 0");

    double ratio;
    if (mean == 0.0)
        ratio = variance == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    else
        ratio = variance / (mean * mean);

    if (ratio <= ratio_small) return mean;
    if (ratio >= ratio_large && std::abs(mean) <= density_small * density_scale) return mean;
    if (mean == 0.0) return 0.0;
    return std::nullopt;
}

std::optional<QpvResult> qpv(const StuffDistribution& dist, const ObservationSpec& obs,
                             const QpvOptions& options, WarningList* warnings) {
    dist.validate();
    obs.validate();
    const Eigen::Index n = dist.values.size();

    double min_spacing = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < n; ++i)
        if (dist.values[i] > dist.values[i - 1])
            min_spacing = std::min(min_spacing, dist.values[i] - dist.values[i - 1]);
    if (warnings && obs.error_bar < min_spacing)
        warnings->push_back("error bar is narrower than the minimum value spacing; "
                            "windows contain at most one point");

    // candidate centers: every value point plus midpoints of distinct neighbors
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(2 * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        centers.push_back(dist.values[i]);
        if (i + 1 < n && dist.values[i + 1] > dist.values[i])
            centers.push_back(0.5 * (dist.values[i] + dist.values[i + 1]));
    }
    std::sort(centers.begin(), centers.end());

    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
        prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] +
                                                  dist.weights[i];

    const double* vb = dist.values.data();
    const double* ve = vb + n;
    const double half = 0.5 * obs.error_bar;

    double best_contained = -1.0;
    double best_center = 0.0;
    Eigen::Index best_lo = 0, best_hi = 0;
    for (double c : centers) {
        const auto lo = static_cast<Eigen::Index>(std::lower_bound(vb, ve, c - half) - vb);
        const auto hi = static_cast<Eigen::Index>(std::upper_bound(vb, ve, c + half) - vb);
        const double contained = prefix[static_cast<std::size_t>(hi)] -
                                 prefix[static_cast<std::size_t>(lo)];
        if (contained > best_contained) { // strict: ties keep the smaller center
            best_contained = contained;
            best_center = c;
            best_lo = lo;
            best_hi = hi;
        }
    }

    const double outside = std::max(0.0, 1.0 - best_contained);
    if (!(outside < obs.p_falsify)) return std::nullopt;

    QpvResult result;
    result.window_center = best_center;
    result.outside_stuff = outside;
    if (options.unrenormalized_global_mean) {
        const double mean = dist.values.dot(dist.weights);
        if (mean < best_center - half || mean > best_center + half) return std::nullopt;
        result.value = mean;
    } else {
        double num = 0.0;
        for (Eigen::Index i = best_lo; i < best_hi; ++i) num += dist.values[i] * dist.weights[i];
        if (!(best_contained > 0.0)) return std::nullopt;
        result.value = num / best_contained;
    }
    return result;
}

double flip_probability(double tail_weight) {
    if (!(tail_weight >= 0.0) || !(tail_weight <= 1.0))
        throw InvalidInput("flip_probability: tail weight must be in [0, 1]");
    return tail_weight;
}

} // namespace csl
