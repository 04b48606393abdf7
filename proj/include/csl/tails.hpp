#pragma once

#include <optional>
#include <utility>

#include "csl/types.hpp"

namespace csl {

// Discrete stuff distribution of a macroscopic variable: sorted values with
// nonnegative weights summing to 1.
struct StuffDistribution {
    VectorR values;
    VectorR weights;

    static StuffDistribution from_pairs(std::vector<std::pair<double, double>> pairs);
    void validate() const;
};

// Observer-side inputs: the error bar and the probability the statement
// "every observer sees this value within the bar" is false.
struct ObservationSpec {
    double error_bar = 0.0;  // window width, same units as values
    double p_falsify = 0.0;  // in (0, 1)

    void validate() const;
};

// Smeared-mass-density accessibility test. With R = variance/mean^2 (R = 0
// when both vanish), the value is possessed when R <= ratio_small, or when
// R >= ratio_large but |mean| <= density_small * density_scale (the empty
// region reads as density 0), or when mean = 0.
std::optional<double> smd_possessed(double mean, double variance, double ratio_small,
                                    double ratio_large, double density_scale,
                                    double density_small);

struct QpvResult {
    double value = 0.0;
    double window_center = 0.0;
    double outside_stuff = 0.0;
};

struct QpvOptions {
    // The rejected alternative definition: the unrenormalized global mean,
    // qualified only if it lands inside the maximal window. A heavy far tail
    // can drag this mean outside the window even when the renormalized value
    // is perfectly sensible, which is why it is not the default.
    bool unrenormalized_global_mean = false;
};

// Qualified possessed value: slide a window of width error_bar over the value
// axis (candidate centers at every value point and midpoint, ties broken
// toward the smaller center; window boundaries inclusive) to maximize the
// contained stuff. If the stuff left outside is below p_falsify, the value is
// the mean of the renormalized in-window distribution; otherwise absent.
std::optional<QpvResult> qpv(const StuffDistribution& dist, const ObservationSpec& obs,
                             const QpvOptions& options = {}, WarningList* warnings = nullptr);

// A tail of squared amplitude epsilon wins the gambler's-ruin game - swaps
// places with the dominant state - with probability exactly epsilon. Named
// so the ensemble verification has a contract to test against.
double flip_probability(double tail_weight);

} // namespace csl
