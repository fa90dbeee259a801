#include "dmrf/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dmrf/error.hpp"

namespace dmrf {

void SyntheticSpec::validate() const {
    if (dimension < 1) throw ConfigError("synthetic dimension must be >= 1");
    if (kind == SyntheticKind::noisy_threshold_classification) {
        if (!(flip_probability >= 0.0 && flip_probability < 0.5)) {
            throw ConfigError("flip probability must lie in [0, 0.5)");
        }
    } else {
        if (!(noise_variance >= 0.0)) throw ConfigError("noise variance must be >= 0");
        if (dimension < 2) throw ConfigError("smooth regression needs dimension >= 2");
    }
}

Dataset synth_classification(const SyntheticSpec& spec, std::size_t n) {
    if (spec.kind != SyntheticKind::noisy_threshold_classification) {
        throw ConfigError("spec kind is not noisy-threshold-classification");
    }
    spec.validate();
    if (n < 1) throw ConfigError("need n >= 1");

    Rng rng(spec.seed);
    const std::size_t d = spec.dimension;
    std::vector<double> features(n * d);
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) features[i * d + j] = rng.uniform01();
        int y = features[i * d] > 0.5 ? 1 : 2;
        if (rng.bernoulli(spec.flip_probability)) y = 3 - y;
        labels[i] = y;
    }
    return Dataset(std::move(features), std::move(labels), d, Task::classification, {"1", "2"});
}

Dataset synth_regression(const SyntheticSpec& spec, std::size_t n) {
    if (spec.kind != SyntheticKind::smooth_regression) {
        throw ConfigError("spec kind is not smooth-regression");
    }
    spec.validate();
    if (n < 1) throw ConfigError("need n >= 1");

    Rng rng(spec.seed);
    const std::size_t d = spec.dimension;
    const double sigma = std::sqrt(spec.noise_variance);
    std::vector<double> features(n * d);
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) features[i * d + j] = rng.uniform01();
        double y = true_regression_value({features.data() + i * d, d});
        if (sigma > 0.0) y += rng.normal(0.0, sigma);
        labels[i] = y;
    }
    return Dataset(std::move(features), std::move(labels), d, Task::regression);
}

double true_regression_value(std::span<const double> x) {
    return std::sin(2.0 * std::numbers::pi * x[0]) * x[1];
}

double bayes_risk(const SyntheticSpec& spec) {
    return spec.kind == SyntheticKind::noisy_threshold_classification ? spec.flip_probability : 0.0;
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::size_t n) {
    return spec.kind == SyntheticKind::noisy_threshold_classification
               ? synth_classification(spec, n)
               : synth_regression(spec, n);
}

}  // namespace dmrf
