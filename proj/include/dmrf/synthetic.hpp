#pragma once

#include <cstdint>
#include <span>

#include "dmrf/dataset.hpp"

namespace dmrf {

enum class SyntheticKind { noisy_threshold_classification, smooth_regression };

/// Synthetic distributions with closed-form optima, used to measure how far
/// a trained forest is from the best achievable risk.
struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::noisy_threshold_classification;
    std::size_t dimension = 2;
    double flip_probability = 0.1;  // classification label noise, in [0, 0.5)
    double noise_variance = 0.01;   // regression noise variance, >= 0
    std::uint64_t seed = 0;

    void validate() const;
};

/// X uniform on [0,1]^D; Y = 1 if x1 > 0.5 else 2, then flipped with
/// flip_probability. The Bayes risk of this distribution is exactly the flip
/// probability.
Dataset synth_classification(const SyntheticSpec& spec, std::size_t n);

/// X uniform on [0,1]^D; Y = sin(2*pi*x1) * x2 + Normal(0, noise_variance).
Dataset synth_regression(const SyntheticSpec& spec, std::size_t n);

/// The noiseless regression target, available for residual computation.
double true_regression_value(std::span<const double> x);

/// Minimum achievable expected loss for the spec's distribution: the flip
/// probability (classification) or the noise variance as MSE floor
/// (regression; zero when measuring deviation from the true function).
double bayes_risk(const SyntheticSpec& spec);

Dataset generate_synthetic(const SyntheticSpec& spec, std::size_t n);

}  // namespace dmrf
