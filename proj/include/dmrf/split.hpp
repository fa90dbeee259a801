#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dmrf/dataset.hpp"
#include "dmrf/rng.hpp"

namespace dmrf {

/// A (feature, threshold) pair. Samples with x[feature] <= threshold go left.
struct SplitPoint {
    std::uint32_t feature = 0;
    double threshold = 0.0;

    friend bool operator==(const SplitPoint&, const SplitPoint&) = default;
};

enum class SplitVariant { dmrf, best, brf, mrf, denil14 };

struct SplitStrategyConfig {
    SplitVariant variant = SplitVariant::dmrf;
    double p = 0.5;          // Bernoulli gate: optimal split vs multinomial sampling
    double b1 = 5.0;         // feature-selection temperature
    double b2 = 5.0;         // threshold-selection temperature
    double p1 = 0.05;        // brf: probability of a size-1 subspace
    double p2 = 0.05;        // brf: probability of a uniform threshold
    double poisson_mean = 10.0;  // denil14 subspace-size parameter
    std::uint32_t preselect = 100;  // denil14 candidate-point count
    bool weighted_mse = false;

    void validate() const;  // throws ConfigError
};

/// The samples a split decision is based on (the structure part when the
/// variant separates structure and estimation).
struct NodeView {
    const Dataset* data = nullptr;
    std::span<const std::uint32_t> rows;
};

/// floor(sqrt(D)), at least 1.
std::uint32_t subspace_size(std::size_t feature_count);

/// Sorted distinct observed values, excluding the maximum (a "x <= max"
/// split would leave the right child empty).
std::vector<double> candidate_thresholds(std::span<const double> values);

/// Affine map onto [0,1]: (v - min) / (max - min). A constant vector maps to
/// all zeros so the downstream softmax is uniform.
std::vector<double> normalize(std::span<const double> v);

/// Component i = exp(B*v_i) / sum_j exp(B*v_j).
std::vector<double> softmax_temp(std::span<const double> v, double temperature);

/// Draws an index with the given probabilities. Throws ConfigError if the
/// vector has negative entries or does not sum to 1 within 1e-9.
std::size_t sample_categorical(std::span<const double> probs, Rng& rng);

/// Impurity reductions of every admissible (feature, threshold) candidate in
/// a node. Features without candidates are dropped; rows are ordered by
/// feature index.
struct FeatureReductions {
    std::uint32_t feature = 0;
    std::vector<double> thresholds;  // ascending
    std::vector<double> reductions;  // parallel to thresholds
    double max_reduction = 0.0;
    std::size_t argmax = 0;  // lowest threshold among ties
};

struct ReductionTable {
    std::vector<FeatureReductions> features;

    bool empty() const { return features.empty(); }
    std::optional<SplitPoint> best() const;  // ties: lowest feature, lowest threshold
};

/// Builds the reduction table for a node over the given feature subspace.
/// min_child filters candidates so that both children keep at least that many
/// samples (1 = any nonempty split). candidate_rows, when nonempty, restricts
/// thresholds to values observed among those rows (reductions are still
/// computed over all node rows).
ReductionTable build_reduction_table(const NodeView& node,
                                     std::span<const std::uint32_t> subspace,
                                     std::uint32_t min_child,
                                     bool weighted_mse,
                                     std::span<const std::uint32_t> candidate_rows = {});

/// The reduction-maximizing split over the subspace, or nullopt when no
/// subspace feature has two distinct values.
std::optional<SplitPoint> best_split(const NodeView& node,
                                     std::span<const std::uint32_t> subspace,
                                     std::uint32_t min_child = 1,
                                     bool weighted_mse = false);

/// Bernoulli(p) gate: optimal split, or feature/threshold sampled from the
/// two temperature softmax multinomials over normalized reductions.
std::optional<SplitPoint> dmrf_split(const NodeView& node,
                                     std::span<const std::uint32_t> subspace,
                                     const SplitStrategyConfig& cfg,
                                     std::uint32_t min_child, Rng& rng);

/// Two-multinomial sampling over the full feature space.
std::optional<SplitPoint> mrf_split(const NodeView& node,
                                    const SplitStrategyConfig& cfg,
                                    std::uint32_t min_child, Rng& rng);

/// Bernoulli(p1): subspace of size 1 vs sqrt(D); Bernoulli(p2): uniform
/// threshold on the best feature vs the optimal split.
std::optional<SplitPoint> brf_split(const NodeView& node,
                                    const SplitStrategyConfig& cfg,
                                    std::uint32_t min_child, Rng& rng);

/// Subspace of size min(1 + Poisson(lambda), D); thresholds restricted to the
/// values of at most `preselect` uniformly chosen node points; optimal split
/// over that grid.
std::optional<SplitPoint> denil14_split(const NodeView& node,
                                        const SplitStrategyConfig& cfg,
                                        std::uint32_t min_child, Rng& rng);

}  // namespace dmrf
