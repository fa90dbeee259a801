#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dmrf/dataset.hpp"
#include "dmrf/rng.hpp"
#include "dmrf/tree.hpp"

namespace dmrf {

enum class VariantId {
    DMRF,
    BreimanRF,
    BRF_SE,
    BRF_b,
    MRF_SE,
    MRF_b,
    Denil14_SE,
    Denil14_b,
};

const std::vector<VariantId>& all_variants();
std::string to_string(VariantId v);
VariantId variant_from_string(const std::string& name);

/// Full hyperparameter record identifying one forest variant. Defaults are
/// the benchmark settings: M=100, q=1-1/e, p=0.5, B1=B2=5, k_n=5,
/// p1=p2=0.05, lambda=10, m=100, Ratio=0.5.
struct VariantConfig {
    VariantId variant = VariantId::DMRF;
    std::uint32_t trees = 100;                 // M
    double q = 1.0 - 1.0 / 2.718281828459045;  // per-sample inclusion probability
    std::uint32_t kn = 5;
    double p = 0.5;
    double b1 = 5.0;
    double b2 = 5.0;
    double p1 = 0.05;
    double p2 = 0.05;
    double poisson_mean = 10.0;
    std::uint32_t preselect = 100;
    double ratio = 0.5;
    bool strict_leaf = false;
    bool weighted_mse = false;
    std::uint64_t seed = 0;

    bool separates_estimation() const;   // SE-type variant
    bool uses_bernoulli_bootstrap() const;
    SplitVariant split_variant() const;
    TreeBuildConfig tree_config(Task task) const;
    void validate(Task task) const;      // throws ConfigError
};

class Forest {
public:
    Forest() = default;
    Forest(std::vector<Tree> trees, VariantConfig cfg, Task task, int classes,
           std::size_t feature_count, std::vector<std::string> class_names);

    const std::vector<Tree>& trees() const { return trees_; }
    const VariantConfig& config() const { return cfg_; }
    Task task() const { return task_; }
    int class_count() const { return classes_; }
    std::size_t feature_count() const { return d_; }
    const std::vector<std::string>& class_names() const { return class_names_; }

    /// Majority vote across trees; ties broken uniformly at random via rng.
    int predict_class(std::span<const double> x, Rng& tie_rng) const;
    /// Mean of tree predictions.
    double predict_value(std::span<const double> x) const;
    /// Per-class vote counts (sums to the number of trees).
    std::vector<std::uint32_t> vote_counts(std::span<const double> x) const;

    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static Forest load(std::istream& in);
    static Forest load_file(const std::string& path);

    friend bool operator==(const Forest&, const Forest&);

private:
    std::vector<Tree> trees_;
    VariantConfig cfg_;
    Task task_ = Task::classification;
    int classes_ = 0;
    std::size_t d_ = 0;
    std::vector<std::string> class_names_;
};

/// Per-sample Bernoulli(q) bootstrap; redrawn until nonempty.
std::vector<std::uint32_t> bootstrap_indices(std::size_t n, double q, Rng& rng);

/// Classical bootstrap: n draws with replacement.
std::vector<std::uint32_t> classical_bootstrap(std::size_t n, Rng& rng);

/// Trains M trees, each on its variant's resampled view with a seed derived
/// from (cfg.seed, tree index). Tree builds are independent; `jobs` caps the
/// worker threads and the result does not depend on scheduling.
Forest train_forest(const Dataset& data, const VariantConfig& cfg, unsigned jobs = 1);

}  // namespace dmrf
