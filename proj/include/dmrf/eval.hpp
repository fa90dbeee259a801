#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dmrf/dataset.hpp"
#include "dmrf/forest.hpp"
#include "dmrf/synthetic.hpp"

namespace dmrf {

struct FoldResult {
    int repeat = 0;
    int fold = 0;
    double metric = 0.0;  // accuracy (classification) or MSE (regression)
    double seconds = 0.0;
};

/// Cross-validation outcome. The headline numbers are the mean of the
/// per-repeat means and their standard deviation; per-fold spread is
/// reported separately.
struct EvalReport {
    Task task = Task::classification;
    int folds = 0;
    int repeats = 0;
    std::vector<FoldResult> fold_results;
    std::vector<double> repeat_means;
    double mean = 0.0;
    double stddev = 0.0;       // sample stddev over repeat means
    double fold_stddev = 0.0;  // sample stddev over all folds
    VariantConfig config;
};

/// Fraction of correct predictions over the given rows.
double accuracy(const Forest& forest, const Dataset& data,
                std::span<const std::uint32_t> rows, Rng& tie_rng);

/// Mean squared error against the rows' recorded targets.
double mean_squared_error(const Forest& forest, const Dataset& data,
                          std::span<const std::uint32_t> rows);

/// k-fold cross-validation repeated `repeats` times with fresh folds per
/// repeat (fold seed derived from (master_seed, repeat)).
EvalReport cross_validate(const Dataset& data, const VariantConfig& cfg,
                          int folds, int repeats, std::uint64_t master_seed,
                          unsigned jobs = 1);

/// One named axis of a sweep.
struct SweepAxis {
    std::string name;  // p, q, b1, b2, trees, kn, p1, p2, lambda, m, ratio
    std::vector<double> values;
};

struct SweepGrid {
    std::vector<SweepAxis> axes;

    std::size_t size() const;
    void validate() const;
};

struct SweepRow {
    std::vector<std::pair<std::string, double>> params;
    double mean = 0.0;
    double stddev = 0.0;
    double nmse = 0.0;  // -mean for regression, 0 otherwise
};

/// One cross_validate per Cartesian grid point, sharing the same folds.
std::vector<SweepRow> sweep(const Dataset& data, const VariantConfig& base,
                            const SweepGrid& grid, int folds, int repeats,
                            std::uint64_t master_seed, unsigned jobs = 1);

VariantConfig apply_sweep_param(VariantConfig cfg, const std::string& name, double value);

struct ConsistencyPoint {
    std::size_t n = 0;
    std::uint32_t kn = 0;
    double mean_metric = 0.0;  // test error (classification) or MSE vs true f
    double mean_excess = 0.0;  // metric minus the distribution's Bayes risk
    std::vector<double> per_seed_metric;
};

/// Excess-risk curve over a growing-sample schedule. Trees run in strict-leaf
/// mode with k_n = ceil(n^kn_exponent). For each of `seeds` replicates an
/// max(schedule)-row training pool is generated and its first n rows train
/// the size-n forest; all points share one fixed test set of `test_size`
/// rows. Classification reports the error against the (noisy) test labels;
/// regression reports mean squared deviation from the true function.
std::vector<ConsistencyPoint> consistency_curve(
    const SyntheticSpec& spec, std::span<const std::size_t> schedule,
    double kn_exponent, VariantConfig cfg, int seeds, std::size_t test_size,
    std::uint64_t master_seed, unsigned jobs = 1);

struct BenchRow {
    VariantId variant = VariantId::DMRF;
    std::size_t n = 0;
    double seconds = 0.0;
};

/// Wall-clock of train_forest per (variant, n) over synthetic datasets of
/// the given sizes. `repetitions` > 1 keeps the median time per cell.
std::vector<BenchRow> bench_runtime(const SyntheticSpec& spec,
                                    std::span<const std::size_t> sizes,
                                    std::span<const VariantConfig> configs,
                                    int repetitions = 1, unsigned jobs = 1);

// Result emission. Column schemas are fixed:
//   cv rows:      variant,params,repeat,fold,metric,seconds
//   sweep rows:   variant,params,metric_mean,metric_std,nmse
//   curve rows:   n,kn,seed,metric,excess
//   bench rows:   variant,n,seconds
std::string params_string(const VariantConfig& cfg);
void write_report_csv(const EvalReport& report, const std::string& path);
void write_report_jsonl(const EvalReport& report, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, VariantId variant, const std::string& path);
void write_sweep_jsonl(const std::vector<SweepRow>& rows, VariantId variant, const std::string& path);
void write_curve_csv(const std::vector<ConsistencyPoint>& curve, const std::string& path);
void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path);

}  // namespace dmrf
