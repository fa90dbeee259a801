#include "dmrf/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dmrf/error.hpp"
#include "text_io.hpp"

namespace dmrf {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

double sample_stddev(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double mean_of(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

// Materializes the given rows as a standalone dataset. The full class list is
// kept so label encoding stays aligned when a subset misses a class.
Dataset subset_dataset(const Dataset& data, std::span<const std::uint32_t> rows) {
    std::vector<double> features;
    features.reserve(rows.size() * data.feature_count());
    std::vector<double> labels;
    labels.reserve(rows.size());
    for (auto row : rows) {
        const auto x = data.row(row);
        features.insert(features.end(), x.begin(), x.end());
        labels.push_back(data.label(row));
    }
    return Dataset(std::move(features), std::move(labels), data.feature_count(), data.task(),
                   data.class_names(), data.feature_names());
}

}  // namespace

double accuracy(const Forest& forest, const Dataset& data,
                std::span<const std::uint32_t> rows, Rng& tie_rng) {
    std::size_t correct = 0;
    for (auto r : rows) {
        if (forest.predict_class(data.row(r), tie_rng) == data.class_label(r)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(rows.size());
}

double mean_squared_error(const Forest& forest, const Dataset& data,
                          std::span<const std::uint32_t> rows) {
    double acc = 0.0;
    for (auto r : rows) {
        const double d = forest.predict_value(data.row(r)) - data.label(r);
        acc += d * d;
    }
    return acc / static_cast<double>(rows.size());
}

EvalReport cross_validate(const Dataset& data, const VariantConfig& cfg,
                          int folds, int repeats, std::uint64_t master_seed,
                          unsigned jobs) {
    if (folds < 2) throw ConfigError("cross-validation needs k >= 2");
    if (repeats < 1) throw ConfigError("cross-validation needs repeats >= 1");
    if (static_cast<std::size_t>(folds) > data.size()) {
        throw ConfigError("dataset too small for " + std::to_string(folds) + " folds");
    }
    cfg.validate(data.task());

    EvalReport report;
    report.task = data.task();
    report.folds = folds;
    report.repeats = repeats;
    report.config = cfg;

    for (int r = 0; r < repeats; ++r) {
        const auto split = kfold(data.size(), folds, derive_seed(master_seed, stream::fold, r));
        std::vector<double> fold_metrics;
        for (int f = 0; f < folds; ++f) {
            const auto& [train, test] = split[f];
            VariantConfig fold_cfg = cfg;
            fold_cfg.seed = derive_seed(master_seed, stream::tree, r, f);

            const double start = now_seconds();
            const Dataset fold_data = subset_dataset(data, train);
            const Forest forest = train_forest(fold_data, fold_cfg, jobs);

            Rng tie_rng(derive_seed(master_seed, stream::tie, r, f));
            const double metric = data.task() == Task::classification
                                      ? accuracy(forest, data, test, tie_rng)
                                      : mean_squared_error(forest, data, test);
            const double seconds = now_seconds() - start;
            report.fold_results.push_back({r, f, metric, seconds});
            fold_metrics.push_back(metric);
        }
        report.repeat_means.push_back(mean_of(fold_metrics));
    }

    report.mean = mean_of(report.repeat_means);
    report.stddev = sample_stddev(report.repeat_means);
    std::vector<double> all;
    for (const auto& fr : report.fold_results) all.push_back(fr.metric);
    report.fold_stddev = sample_stddev(all);
    return report;
}

std::size_t SweepGrid::size() const {
    std::size_t total = 1;
    for (const auto& axis : axes) total *= axis.values.size();
    return total;
}

void SweepGrid::validate() const {
    if (axes.empty()) throw ConfigError("sweep grid has no axes");
    for (const auto& axis : axes) {
        if (axis.values.empty()) throw ConfigError("sweep axis '" + axis.name + "' has no values");
    }
}

VariantConfig apply_sweep_param(VariantConfig cfg, const std::string& name, double value) {
    auto to_u32 = [&](double v) {
        if (v < 1 || v != std::floor(v)) {
            throw ConfigError("parameter '" + name + "' needs a positive integer, got " +
                              std::to_string(v));
        }
        return static_cast<std::uint32_t>(v);
    };
    if (name == "p") cfg.p = value;
    else if (name == "q") cfg.q = value;
    else if (name == "b1" || name == "B1") cfg.b1 = value;
    else if (name == "b2" || name == "B2") cfg.b2 = value;
    else if (name == "p1") cfg.p1 = value;
    else if (name == "p2") cfg.p2 = value;
    else if (name == "lambda") cfg.poisson_mean = value;
    else if (name == "m") cfg.preselect = to_u32(value);
    else if (name == "trees" || name == "M") cfg.trees = to_u32(value);
    else if (name == "kn") cfg.kn = to_u32(value);
    else if (name == "ratio") cfg.ratio = value;
    else throw ConfigError("unknown sweep parameter '" + name + "'");
    return cfg;
}

std::vector<SweepRow> sweep(const Dataset& data, const VariantConfig& base,
                            const SweepGrid& grid, int folds, int repeats,
                            std::uint64_t master_seed, unsigned jobs) {
    grid.validate();
    std::vector<SweepRow> rows;
    std::vector<std::size_t> counter(grid.axes.size(), 0);
    for (;;) {
        VariantConfig cfg = base;
        SweepRow row;
        for (std::size_t a = 0; a < grid.axes.size(); ++a) {
            const double value = grid.axes[a].values[counter[a]];
            cfg = apply_sweep_param(cfg, grid.axes[a].name, value);
            row.params.emplace_back(grid.axes[a].name, value);
        }
        const EvalReport report = cross_validate(data, cfg, folds, repeats, master_seed, jobs);
        row.mean = report.mean;
        row.stddev = report.stddev;
        row.nmse = data.task() == Task::regression ? -report.mean : 0.0;
        rows.push_back(std::move(row));

        std::size_t a = 0;
        for (; a < counter.size(); ++a) {
            if (++counter[a] < grid.axes[a].values.size()) break;
            counter[a] = 0;
        }
        if (a == counter.size()) break;
    }
    return rows;
}

std::vector<ConsistencyPoint> consistency_curve(
    const SyntheticSpec& spec, std::span<const std::size_t> schedule,
    double kn_exponent, VariantConfig cfg, int seeds, std::size_t test_size,
    std::uint64_t master_seed, unsigned jobs) {
    if (schedule.size() < 3) throw ConfigError("consistency schedule needs at least 3 sizes");
    if (!std::is_sorted(schedule.begin(), schedule.end()) ||
        std::adjacent_find(schedule.begin(), schedule.end()) != schedule.end()) {
        throw ConfigError("consistency schedule must be strictly increasing");
    }
    if (seeds < 1) throw ConfigError("need at least one seed");
    cfg.strict_leaf = true;

    SyntheticSpec test_spec = spec;
    test_spec.seed = derive_seed(master_seed, stream::test_set);
    const Dataset test = generate_synthetic(test_spec, test_size);
    std::vector<std::uint32_t> test_rows(test.size());
    for (std::uint32_t i = 0; i < test_rows.size(); ++i) test_rows[i] = i;

    // One training pool per seed; the size-n run trains on its first n rows
    // so larger runs strictly extend smaller ones.
    const std::size_t pool_size = schedule.back();
    std::vector<Dataset> pools;
    pools.reserve(seeds);
    for (int s = 0; s < seeds; ++s) {
        SyntheticSpec train_spec = spec;
        train_spec.seed = derive_seed(master_seed, stream::train_pool, s);
        pools.push_back(generate_synthetic(train_spec, pool_size));
    }

    std::vector<ConsistencyPoint> curve;
    for (const std::size_t n : schedule) {
        ConsistencyPoint point;
        point.n = n;
        point.kn = static_cast<std::uint32_t>(
            std::ceil(std::pow(static_cast<double>(n), kn_exponent)));
        for (int s = 0; s < seeds; ++s) {
            const Dataset& pool = pools[s];
            std::vector<std::uint32_t> prefix(n);
            for (std::uint32_t i = 0; i < n; ++i) prefix[i] = i;
            const Dataset train = subset_dataset(pool, prefix);

            // the tree-seed stream is shared across schedule sizes; with the
            // nested pools this makes the runs common-random-number coupled
            VariantConfig run_cfg = cfg;
            run_cfg.kn = point.kn;
            run_cfg.seed = derive_seed(master_seed, stream::tree, s);
            const Forest forest = train_forest(train, run_cfg, jobs);

            double metric;
            if (spec.kind == SyntheticKind::noisy_threshold_classification) {
                Rng tie_rng(derive_seed(master_seed, stream::tie, s));
                metric = 1.0 - accuracy(forest, test, test_rows, tie_rng);
            } else {
                double acc = 0.0;
                for (std::uint32_t r : test_rows) {
                    const double d = forest.predict_value(test.row(r)) -
                                     true_regression_value(test.row(r));
                    acc += d * d;
                }
                metric = acc / static_cast<double>(test_rows.size());
            }
            point.per_seed_metric.push_back(metric);
        }
        point.mean_metric = mean_of(point.per_seed_metric);
        point.mean_excess = point.mean_metric - bayes_risk(spec);
        curve.push_back(std::move(point));
    }
    return curve;
}

std::vector<BenchRow> bench_runtime(const SyntheticSpec& spec,
                                    std::span<const std::size_t> sizes,
                                    std::span<const VariantConfig> configs,
                                    int repetitions, unsigned jobs) {
    if (sizes.size() < 2) throw ConfigError("benchmark needs at least 2 sizes");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");

    std::vector<BenchRow> rows;
    for (const std::size_t n : sizes) {
        SyntheticSpec data_spec = spec;
        data_spec.seed = derive_seed(spec.seed, stream::train_pool, n);
        const Dataset data = generate_synthetic(data_spec, n);
        for (const VariantConfig& cfg : configs) {
            std::vector<double> times;
            for (int rep = 0; rep < repetitions; ++rep) {
                VariantConfig run_cfg = cfg;
                run_cfg.seed = derive_seed(cfg.seed, stream::tree, n, rep);
                const double start = now_seconds();
                const Forest forest = train_forest(data, run_cfg, jobs);
                times.push_back(now_seconds() - start);
                (void)forest;
            }
            std::sort(times.begin(), times.end());
            rows.push_back({cfg.variant, n, times[times.size() / 2]});
        }
    }
    return rows;
}

std::string params_string(const VariantConfig& cfg) {
    auto d = [](double v) { return detail::fmt_double(v); };
    std::string s = "M=" + std::to_string(cfg.trees) + ";q=" + d(cfg.q) + ";kn=" +
                    std::to_string(cfg.kn) + ";p=" + d(cfg.p) + ";b1=" + d(cfg.b1) +
                    ";b2=" + d(cfg.b2) + ";p1=" + d(cfg.p1) + ";p2=" + d(cfg.p2) +
                    ";lambda=" + d(cfg.poisson_mean) + ";m=" + std::to_string(cfg.preselect) +
                    ";ratio=" + d(cfg.ratio) + ";strict_leaf=" + (cfg.strict_leaf ? "1" : "0") +
                    ";weighted_mse=" + (cfg.weighted_mse ? "1" : "0");
    return s;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

}  // namespace

void write_report_csv(const EvalReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "variant,params,repeat,fold,metric,seconds\n";
    for (const auto& fr : report.fold_results) {
        out << to_string(report.config.variant) << ',' << params_string(report.config) << ','
            << fr.repeat << ',' << fr.fold << ',' << detail::fmt_double(fr.metric) << ','
            << detail::fmt_double(fr.seconds) << '\n';
    }
}

void write_report_jsonl(const EvalReport& report, const std::string& path) {
    auto out = open_out(path);
    for (const auto& fr : report.fold_results) {
        nlohmann::json row{
            {"variant", to_string(report.config.variant)},
            {"params", params_string(report.config)},
            {"repeat", fr.repeat},
            {"fold", fr.fold},
            {"metric", fr.metric},
            {"seconds", fr.seconds},
        };
        out << row.dump() << '\n';
    }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, VariantId variant, const std::string& path) {
    auto out = open_out(path);
    out << "variant,params,metric_mean,metric_std,nmse\n";
    for (const auto& row : rows) {
        out << to_string(variant) << ',';
        for (std::size_t i = 0; i < row.params.size(); ++i) {
            if (i) out << ';';
            out << row.params[i].first << '=' << detail::fmt_double(row.params[i].second);
        }
        out << ',' << detail::fmt_double(row.mean) << ',' << detail::fmt_double(row.stddev) << ','
            << detail::fmt_double(row.nmse) << '\n';
    }
}

void write_sweep_jsonl(const std::vector<SweepRow>& rows, VariantId variant, const std::string& path) {
    auto out = open_out(path);
    for (const auto& row : rows) {
        nlohmann::json params;
        for (const auto& [name, value] : row.params) params[name] = value;
        nlohmann::json obj{
            {"variant", to_string(variant)},
            {"params", params},
            {"metric_mean", row.mean},
            {"metric_std", row.stddev},
            {"nmse", row.nmse},
        };
        out << obj.dump() << '\n';
    }
}

void write_curve_csv(const std::vector<ConsistencyPoint>& curve, const std::string& path) {
    auto out = open_out(path);
    out << "n,kn,metric,excess,seed_metrics\n";
    for (const auto& point : curve) {
        out << point.n << ',' << point.kn << ',' << detail::fmt_double(point.mean_metric) << ','
            << detail::fmt_double(point.mean_excess) << ',';
        for (std::size_t s = 0; s < point.per_seed_metric.size(); ++s) {
            if (s) out << ';';
            out << detail::fmt_double(point.per_seed_metric[s]);
        }
        out << '\n';
    }
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "variant,n,seconds\n";
    for (const auto& row : rows) {
        out << to_string(row.variant) << ',' << row.n << ',' << detail::fmt_double(row.seconds)
            << '\n';
    }
}

}  // namespace dmrf
