// Command-line front end: train, predict, cv, sweep, consistency, bench.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmrf/dataset.hpp"
#include "dmrf/eval.hpp"
#include "dmrf/forest.hpp"
#include "dmrf/synthetic.hpp"

namespace {

using namespace dmrf;

struct DataOptions {
    std::string data_path;
    std::string task = "classification";
    std::string label_col;  // name or 0-based index; empty = last column
    bool header = false;
    bool log_label = false;

    std::string synthetic;  // classification | regression
    std::size_t dim = 2;
    double flip = 0.1;
    double noise = 0.01;
    std::size_t n = 1000;
};

struct VariantOptions {
    std::string variant = "DMRF";
    VariantConfig cfg;
};

LabelColumn parse_label_column(const std::string& text) {
    if (text.empty() || text == "last") return std::string("__last__");
    if (text.find_first_not_of("0123456789") == std::string::npos) {
        return static_cast<std::size_t>(std::stoull(text));
    }
    return text;
}

SyntheticKind parse_synthetic_kind(const std::string& kind) {
    if (kind == "classification" || kind == "noisy-threshold" ||
        kind == "noisy-threshold-classification") {
        return SyntheticKind::noisy_threshold_classification;
    }
    if (kind == "regression" || kind == "smooth-regression") {
        return SyntheticKind::smooth_regression;
    }
    throw ConfigError("unknown synthetic kind '" + kind + "'");
}

SyntheticSpec make_spec(const DataOptions& opt, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.kind = parse_synthetic_kind(opt.synthetic);
    spec.dimension = opt.dim;
    spec.flip_probability = opt.flip;
    spec.noise_variance = opt.noise;
    spec.seed = seed;
    return spec;
}

Dataset load_data(const DataOptions& opt, std::uint64_t seed) {
    if (!opt.synthetic.empty()) {
        return generate_synthetic(make_spec(opt, seed), opt.n);
    }
    if (opt.data_path.empty()) {
        throw ConfigError("either --data or --synthetic is required");
    }
    LoadOptions load;
    load.task = task_from_string(opt.task);
    load.label_column = parse_label_column(opt.label_col);
    load.has_header = opt.header;
    load.log_transform_label = opt.log_label;
    return load_csv(opt.data_path, load);
}

void add_data_options(CLI::App* cmd, DataOptions& opt) {
    cmd->add_option("--data", opt.data_path, "Input CSV path");
    cmd->add_option("--task", opt.task, "classification or regression")
        ->check(CLI::IsMember({"classification", "regression"}));
    cmd->add_option("--label-col", opt.label_col,
                    "Label column name or 0-based index (default: last)");
    cmd->add_flag("--header", opt.header, "First CSV line is a header");
    cmd->add_flag("--log-label", opt.log_label, "Replace regression labels y with ln(y)");
    cmd->add_option("--synthetic", opt.synthetic,
                    "Generate data instead: classification or regression");
    cmd->add_option("--dim", opt.dim, "Synthetic feature dimension");
    cmd->add_option("--flip", opt.flip, "Synthetic label-flip probability");
    cmd->add_option("--noise", opt.noise, "Synthetic noise variance");
    cmd->add_option("--n", opt.n, "Synthetic sample count");
}

void add_variant_options(CLI::App* cmd, VariantOptions& opt) {
    cmd->add_option("--variant", opt.variant,
                    "DMRF, BreimanRF, BRF-SE, BRF-b, MRF-SE, MRF-b, Denil14-SE, Denil14-b");
    cmd->add_option("--trees", opt.cfg.trees, "Number of trees M");
    cmd->add_option("--q", opt.cfg.q, "Per-sample bootstrap inclusion probability");
    cmd->add_option("--p", opt.cfg.p, "Bernoulli gate probability (DMRF)");
    cmd->add_option("--b1", opt.cfg.b1, "Feature-selection temperature B1");
    cmd->add_option("--b2", opt.cfg.b2, "Threshold-selection temperature B2");
    cmd->add_option("--p1", opt.cfg.p1, "BRF subspace-size gate probability");
    cmd->add_option("--p2", opt.cfg.p2, "BRF random-threshold gate probability");
    cmd->add_option("--lambda", opt.cfg.poisson_mean, "Denil14 Poisson mean");
    cmd->add_option("--m", opt.cfg.preselect, "Denil14 preselected point count");
    cmd->add_option("--kn", opt.cfg.kn, "Minimum node size for splitting");
    cmd->add_option("--ratio", opt.cfg.ratio, "Structure fraction for SE variants");
    cmd->add_flag("--strict-leaf", opt.cfg.strict_leaf, "Reject splits leaving a child below k_n");
    cmd->add_flag("--weighted-mse", opt.cfg.weighted_mse, "Size-weighted MSE reduction");
    cmd->add_option("--seed", opt.cfg.seed, "Master seed");
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string metric_name(Task task) {
    return task == Task::classification ? "accuracy" : "mse";
}

std::string headline(const EvalReport& report) {
    std::ostringstream out;
    if (report.task == Task::classification) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "accuracy %.2f%% +- %.2f (per-fold std %.2f)",
                      100.0 * report.mean, 100.0 * report.stddev, 100.0 * report.fold_stddev);
        out << buf;
    } else {
        out << "mse " << report.mean << " +- " << report.stddev << " (per-fold std "
            << report.fold_stddev << ")";
    }
    return out.str();
}

std::vector<double> parse_value_list(const std::string& text) {
    // "a,b,c" or "lo:hi:step"
    std::vector<double> values;
    if (text.find(':') != std::string::npos) {
        double lo, hi, step;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0) {
            throw ConfigError("bad range '" + text + "', expected lo:hi:step");
        }
        for (double v = lo; v <= hi + 1e-12; v += step) values.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string cell;
        while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    }
    if (values.empty()) throw ConfigError("empty value list '" + text + "'");
    return values;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> sizes;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) sizes.push_back(std::stoull(cell));
    return sizes;
}

void require_param(const std::string& value, const std::string& name) {
    if (value.empty()) throw ConfigError("missing required parameter " + name);
}

int cmd_train(const DataOptions& data_opt, const VariantOptions& variant_opt,
              const std::string& out_path, const std::string& emit_data, unsigned jobs) {
    require_param(out_path, "--out");
    VariantConfig cfg = variant_opt.cfg;
    cfg.variant = variant_from_string(variant_opt.variant);
    const Dataset data = load_data(data_opt, cfg.seed);
    if (!emit_data.empty()) write_csv(data, emit_data);

    const double start = now_seconds();
    const Forest forest = train_forest(data, cfg, jobs);
    const double seconds = now_seconds() - start;
    forest.save_file(out_path);

    std::cout << "trained " << to_string(cfg.variant) << ": M=" << cfg.trees
              << " n=" << data.size() << " D=" << data.feature_count();
    if (data.task() == Task::classification) std::cout << " c=" << data.class_count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", seconds);
    std::cout << " seconds=" << buf << " -> " << out_path << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& in_path,
                const std::string& out_path, const std::string& label_col, bool header,
                std::uint64_t seed) {
    require_param(model_path, "--model");
    require_param(in_path, "--in");
    require_param(out_path, "--out");
    const Forest forest = Forest::load_file(model_path);

    std::optional<LabelColumn> drop;
    if (!label_col.empty()) drop = parse_label_column(label_col);
    const auto rows = load_feature_matrix(in_path, header, drop ? &*drop : nullptr);

    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write " + out_path);
    out.precision(17);
    Rng tie_rng(derive_seed(seed, stream::tie));
    for (const auto& row : rows) {
        if (row.size() != forest.feature_count()) {
            throw DataError("input row has " + std::to_string(row.size()) +
                            " features, model expects " + std::to_string(forest.feature_count()));
        }
        if (forest.task() == Task::classification) {
            out << forest.class_names()[forest.predict_class(row, tie_rng) - 1] << '\n';
        } else {
            out << forest.predict_value(row) << '\n';
        }
    }
    std::cout << "predicted " << rows.size() << " rows -> " << out_path << "\n";
    return 0;
}

int cmd_cv(const DataOptions& data_opt, const VariantOptions& variant_opt, int folds, int repeats,
           const std::string& out_base, unsigned jobs) {
    VariantConfig cfg = variant_opt.cfg;
    cfg.variant = variant_from_string(variant_opt.variant);
    const Dataset data = load_data(data_opt, cfg.seed);
    const EvalReport report = cross_validate(data, cfg, folds, repeats, cfg.seed, jobs);

    if (!out_base.empty()) {
        write_report_csv(report, out_base + ".csv");
        write_report_jsonl(report, out_base + ".jsonl");
    }
    std::cout << to_string(cfg.variant) << " " << folds << "-fold x" << repeats << ": "
              << headline(report) << "\n";
    return 0;
}

int cmd_sweep(const DataOptions& data_opt, const VariantOptions& variant_opt,
              const std::vector<std::string>& grid_specs, int folds, int repeats,
              const std::string& out_base, unsigned jobs) {
    VariantConfig cfg = variant_opt.cfg;
    cfg.variant = variant_from_string(variant_opt.variant);
    const Dataset data = load_data(data_opt, cfg.seed);

    if (grid_specs.empty()) throw ConfigError("missing required parameter --grid");
    SweepGrid grid;
    for (const auto& spec : grid_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("bad --grid '" + spec + "', expected name=values");
        }
        grid.axes.push_back({spec.substr(0, eq), parse_value_list(spec.substr(eq + 1))});
    }

    const auto rows = sweep(data, cfg, grid, folds, repeats, cfg.seed, jobs);
    if (!out_base.empty()) {
        write_sweep_csv(rows, cfg.variant, out_base + ".csv");
        write_sweep_jsonl(rows, cfg.variant, out_base + ".jsonl");
    }

    std::cout << "params\t" << metric_name(data.task())
              << (data.task() == Task::regression ? "\tnmse" : "") << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.params.size(); ++i) {
            if (i) std::cout << ';';
            std::cout << row.params[i].first << '=' << row.params[i].second;
        }
        std::cout << '\t' << row.mean;
        if (data.task() == Task::regression) std::cout << '\t' << row.nmse;
        std::cout << '\n';
    }
    return 0;
}

int cmd_consistency(const DataOptions& data_opt, const VariantOptions& variant_opt,
                    const std::string& schedule_text, double kn_exp, int seeds,
                    std::size_t test_n, const std::string& out_base, unsigned jobs) {
    VariantConfig cfg = variant_opt.cfg;
    cfg.variant = variant_from_string(variant_opt.variant);
    if (data_opt.synthetic.empty()) {
        throw ConfigError("consistency runs on --synthetic data");
    }
    const SyntheticSpec spec = make_spec(data_opt, cfg.seed);
    const auto schedule = parse_size_list(schedule_text);

    const auto curve = consistency_curve(spec, schedule, kn_exp, cfg, seeds, test_n, cfg.seed, jobs);
    if (!out_base.empty()) write_curve_csv(curve, out_base + ".csv");

    std::cout << "n\tkn\tmetric\texcess\n";
    for (const auto& point : curve) {
        std::cout << point.n << '\t' << point.kn << '\t' << point.mean_metric << '\t'
                  << point.mean_excess << '\n';
    }
    return 0;
}

int cmd_bench(const DataOptions& data_opt, const VariantOptions& variant_opt,
              const std::string& sizes_text, const std::string& variants_text, int reps,
              const std::string& out_base, unsigned jobs) {
    const auto sizes = parse_size_list(sizes_text);
    std::vector<VariantConfig> configs;
    std::stringstream ss(variants_text);
    std::string name;
    while (std::getline(ss, name, ',')) {
        VariantConfig cfg = variant_opt.cfg;
        cfg.variant = variant_from_string(name);
        configs.push_back(cfg);
    }
    if (configs.empty()) throw ConfigError("--variants is empty");

    DataOptions synth = data_opt;
    if (synth.synthetic.empty()) synth.synthetic = "classification";
    const SyntheticSpec spec = make_spec(synth, variant_opt.cfg.seed);

    const auto rows = bench_runtime(spec, sizes, configs, reps, jobs);
    if (!out_base.empty()) write_bench_csv(rows, out_base + ".csv");

    std::cout << "variant\tn\tseconds\tratio\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::cout << to_string(rows[i].variant) << '\t' << rows[i].n << '\t' << rows[i].seconds;
        // ratio against the same variant at the previous size
        if (i >= configs.size()) {
            std::cout << '\t' << rows[i].seconds / rows[i - configs.size()].seconds;
        } else {
            std::cout << "\t-";
        }
        std::cout << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decision-forest engine: DMRF and baseline random-forest variants"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (key = value, [section] per subcommand)");

    DataOptions data_opt;
    VariantOptions variant_opt;
    unsigned jobs = 1;
    std::string out_path;
    app.add_option("--jobs", jobs, "Worker threads for tree builds")->capture_default_str();

    // let parent options (--jobs, --config) appear after the subcommand too
    for (auto* sub : {app.add_subcommand("train", "Train a forest and save the model"),
                      app.add_subcommand("predict", "Predict rows of a CSV with a saved model"),
                      app.add_subcommand("cv", "Repeated k-fold cross-validation"),
                      app.add_subcommand("sweep", "Cross-validated parameter grid sweep"),
                      app.add_subcommand("consistency", "Excess-risk curve over growing n"),
                      app.add_subcommand("bench", "Training-time scaling table")}) {
        sub->fallthrough();
    }

    auto* train = app.get_subcommand("train");
    add_data_options(train, data_opt);
    add_variant_options(train, variant_opt);
    std::string emit_data;
    train->add_option("--out", out_path, "Model output path (required)");
    train->add_option("--emit-data", emit_data, "Also write the training data as CSV");

    auto* predict = app.get_subcommand("predict");
    std::string model_path, in_path, predict_label_col;
    bool predict_header = false;
    std::uint64_t predict_seed = 0;
    predict->add_option("--model", model_path, "Model path (required)");
    predict->add_option("--in", in_path, "Input CSV of feature rows (required)");
    predict->add_option("--out", out_path, "Output CSV of predictions (required)");
    predict->add_option("--label-col", predict_label_col,
                        "Column to ignore (name or 0-based index; 'last' = rightmost)");
    predict->add_flag("--header", predict_header, "First input line is a header");
    predict->add_option("--seed", predict_seed, "Seed for vote tie-breaking");

    auto* cv = app.get_subcommand("cv");
    add_data_options(cv, data_opt);
    add_variant_options(cv, variant_opt);
    int folds = 10, repeats = 10;
    cv->add_option("--folds", folds, "Fold count")->capture_default_str();
    cv->add_option("--repeats", repeats, "Repetitions with fresh folds")->capture_default_str();
    cv->add_option("--out", out_path, "Write <out>.csv and <out>.jsonl");

    auto* sweep_cmd = app.get_subcommand("sweep");
    add_data_options(sweep_cmd, data_opt);
    add_variant_options(sweep_cmd, variant_opt);
    std::vector<std::string> grid_specs;
    sweep_cmd->add_option("--grid", grid_specs,
                          "Axis as name=v1,v2,... or name=lo:hi:step (repeatable, required)");
    sweep_cmd->add_option("--folds", folds, "Fold count")->capture_default_str();
    sweep_cmd->add_option("--repeats", repeats, "Repetitions")->capture_default_str();
    sweep_cmd->add_option("--out", out_path, "Write <out>.csv and <out>.jsonl");

    auto* consistency = app.get_subcommand("consistency");
    add_data_options(consistency, data_opt);
    add_variant_options(consistency, variant_opt);
    std::string schedule = "256,1024,4096,8192";
    double kn_exp = 0.6;
    int seeds = 5;
    std::size_t test_n = 10000;
    consistency->add_option("--schedule", schedule, "Training sizes")->capture_default_str();
    consistency->add_option("--kn-exp", kn_exp, "k_n = ceil(n^exp)")->capture_default_str();
    consistency->add_option("--seeds", seeds, "Replicates per size")->capture_default_str();
    consistency->add_option("--test-n", test_n, "Fixed test-set size")->capture_default_str();
    consistency->add_option("--out", out_path, "Write <out>.csv");

    auto* bench = app.get_subcommand("bench");
    add_data_options(bench, data_opt);
    add_variant_options(bench, variant_opt);
    std::string sizes_text = "2000,4000", variants_text = "DMRF";
    int reps = 1;
    bench->add_option("--sizes", sizes_text, "Synthetic training sizes")->capture_default_str();
    bench->add_option("--variants", variants_text, "Comma-separated variant names")
        ->capture_default_str();
    bench->add_option("--reps", reps, "Repetitions per cell (median kept)")->capture_default_str();
    bench->add_option("--out", out_path, "Write <out>.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (train->parsed()) {
            return cmd_train(data_opt, variant_opt, out_path, emit_data, jobs);
        }
        if (predict->parsed()) {
            return cmd_predict(model_path, in_path, out_path, predict_label_col, predict_header,
                               predict_seed);
        }
        if (cv->parsed()) return cmd_cv(data_opt, variant_opt, folds, repeats, out_path, jobs);
        if (sweep_cmd->parsed()) {
            return cmd_sweep(data_opt, variant_opt, grid_specs, folds, repeats, out_path, jobs);
        }
        if (consistency->parsed()) {
            return cmd_consistency(data_opt, variant_opt, schedule, kn_exp, seeds, test_n,
                                   out_path, jobs);
        }
        if (bench->parsed()) {
            return cmd_bench(data_opt, variant_opt, sizes_text, variants_text, reps, out_path,
                             jobs);
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 1;
}
