// Acceptance suite: every release gate in one binary, one line per criterion.
// Run via `ctest -R acceptance` or directly; criteria 6 and 7 need the UCI
// bundle (tools/fetch_uci.py) and are skipped when it is absent.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dmrf/eval.hpp"
#include "dmrf/forest.hpp"
#include "dmrf/impurity.hpp"
#include "dmrf/split.hpp"
#include "dmrf/synthetic.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace dmrf;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status = Status::pass;
    std::string detail;
};

Outcome passed(std::string detail) { return {Status::pass, std::move(detail)}; }
Outcome failed(std::string detail) { return {Status::fail, std::move(detail)}; }
Outcome skipped(std::string detail) { return {Status::skip, std::move(detail)}; }

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion_properties() {
    // softmax normalization
    Rng rng(101);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t len = 1 + rng.uniform_below(10);
        std::vector<double> v(len);
        for (auto& x : v) x = rng.uniform01();
        const double temperature = rng.uniform01() * 100.0;
        const auto probs = softmax_temp(v, temperature);
        double sum = 0.0;
        for (double p : probs) sum += p;
        if (std::abs(sum - 1.0) > 1e-12) {
            return failed("softmax sum off by " + fmt(std::abs(sum - 1.0)));
        }
    }

    // feature-selection lower bound over 1e4 random cases
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t d = 2 + rng.uniform_below(7);
        std::vector<double> v(d);
        for (auto& x : v) x = rng.uniform01();
        const double temperature = rng.uniform01() * 10.0;
        const auto probs = softmax_temp(v, temperature);
        const double bound = 1.0 / (1.0 + static_cast<double>(d - 1) * std::exp(temperature));
        for (double p : probs) {
            if (p < bound * (1.0 - 1e-12)) {
                return failed("softmax component " + fmt(p) + " below bound " + fmt(bound));
            }
        }
    }

    // normalize: range and affine invariance
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t len = 1 + rng.uniform_below(8);
        std::vector<double> v(len);
        for (auto& x : v) x = rng.uniform01() * 40.0 - 20.0;
        const auto base = normalize(v);
        for (double x : base) {
            if (x < 0.0 || x > 1.0) return failed("normalize out of range: " + fmt(x));
        }
        const double a = 0.05 + rng.uniform01() * 10.0;
        const double b = rng.uniform01() * 10.0 - 5.0;
        std::vector<double> scaled(len);
        for (std::size_t i = 0; i < len; ++i) scaled[i] = a * v[i] + b;
        const auto again = normalize(scaled);
        for (std::size_t i = 0; i < len; ++i) {
            if (std::abs(again[i] - base[i]) > 1e-9) {
                return failed("normalize not affine-invariant: " + fmt(again[i] - base[i]));
            }
        }
    }

    // Gini reduction nonnegativity
    for (int trial = 0; trial < 2000; ++trial) {
        const int classes = 2 + static_cast<int>(rng.uniform_below(5));
        std::vector<std::uint32_t> left(classes), right(classes), parent(classes);
        std::uint32_t nl = 0, nr = 0;
        for (int k = 0; k < classes; ++k) {
            left[k] = static_cast<std::uint32_t>(rng.uniform_below(8));
            right[k] = static_cast<std::uint32_t>(rng.uniform_below(8));
            parent[k] = left[k] + right[k];
            nl += left[k];
            nr += right[k];
        }
        if (nl == 0 || nr == 0) continue;
        const double red = gini_reduction(parent, left, right);
        if (red < 0.0) return failed("negative gini reduction " + fmt(red));
    }

    // kfold partition
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.uniform_below(300);
        const std::size_t k = 2 + rng.uniform_below(n - 1);
        const auto folds = kfold(n, k, rng.next_u64());
        std::vector<bool> seen(n, false);
        std::size_t lo = n, hi = 0;
        for (const auto& [train, test] : folds) {
            if (train.size() + test.size() != n) return failed("kfold sizes do not add up");
            for (auto i : test) {
                if (seen[i]) return failed("kfold test sets overlap");
                seen[i] = true;
            }
            lo = std::min(lo, test.size());
            hi = std::max(hi, test.size());
        }
        for (bool s : seen) {
            if (!s) return failed("kfold misses an index");
        }
        if (hi - lo > 1) return failed("kfold sizes differ by more than 1");
    }

    // bootstrap nonemptiness and inclusion frequency
    for (int trial = 0; trial < 1000; ++trial) {
        if (bootstrap_indices(1, 0.01, rng).empty()) return failed("empty bootstrap draw");
    }
    const double q = 1.0 - 1.0 / std::exp(1.0);
    {
        const auto draw = bootstrap_indices(10000, q, rng);
        const double sigma = std::sqrt(10000.0 * q * (1.0 - q));
        if (std::abs(static_cast<double>(draw.size()) - 10000.0 * q) > 3.0 * sigma) {
            return failed("bootstrap size " + std::to_string(draw.size()) + " outside 3 sigma");
        }
    }
    {
        const std::size_t n = 100;
        const int draws = 10000;
        double included = 0.0;
        for (int d = 0; d < draws; ++d) included += bootstrap_indices(n, q, rng).size();
        const double freq = included / (static_cast<double>(draws) * n);
        const double sigma = std::sqrt(q * (1.0 - q) / (static_cast<double>(draws) * n));
        if (std::abs(freq - q) > 3.0 * sigma) {
            return failed("inclusion frequency " + fmt(freq, 6) + " outside q +- 3 sigma");
        }
    }
    return passed("softmax/bound/normalize/gini/kfold/bootstrap properties hold");
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion_oracle() {
    Rng rng(202);
    int checked = 0;
    for (int node = 0; node < 200; ++node) {
        const std::size_t n = 2 + rng.uniform_below(19);
        const std::size_t d = 1 + rng.uniform_below(3);
        const int classes = 2 + static_cast<int>(rng.uniform_below(2));
        const Dataset data = testutil::random_grid_dataset(rng, n, d, classes);
        const auto rows = testutil::all_rows(data);
        std::vector<std::uint32_t> subspace(d);
        for (std::uint32_t f = 0; f < d; ++f) subspace[f] = f;

        const auto expected = oracle::best_split(data, rows);
        const auto actual = best_split({&data, rows}, subspace);
        if (expected.has_value() != actual.has_value()) {
            return failed("node " + std::to_string(node) + ": splittability disagrees");
        }
        if (expected) {
            ++checked;
            if (actual->feature != expected->feature || actual->threshold != expected->threshold) {
                return failed("node " + std::to_string(node) + ": best_split (" +
                              std::to_string(actual->feature) + "," + fmt(actual->threshold) +
                              ") vs oracle (" + std::to_string(expected->feature) + "," +
                              fmt(expected->threshold) + ")");
            }
        }

        SplitStrategyConfig cfg;
        cfg.variant = SplitVariant::dmrf;
        cfg.p = 1.0;
        Rng gate_rng(node);
        const auto gated = dmrf_split({&data, rows}, subspace, cfg, 1, gate_rng);
        if (gated.has_value() != actual.has_value() ||
            (gated && !(*gated == *actual))) {
            return failed("node " + std::to_string(node) + ": dmrf p=1 deviates from best_split");
        }
    }
    return passed(std::to_string(checked) + " splittable nodes match the enumeration oracle");
}

// ---------------------------------------------------------------- criterion 3

Dataset concentration_node() {
    // two features; feature 0 separates perfectly at x<=1, feature 1 is noisy
    std::vector<double> features{0, 5, 0, 6, 1, 5, 1, 7, 2, 9, 2, 8, 3, 9, 3, 5};
    std::vector<double> labels{1, 1, 1, 1, 2, 2, 2, 2};
    return Dataset(std::move(features), std::move(labels), 2, Task::classification, {"1", "2"});
}

Outcome criterion_temperature_limits() {
    const Dataset data = concentration_node();
    const auto rows = testutil::all_rows(data);
    const std::vector<std::uint32_t> subspace{0, 1};
    const auto argmax = best_split({&data, rows}, subspace);
    if (!argmax) return failed("fixture node is not splittable");

    SplitStrategyConfig hot;
    hot.variant = SplitVariant::dmrf;
    hot.p = 0.0;
    hot.b1 = 100.0;
    hot.b2 = 100.0;
    Rng rng(303);
    int hits = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto sampled = dmrf_split({&data, rows}, subspace, hot, 1, rng);
        if (sampled && *sampled == *argmax) ++hits;
    }
    if (hits < 990) return failed("argmax hit only " + std::to_string(hits) + "/1000 at B=100");

    // three splittable features, uniform feature choice at B=0
    std::vector<double> features;
    std::vector<double> labels;
    Rng data_rng(404);
    for (int i = 0; i < 24; ++i) {
        for (int f = 0; f < 3; ++f) features.push_back(static_cast<double>(data_rng.uniform_below(4)));
        labels.push_back(static_cast<double>(1 + data_rng.uniform_below(2)));
    }
    const Dataset uniform_data(std::move(features), std::move(labels), 3, Task::classification,
                               {"1", "2"});
    const auto urows = testutil::all_rows(uniform_data);
    const std::vector<std::uint32_t> all3{0, 1, 2};

    SplitStrategyConfig cold = hot;
    cold.b1 = 0.0;
    cold.b2 = 0.0;
    std::vector<int> counts(3, 0);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const auto sampled = dmrf_split({&uniform_data, urows}, all3, cold, 1, rng);
        if (!sampled) return failed("uniform fixture unsplittable");
        ++counts[sampled->feature];
    }
    const double expected = draws / 3.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    if (chi2 >= 9.210) {  // df=2, alpha=0.01
        return failed("feature frequencies fail chi-square: chi2=" + fmt(chi2));
    }
    return passed("argmax " + std::to_string(hits) + "/1000 at B=100; chi2=" + fmt(chi2) +
                  " at B=0");
}

// ----------------------------------------------------------- criteria 4 and 5

VariantConfig consistency_config() {
    VariantConfig cfg;  // benchmark defaults otherwise
    cfg.trees = 50;
    cfg.strict_leaf = true;
    return cfg;
}

Outcome criterion_consistency_classification() {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::noisy_threshold_classification;
    spec.dimension = 2;
    spec.flip_probability = 0.10;
    const std::vector<std::size_t> schedule{256, 1024, 4096, 8192};
    const auto curve =
        consistency_curve(spec, schedule, 0.6, consistency_config(), 5, 10000, 20240501);

    std::string path;
    for (const auto& point : curve) {
        if (!path.empty()) path += " -> ";
        path += fmt(point.mean_metric);
    }
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].mean_metric > curve[i - 1].mean_metric) {
            return failed("mean test error not monotone: " + path);
        }
    }
    if (curve.back().mean_metric > 0.13) {
        return failed("error at n=8192 is " + fmt(curve.back().mean_metric) + " > 0.13");
    }
    return passed("error " + path + " (Bayes 0.10)");
}

Outcome criterion_consistency_regression() {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::smooth_regression;
    spec.dimension = 2;
    spec.noise_variance = 0.01;
    const std::vector<std::size_t> schedule{256, 1024, 4096, 8192};
    const auto curve =
        consistency_curve(spec, schedule, 0.6, consistency_config(), 5, 10000, 20240502);

    std::string path;
    for (const auto& point : curve) {
        if (!path.empty()) path += " -> ";
        path += fmt(point.mean_metric);
    }
    if (curve.back().mean_metric > 0.015) {
        return failed("MSE vs f at n=8192 is " + fmt(curve.back().mean_metric) + " > 0.015");
    }
    if (!(curve.back().mean_metric < curve.front().mean_metric)) {
        return failed("MSE vs f did not shrink: " + path);
    }
    return passed("MSE vs f " + path);
}

// ----------------------------------------------------------- criteria 6 and 7

std::filesystem::path uci_dir() {
    if (const char* env = std::getenv("DMRF_DATA_DIR")) return env;
    return std::filesystem::path(DMRF_SOURCE_DIR) / "data" / "uci";
}

struct UciDataset {
    std::string file;
    Task task;
};

const std::map<std::string, UciDataset>& uci_table() {
    static const std::map<std::string, UciDataset> table{
        {"blogger", {"blogger.csv", Task::classification}},
        {"vertebral", {"vertebral.csv", Task::classification}},
        {"tic-tac-toe", {"tic-tac-toe.csv", Task::classification}},
        {"ale", {"ale.csv", Task::regression}},
    };
    return table;
}

std::optional<Dataset> load_uci(const std::string& name) {
    const auto& entry = uci_table().at(name);
    const auto path = uci_dir() / entry.file;
    if (!std::filesystem::exists(path)) return std::nullopt;
    LoadOptions opt;
    opt.task = entry.task;
    return load_csv(path.string(), opt);
}

// 10 repeats of 10-fold CV at the benchmark defaults, cached per variant.
double uci_cv_mean(const std::string& name, const Dataset& data, VariantId variant) {
    static std::map<std::string, double> cache;
    const std::string key = name + "/" + to_string(variant);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    VariantConfig cfg;
    cfg.variant = variant;
    const EvalReport report = cross_validate(data, cfg, 10, 10, 1789, 1);
    cache[key] = report.mean;
    return report.mean;
}

Outcome criterion_paper_numbers() {
    struct Target {
        std::string name;
        double center;
        double tolerance;  // accuracy targets, percent
    };
    const std::vector<Target> classification_targets{
        {"blogger", 81.80, 5.0},
        {"vertebral", 84.39, 3.0},
        {"tic-tac-toe", 98.27, 2.0},
    };

    std::string detail;
    for (const auto& target : classification_targets) {
        const auto data = load_uci(target.name);
        if (!data) return skipped("UCI bundle absent; run tools/fetch_uci.py");
        const double acc = 100.0 * uci_cv_mean(target.name, *data, VariantId::DMRF);
        if (std::abs(acc - target.center) > target.tolerance) {
            return failed(target.name + " accuracy " + fmt(acc, 4) + "% outside " +
                          fmt(target.center, 4) + " +- " + fmt(target.tolerance, 2));
        }
        detail += target.name + "=" + fmt(acc, 4) + "% ";
    }

    const auto ale = load_uci("ale");
    if (!ale) return skipped("UCI bundle absent; run tools/fetch_uci.py");
    const double mse = uci_cv_mean("ale", *ale, VariantId::DMRF);
    if (mse < 0.024 || mse > 0.095) {
        return failed("ale MSE " + fmt(mse) + " outside [0.024, 0.095]");
    }
    detail += "ale=" + fmt(mse);
    return passed(detail);
}

Outcome criterion_comparative_ordering() {
    const std::vector<std::string> names{"blogger", "vertebral", "tic-tac-toe"};
    std::vector<Dataset> datasets;
    for (const auto& name : names) {
        auto data = load_uci(name);
        if (!data) return skipped("UCI bundle absent; run tools/fetch_uci.py");
        datasets.push_back(std::move(*data));
    }

    int dmrf_wins = 0;
    std::map<std::string, int> pair_wins{{"MRF", 0}, {"BRF", 0}, {"Denil14", 0}};
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double dmrf = uci_cv_mean(names[i], datasets[i], VariantId::DMRF);
        const double brf_se = uci_cv_mean(names[i], datasets[i], VariantId::BRF_SE);
        if (dmrf >= brf_se) ++dmrf_wins;
        if (uci_cv_mean(names[i], datasets[i], VariantId::MRF_b) >=
            uci_cv_mean(names[i], datasets[i], VariantId::MRF_SE)) {
            ++pair_wins["MRF"];
        }
        if (uci_cv_mean(names[i], datasets[i], VariantId::BRF_b) >= brf_se) ++pair_wins["BRF"];
        if (uci_cv_mean(names[i], datasets[i], VariantId::Denil14_b) >=
            uci_cv_mean(names[i], datasets[i], VariantId::Denil14_SE)) {
            ++pair_wins["Denil14"];
        }
    }
    if (dmrf_wins < 2) {
        return failed("DMRF >= BRF-SE on only " + std::to_string(dmrf_wins) + "/3 datasets");
    }
    for (const auto& [family, wins] : pair_wins) {
        if (wins < 2) {
            return failed(family + "-b >= " + family + "-SE on only " + std::to_string(wins) +
                          "/3 datasets");
        }
    }
    return passed("DMRF>=BRF-SE on " + std::to_string(dmrf_wins) + "/3; b>=SE on " +
                  std::to_string(pair_wins["MRF"]) + "," + std::to_string(pair_wins["BRF"]) + "," +
                  std::to_string(pair_wins["Denil14"]) + " of 3");
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion_scaling() {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::noisy_threshold_classification;
    spec.dimension = 20;
    spec.flip_probability = 0.1;
    spec.seed = 808;

    VariantConfig dmrf_cfg;
    dmrf_cfg.trees = 20;
    VariantConfig mrf_cfg = dmrf_cfg;
    mrf_cfg.variant = VariantId::MRF_b;
    const std::vector<VariantConfig> configs{dmrf_cfg, mrf_cfg};
    const std::vector<std::size_t> sizes{5000, 10000};

    const auto rows = bench_runtime(spec, sizes, configs, 3, 1);
    // rows: (DMRF,5000), (MRF-b,5000), (DMRF,10000), (MRF-b,10000)
    const double dmrf_small = rows[0].seconds, mrf_small = rows[1].seconds;
    const double dmrf_big = rows[2].seconds, mrf_big = rows[3].seconds;

    const double doubling = dmrf_big / dmrf_small;
    const double slowdown = mrf_big / dmrf_big;
    if (doubling > 3.0) {
        return failed("DMRF doubling ratio " + fmt(doubling, 3) + " > 3");
    }
    if (slowdown < 1.5) {
        return failed("MRF-b only " + fmt(slowdown, 3) + "x DMRF at D=20");
    }
    return passed("doubling x" + fmt(doubling, 3) + "; MRF-b/DMRF x" + fmt(slowdown, 3) +
                  " (also x" + fmt(mrf_small / dmrf_small, 3) + " at n=5000)");
}

// ---------------------------------------------------------------- criterion 9

std::string locate_cli() {
    const std::string env = testutil::cli_path();
    if (!env.empty() && std::filesystem::exists(env)) return env;
    for (const char* guess : {"./tools/dmrf", "../tools/dmrf", "build/tools/dmrf"}) {
        if (std::filesystem::exists(guess)) return guess;
    }
    return "";
}

std::string strip_last_column(const std::string& path) {
    std::ifstream in(path);
    std::string line, kept;
    while (std::getline(in, line)) {
        kept += line.substr(0, line.rfind(','));
        kept += '\n';
    }
    return kept;
}

Outcome criterion_determinism() {
    const std::string cli = locate_cli();
    if (cli.empty()) return failed("cannot locate the dmrf binary (set DMRF_CLI)");

    testutil::TempDir dir("acceptance-determinism");
    const auto csv = dir.file("data.csv");
    const SyntheticSpec spec{SyntheticKind::noisy_threshold_classification, 3, 0.15, 0.0, 77};
    write_csv(synth_classification(spec, 200), csv);

    const std::string train_cmd =
        cli + " train --data " + csv + " --trees 10 --seed 123 --out ";
    const auto model_a = dir.file("a.model"), model_b = dir.file("b.model");
    if (testutil::run_command(train_cmd + model_a).exit_code != 0 ||
        testutil::run_command(train_cmd + model_b).exit_code != 0) {
        return failed("train runs did not exit cleanly");
    }
    if (testutil::read_file(model_a) != testutil::read_file(model_b)) {
        return failed("serialized forests differ between processes");
    }
    if (!(Forest::load_file(model_a) == Forest::load_file(model_b))) {
        return failed("forests differ structurally between processes");
    }

    const std::string cv_cmd = cli + " cv --data " + csv +
                               " --trees 5 --folds 4 --repeats 2 --seed 9 --out ";
    const auto report_a = dir.file("ra"), report_b = dir.file("rb");
    const auto run_a = testutil::run_command(cv_cmd + report_a);
    const auto run_b = testutil::run_command(cv_cmd + report_b);
    if (run_a.exit_code != 0 || run_b.exit_code != 0) {
        return failed("cv runs did not exit cleanly");
    }
    if (run_a.output != run_b.output) return failed("cv headlines differ between processes");
    if (strip_last_column(report_a + ".csv") != strip_last_column(report_b + ".csv")) {
        return failed("cv reports differ between processes (ignoring timings)");
    }
    return passed("model files byte-identical; cv reports identical modulo timings");
}

struct Criterion {
    int number;
    std::string title;
    std::function<Outcome()> run;
    double budget_seconds;  // 0 = uncapped
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "property suite", criterion_properties, 60.0},
        {2, "oracle equivalence", criterion_oracle, 60.0},
        {3, "temperature-limit concentration", criterion_temperature_limits, 0.0},
        {4, "empirical consistency, classification", criterion_consistency_classification, 600.0},
        {5, "empirical consistency, regression", criterion_consistency_regression, 600.0},
        {6, "benchmark reproduction at desk scale", criterion_paper_numbers, 0.0},
        {7, "comparative ordering", criterion_comparative_ordering, 0.0},
        {8, "scaling sanity", criterion_scaling, 0.0},
        {9, "cross-process determinism", criterion_determinism, 0.0},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = failed(std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(
            std::chrono::steady_clock::now() - start).count();
        if (outcome.status == Status::pass && criterion.budget_seconds > 0.0 &&
            seconds > criterion.budget_seconds) {
            outcome = failed("runtime " + fmt(seconds, 3) + "s exceeds " +
                             fmt(criterion.budget_seconds, 3) + "s budget");
        }
        const char* tag = outcome.status == Status::pass ? "PASS"
                          : outcome.status == Status::fail ? "FAIL"
                                                           : "SKIP";
        if (outcome.status == Status::fail) ++failures;
        std::printf("criterion %d [%s] %s: %s (%.1fs)\n", criterion.number, tag,
                    criterion.title.c_str(), outcome.detail.c_str(), seconds);
        std::fflush(stdout);
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    return 0;
}
