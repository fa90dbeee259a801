#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dmrf/forest.hpp"
#include "dmrf/synthetic.hpp"
#include "test_util.hpp"

using namespace dmrf;

namespace {

Forest constant_forest(const std::vector<int>& labels_per_tree, int classes) {
    std::vector<std::string> names;
    for (int k = 1; k <= classes; ++k) names.push_back(std::to_string(k));
    std::vector<Tree> trees;
    for (int label : labels_per_tree) {
        TreeNode leaf;
        leaf.leaf.votes.assign(classes, 0.0);
        leaf.leaf.votes[label - 1] = 1.0;
        leaf.leaf.label = label;
        leaf.leaf.count = 1;
        trees.emplace_back(std::vector<TreeNode>{leaf}, 1, Task::classification, classes);
    }
    VariantConfig cfg;
    cfg.trees = static_cast<std::uint32_t>(labels_per_tree.size());
    return Forest(std::move(trees), cfg, Task::classification, classes, 1, names);
}

Forest constant_regression_forest(const std::vector<double>& means) {
    std::vector<Tree> trees;
    for (double mean : means) {
        TreeNode leaf;
        leaf.leaf.mean = mean;
        leaf.leaf.count = 1;
        trees.emplace_back(std::vector<TreeNode>{leaf}, 1, Task::regression, 0);
    }
    VariantConfig cfg;
    cfg.trees = static_cast<std::uint32_t>(means.size());
    return Forest(std::move(trees), cfg, Task::regression, 0, 1, {});
}

}  // namespace

TEST_CASE("variant names round-trip") {
    for (VariantId v : all_variants()) {
        CHECK(variant_from_string(to_string(v)) == v);
    }
    CHECK_THROWS_AS(variant_from_string("NotAForest"), ConfigError);
    CHECK(to_string(VariantId::Denil14_SE) == "Denil14-SE");
    CHECK(to_string(VariantId::BRF_b) == "BRF-b");
}

TEST_CASE("bernoulli bootstrap") {
    SUBCASE("q=1 keeps everything") {
        Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            const auto view = bootstrap_indices(50, 1.0, rng);
            CHECK(view.size() == 50);
        }
    }
    SUBCASE("forced nonempty at n=1") {
        Rng rng(2);
        for (int i = 0; i < 100; ++i) {
            const auto view = bootstrap_indices(1, 0.01, rng);
            REQUIRE(view.size() == 1);
            CHECK(view[0] == 0);
        }
    }
    SUBCASE("draw size concentrates at nq") {
        Rng rng(3);
        const double q = 1.0 - 1.0 / std::exp(1.0);
        const auto view = bootstrap_indices(10000, q, rng);
        const double sigma = std::sqrt(10000 * q * (1 - q));
        CHECK(std::abs(static_cast<double>(view.size()) - 10000 * q) <= 3 * sigma);
    }
    SUBCASE("per-sample inclusion frequency approaches q") {
        Rng rng(4);
        const double q = 1.0 - 1.0 / std::exp(1.0);
        const int draws = 10000;
        const std::size_t n = 50;
        std::vector<int> hits(n, 0);
        for (int d = 0; d < draws; ++d) {
            for (auto i : bootstrap_indices(n, q, rng)) ++hits[i];
        }
        // aggregate frequency within 3 sigma of the binomial mean
        double total = 0.0;
        for (int h : hits) total += h;
        const double freq = total / (static_cast<double>(draws) * n);
        const double sigma = std::sqrt(q * (1 - q) / (static_cast<double>(draws) * n));
        CHECK(std::abs(freq - q) <= 3 * sigma);
        // per-sample goodness of fit: chi-square with n df, alpha=0.01
        double chi2 = 0.0;
        for (int h : hits) {
            const double dev = h - draws * q;
            chi2 += dev * dev / (draws * q * (1 - q));
        }
        CHECK(chi2 < 76.154);  // critical value for 50 df
    }
}

TEST_CASE("default configuration carries the benchmark settings") {
    const VariantConfig cfg;
    CHECK(cfg.trees == 100);
    CHECK(cfg.q == doctest::Approx(1.0 - 1.0 / std::exp(1.0)).epsilon(1e-12));
    CHECK(cfg.p == 0.5);
    CHECK(cfg.b1 == 5.0);
    CHECK(cfg.b2 == 5.0);
    CHECK(cfg.kn == 5);
    CHECK(cfg.p1 == 0.05);
    CHECK(cfg.p2 == 0.05);
    CHECK(cfg.poisson_mean == 10.0);
    CHECK(cfg.preselect == 100);
    CHECK(cfg.ratio == 0.5);
}

TEST_CASE("gated-off DMRF equals a best-split tree") {
    // D=1 removes subspace randomness, so the p=1 gate makes the whole tree
    // equal to a pure best-split build of the same view.
    Rng data_rng(51);
    std::vector<double> xs(120);
    std::vector<double> ys(120);
    for (auto& x : xs) x = data_rng.uniform01();
    for (auto& y : ys) y = static_cast<double>(1 + data_rng.uniform_below(3));
    const Dataset data(std::move(xs), std::move(ys), 1, Task::classification, {"1", "2", "3"});

    VariantConfig cfg;
    cfg.trees = 1;
    cfg.q = 1.0;
    cfg.p = 1.0;
    cfg.kn = 4;
    cfg.seed = 61;
    const Forest forest = train_forest(data, cfg);

    Rng rng(derive_seed(cfg.seed, stream::tree, 0));
    const auto view = bootstrap_indices(data.size(), 1.0, rng);
    TreeBuildConfig best_cfg = cfg.tree_config(data.task());
    best_cfg.strategy.variant = SplitVariant::best;
    const Tree expected = build_tree(data, view, {}, best_cfg, rng);
    CHECK(forest.trees()[0] == expected);
}

TEST_CASE("classical bootstrap draws n with replacement") {
    Rng rng(5);
    const auto view = classical_bootstrap(100, rng);
    REQUIRE(view.size() == 100);
    std::set<std::uint32_t> distinct(view.begin(), view.end());
    CHECK(distinct.size() < 100);  // repeats all but surely
    for (auto i : view) CHECK(i < 100);
}

TEST_CASE("config validation") {
    const SyntheticSpec spec{SyntheticKind::noisy_threshold_classification, 2, 0.0, 0.0, 1};
    const Dataset data = synth_classification(spec, 30);

    VariantConfig cfg;
    cfg.trees = 0;
    CHECK_THROWS_AS(train_forest(data, cfg), ConfigError);
    cfg = {};
    cfg.q = 0.0;
    CHECK_THROWS_AS(train_forest(data, cfg), ConfigError);
    cfg = {};
    cfg.variant = VariantId::MRF_SE;
    cfg.ratio = 1.0;
    CHECK_THROWS_AS(train_forest(data, cfg), ConfigError);
    cfg = {};
    cfg.p = -0.5;
    CHECK_THROWS_AS(train_forest(data, cfg), ConfigError);
}

TEST_CASE("training is deterministic and order-insensitive") {
    const SyntheticSpec spec{SyntheticKind::noisy_threshold_classification, 3, 0.1, 0.0, 7};
    const Dataset data = synth_classification(spec, 120);
    VariantConfig cfg;
    cfg.trees = 12;
    cfg.seed = 99;

    const Forest serial = train_forest(data, cfg, 1);
    const Forest parallel = train_forest(data, cfg, 4);
    const Forest again = train_forest(data, cfg, 3);
    CHECK(serial == parallel);
    CHECK(serial == again);

    std::stringstream a, b;
    serial.save(a);
    parallel.save(b);
    CHECK(a.str() == b.str());

    VariantConfig other = cfg;
    other.seed = 100;
    CHECK(!(train_forest(data, other) == serial));
}

TEST_CASE("every variant trains on both tasks") {
    const SyntheticSpec cls_spec{SyntheticKind::noisy_threshold_classification, 4, 0.1, 0.0, 11};
    const Dataset cls = synth_classification(cls_spec, 80);
    const SyntheticSpec reg_spec{SyntheticKind::smooth_regression, 3, 0.0, 0.01, 11};
    const Dataset reg = synth_regression(reg_spec, 80);

    for (VariantId v : all_variants()) {
        VariantConfig cfg;
        cfg.variant = v;
        cfg.trees = 3;
        cfg.seed = 5;
        const Forest cf = train_forest(cls, cfg);
        CHECK(cf.trees().size() == 3);
        Rng tie(1);
        const std::vector<double> q{0.3, 0.7, 0.1, 0.9};
        const int label = cf.predict_class(q, tie);
        CHECK(label >= 1);
        CHECK(label <= 2);

        const Forest rf = train_forest(reg, cfg);
        const std::vector<double> qr{0.3, 0.7, 0.1};
        CHECK(std::isfinite(rf.predict_value(qr)));
    }
}

TEST_CASE("memorizing configuration reproduces training labels") {
    const SyntheticSpec spec{SyntheticKind::noisy_threshold_classification, 2, 0.2, 0.0, 13};
    const Dataset data = synth_classification(spec, 60);
    VariantConfig cfg;
    cfg.trees = 1;
    cfg.q = 1.0;
    cfg.p = 1.0;
    cfg.kn = 1;
    cfg.seed = 17;
    const Forest forest = train_forest(data, cfg);
    Rng tie(1);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(forest.predict_class(data.row(i), tie) == data.class_label(i));
    }
}

TEST_CASE("majority vote and tie handling") {
    SUBCASE("M=1 is the single tree") {
        const Forest one = constant_forest({2}, 2);
        Rng tie(1);
        const std::vector<double> x{0.0};
        CHECK(one.predict_class(x, tie) == 2);
    }
    SUBCASE("strict majority wins") {
        const Forest forest = constant_forest({1, 1, 2}, 2);
        Rng tie(1);
        const std::vector<double> x{0.0};
        for (int i = 0; i < 20; ++i) CHECK(forest.predict_class(x, tie) == 1);
    }
    SUBCASE("vote counts are conserved") {
        const Forest forest = constant_forest({1, 2, 2, 3, 3, 3}, 3);
        const std::vector<double> x{0.0};
        const auto votes = forest.vote_counts(x);
        CHECK(votes == std::vector<std::uint32_t>{1, 2, 3});
    }
    SUBCASE("ties break uniformly at random") {
        const Forest forest = constant_forest({1, 2}, 2);
        Rng tie(21);
        const std::vector<double> x{0.0};
        int first = 0;
        const int trials = 10000;
        for (int i = 0; i < trials; ++i) {
            if (forest.predict_class(x, tie) == 1) ++first;
        }
        CHECK(std::abs(first / static_cast<double>(trials) - 0.5) < 0.02);
    }
}

TEST_CASE("regression prediction is the tree mean") {
    const Forest pair = constant_regression_forest({2.0, 4.0});
    const std::vector<double> x{0.0};
    CHECK(pair.predict_value(x) == doctest::Approx(3.0));

    const Forest stumps = constant_regression_forest(std::vector<double>(100, 7.0));
    CHECK(stumps.predict_value(x) == doctest::Approx(7.0));

    Rng tie(1);
    CHECK_THROWS_AS(pair.predict_class(x, tie), ConfigError);
    const Forest cls = constant_forest({1}, 2);
    CHECK_THROWS_AS(cls.predict_value(x), ConfigError);
}

TEST_CASE("model save/load preserves predictions exactly") {
    const SyntheticSpec spec{SyntheticKind::noisy_threshold_classification, 3, 0.15, 0.0, 23};
    const Dataset data = synth_classification(spec, 150);
    VariantConfig cfg;
    cfg.trees = 20;
    cfg.seed = 31;
    const Forest forest = train_forest(data, cfg);

    std::stringstream buffer;
    forest.save(buffer);
    const Forest back = Forest::load(buffer);
    CHECK(forest == back);
    CHECK(back.config().trees == 20);
    CHECK(back.class_names() == data.class_names());

    Rng probe(3);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{probe.uniform01(), probe.uniform01(), probe.uniform01()};
        CHECK(forest.vote_counts(x) == back.vote_counts(x));
    }

    SUBCASE("regression round-trip") {
        const SyntheticSpec reg_spec{SyntheticKind::smooth_regression, 2, 0.0, 0.01, 29};
        const Dataset reg = synth_regression(reg_spec, 150);
        VariantConfig rcfg;
        rcfg.trees = 10;
        rcfg.seed = 37;
        const Forest rf = train_forest(reg, rcfg);
        std::stringstream rbuf;
        rf.save(rbuf);
        const Forest rback = Forest::load(rbuf);
        CHECK(rf == rback);
        Rng rng(4);
        for (int i = 0; i < 100; ++i) {
            const std::vector<double> x{rng.uniform01(), rng.uniform01()};
            CHECK(rf.predict_value(x) == rback.predict_value(x));
        }
    }
}

TEST_CASE("corrupt model files are rejected") {
    std::stringstream empty;
    CHECK_THROWS_AS(Forest::load(empty), DataError);
    std::stringstream wrong("some other file\n");
    CHECK_THROWS_AS(Forest::load(wrong), DataError);
}

TEST_CASE("variant fuzz: random shapes train, predict and round-trip") {
    Rng fuzz(20240809);
    for (int trial = 0; trial < 60; ++trial) {
        const bool classification = fuzz.bernoulli(0.5);
        const std::size_t n = 12 + fuzz.uniform_below(120);
        const std::size_t d = 1 + fuzz.uniform_below(6);

        Dataset data = [&] {
            if (classification) {
                SyntheticSpec spec;
                spec.kind = SyntheticKind::noisy_threshold_classification;
                spec.dimension = std::max<std::size_t>(d, 1);
                spec.flip_probability = 0.45 * fuzz.uniform01();
                spec.seed = fuzz.next_u64();
                return synth_classification(spec, n);
            }
            SyntheticSpec spec;
            spec.kind = SyntheticKind::smooth_regression;
            spec.dimension = std::max<std::size_t>(d, 2);
            spec.noise_variance = fuzz.uniform01();
            spec.seed = fuzz.next_u64();
            return synth_regression(spec, n);
        }();

        VariantConfig cfg;
        cfg.variant = all_variants()[fuzz.uniform_below(all_variants().size())];
        cfg.trees = 1 + static_cast<std::uint32_t>(fuzz.uniform_below(6));
        cfg.kn = 1 + static_cast<std::uint32_t>(fuzz.uniform_below(n));
        cfg.q = 0.05 + 0.95 * fuzz.uniform01();
        cfg.p = fuzz.uniform01();
        cfg.p1 = fuzz.uniform01();
        cfg.p2 = fuzz.uniform01();
        cfg.b1 = fuzz.uniform01() * 10;
        cfg.b2 = fuzz.uniform01() * 10;
        cfg.poisson_mean = 0.5 + fuzz.uniform01() * 12;
        cfg.preselect = 1 + static_cast<std::uint32_t>(fuzz.uniform_below(150));
        cfg.strict_leaf = fuzz.bernoulli(0.4);
        cfg.weighted_mse = fuzz.bernoulli(0.3);
        cfg.seed = fuzz.next_u64();

        CAPTURE(trial);
        CAPTURE(to_string(cfg.variant));
        const Forest forest = train_forest(data, cfg);
        REQUIRE(forest.trees().size() == cfg.trees);

        Rng tie(trial);
        for (int probe = 0; probe < 10; ++probe) {
            std::vector<double> x(data.feature_count());
            for (auto& v : x) v = fuzz.uniform01() * 1.2 - 0.1;
            if (data.task() == Task::classification) {
                const int label = forest.predict_class(x, tie);
                REQUIRE(label >= 1);
                REQUIRE(label <= data.class_count());
            } else {
                REQUIRE(std::isfinite(forest.predict_value(x)));
            }
        }

        std::stringstream buffer;
        forest.save(buffer);
        REQUIRE(Forest::load(buffer) == forest);
    }
}

TEST_CASE("mrf-se leaves use sampled labels only in SE mode") {
    const SyntheticSpec spec{SyntheticKind::noisy_threshold_classification, 2, 0.3, 0.0, 41};
    const Dataset data = synth_classification(spec, 100);

    VariantConfig se;
    se.variant = VariantId::MRF_SE;
    se.trees = 2;
    se.kn = 200;  // single mixed leaf per tree
    se.seed = 7;
    const Forest f_se = train_forest(data, se);

    // With one mixed leaf the sampled rule occasionally records the minority
    // label; the majority rule never does. Seeds chosen to show a difference.
    bool sampled_minority = false;
    for (int s = 0; s < 40; ++s) {
        VariantConfig probe = se;
        probe.seed = s;
        const Forest f = train_forest(data, probe);
        for (const auto& tree : f.trees()) {
            const auto& leaf = tree.nodes()[0].leaf;
            std::size_t majority = 0;
            for (std::size_t k = 1; k < leaf.votes.size(); ++k) {
                if (leaf.votes[k] > leaf.votes[majority]) majority = k;
            }
            if (leaf.label != static_cast<int>(majority) + 1) sampled_minority = true;
        }
    }
    CHECK(sampled_minority);

    VariantConfig b = se;
    b.variant = VariantId::MRF_b;
    for (int s = 0; s < 40; ++s) {
        VariantConfig probe = b;
        probe.seed = s;
        const Forest f = train_forest(data, probe);
        for (const auto& tree : f.trees()) {
            const auto& leaf = tree.nodes()[0].leaf;
            std::size_t majority = 0;
            for (std::size_t k = 1; k < leaf.votes.size(); ++k) {
                if (leaf.votes[k] > leaf.votes[majority]) majority = k;
            }
            CHECK(leaf.label == static_cast<int>(majority) + 1);
        }
    }
}
