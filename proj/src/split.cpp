#include "dmrf/split.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dmrf/error.hpp"
#include "dmrf/impurity.hpp"

namespace dmrf {

void SplitStrategyConfig::validate() const {
    auto probability = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!probability(p)) throw ConfigError("p must lie in [0, 1]");
    if (!probability(p1) || !probability(p2)) throw ConfigError("p1, p2 must lie in [0, 1]");
    if (!(b1 >= 0.0) || !std::isfinite(b1)) throw ConfigError("B1 must be finite and >= 0");
    if (!(b2 >= 0.0) || !std::isfinite(b2)) throw ConfigError("B2 must be finite and >= 0");
    if (!(poisson_mean > 0.0)) throw ConfigError("lambda must be > 0");
    if (preselect < 1) throw ConfigError("m must be >= 1");
}

std::uint32_t subspace_size(std::size_t feature_count) {
    const auto s = static_cast<std::uint32_t>(std::floor(std::sqrt(static_cast<double>(feature_count))));
    return std::max<std::uint32_t>(s, 1);
}

std::vector<double> candidate_thresholds(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (!sorted.empty()) sorted.pop_back();  // x <= max keeps the right child empty
    return sorted;
}

std::vector<double> normalize(std::span<const double> v) {
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(v.size(), 0.0);
    if (hi > lo) {
        const double range = hi - lo;
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / range;
    }
    return out;
}

std::vector<double> softmax_temp(std::span<const double> v, double temperature) {
    // Shift by the max before exponentiating; harmless for the [0,1] inputs
    // used here and safe for arbitrary ones.
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : v) hi = std::max(hi, temperature * x);
    std::vector<double> out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(temperature * v[i] - hi);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
    if (probs.empty()) throw ConfigError("empty probability vector");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw ConfigError("probability vector has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("probability vector does not sum to 1");

    const double u = rng.uniform01() * sum;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) last_positive = i;
        acc += probs[i];
        if (u < acc) return i;
    }
    return last_positive;  // u landed past acc due to rounding
}

std::optional<SplitPoint> ReductionTable::best() const {
    std::optional<SplitPoint> result;
    double best_reduction = 0.0;
    for (const auto& fr : features) {  // rows are ordered by feature index
        if (!result || fr.max_reduction > best_reduction) {
            result = SplitPoint{fr.feature, fr.thresholds[fr.argmax]};
            best_reduction = fr.max_reduction;
        }
    }
    return result;
}

namespace {

struct ValueLabel {
    double value;
    double label;
};

// Reductions of one feature over sorted (value, label) pairs. Walks run
// boundaries once, maintaining left-side class counts or moment sums.
FeatureReductions feature_reductions_classification(
    std::uint32_t feature, std::vector<ValueLabel>& pairs, int classes,
    std::uint32_t min_child, const std::unordered_set<double>* allowed) {
    FeatureReductions out;
    out.feature = feature;

    const auto n = static_cast<std::uint32_t>(pairs.size());
    std::vector<std::uint32_t> parent_counts(classes, 0), left_counts(classes, 0);
    for (const auto& p : pairs) ++parent_counts[static_cast<int>(p.label) - 1];
    const double parent_gini = gini(parent_counts);

    std::uint32_t left_n = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        ++left_counts[static_cast<int>(pairs[i].label) - 1];
        ++left_n;
        if (i + 1 < n && pairs[i + 1].value == pairs[i].value) continue;  // inside a run
        if (left_n == n) break;  // threshold = max empties the right child
        if (left_n < min_child || n - left_n < min_child) continue;
        const double v = pairs[i].value;
        if (allowed && !allowed->contains(v)) continue;

        double left_sq = 0.0, right_sq = 0.0;
        const double ln = left_n, rn = n - left_n;
        for (int k = 0; k < classes; ++k) {
            const double lf = left_counts[k] / ln;
            const double rf = (parent_counts[k] - left_counts[k]) / rn;
            left_sq += lf * lf;
            right_sq += rf * rf;
        }
        const double red = parent_gini - (ln / n) * (1.0 - left_sq) - (rn / n) * (1.0 - right_sq);
        out.thresholds.push_back(v);
        out.reductions.push_back(red < 0.0 && red > -1e-9 ? 0.0 : red);
    }
    return out;
}

FeatureReductions feature_reductions_regression(
    std::uint32_t feature, std::vector<ValueLabel>& pairs, bool weighted,
    std::uint32_t min_child, const std::unordered_set<double>* allowed) {
    FeatureReductions out;
    out.feature = feature;

    const auto n = static_cast<std::uint32_t>(pairs.size());
    double mean = 0.0;
    for (const auto& p : pairs) mean += p.label;
    mean /= n;

    // Center targets on the parent mean so the moment sums stay small.
    double total_sq = 0.0;
    for (auto& p : pairs) {
        p.label -= mean;
        total_sq += p.label * p.label;
    }
    const double parent_mse = total_sq / n;

    double left_sum = 0.0, left_sq = 0.0;
    std::uint32_t left_n = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        left_sum += pairs[i].label;
        left_sq += pairs[i].label * pairs[i].label;
        ++left_n;
        if (i + 1 < n && pairs[i + 1].value == pairs[i].value) continue;
        if (left_n == n) break;
        if (left_n < min_child || n - left_n < min_child) continue;
        const double v = pairs[i].value;
        if (allowed && !allowed->contains(v)) continue;

        const double ln = left_n, rn = n - left_n;
        const double right_sum = -left_sum;  // centered targets sum to ~0
        const double right_sq = total_sq - left_sq;
        const double mse_l = std::max(0.0, left_sq / ln - (left_sum / ln) * (left_sum / ln));
        const double mse_r = std::max(0.0, right_sq / rn - (right_sum / rn) * (right_sum / rn));
        double red;
        if (weighted) {
            red = parent_mse - (ln / n) * mse_l - (rn / n) * mse_r;
            if (red < 0.0 && red > -1e-9) red = 0.0;
        } else {
            red = parent_mse - mse_l - mse_r;
        }
        out.thresholds.push_back(v);
        out.reductions.push_back(red);
    }
    return out;
}

void finish_feature(FeatureReductions& fr) {
    fr.argmax = 0;
    fr.max_reduction = fr.reductions[0];
    for (std::size_t i = 1; i < fr.reductions.size(); ++i) {
        if (fr.reductions[i] > fr.max_reduction) {
            fr.max_reduction = fr.reductions[i];
            fr.argmax = i;
        }
    }
}

}  // namespace

ReductionTable build_reduction_table(const NodeView& node,
                                     std::span<const std::uint32_t> subspace,
                                     std::uint32_t min_child,
                                     bool weighted_mse,
                                     std::span<const std::uint32_t> candidate_rows) {
    const Dataset& data = *node.data;
    std::vector<std::uint32_t> features(subspace.begin(), subspace.end());
    std::sort(features.begin(), features.end());  // table rows by feature index

    ReductionTable table;
    std::vector<ValueLabel> pairs(node.rows.size());
    for (std::uint32_t f : features) {
        for (std::size_t i = 0; i < node.rows.size(); ++i) {
            pairs[i] = {data.x(node.rows[i], f), data.label(node.rows[i])};
        }
        std::sort(pairs.begin(), pairs.end(),
                  [](const ValueLabel& a, const ValueLabel& b) { return a.value < b.value; });

        std::unordered_set<double> allowed;
        const std::unordered_set<double>* allowed_ptr = nullptr;
        if (!candidate_rows.empty()) {
            for (std::uint32_t r : candidate_rows) allowed.insert(data.x(r, f));
            allowed_ptr = &allowed;
        }

        FeatureReductions fr =
            data.task() == Task::classification
                ? feature_reductions_classification(f, pairs, data.class_count(), min_child, allowed_ptr)
                : feature_reductions_regression(f, pairs, weighted_mse, min_child, allowed_ptr);
        if (!fr.thresholds.empty()) {
            finish_feature(fr);
            table.features.push_back(std::move(fr));
        }
    }
    return table;
}

std::optional<SplitPoint> best_split(const NodeView& node,
                                     std::span<const std::uint32_t> subspace,
                                     std::uint32_t min_child,
                                     bool weighted_mse) {
    return build_reduction_table(node, subspace, min_child, weighted_mse).best();
}

namespace {

// Feature then threshold, each drawn from a temperature softmax over the
// normalized reduction vectors.
std::optional<SplitPoint> sample_split_from_table(const ReductionTable& table,
                                                  double b1, double b2, Rng& rng) {
    if (table.empty()) return std::nullopt;

    std::vector<double> maxima(table.features.size());
    for (std::size_t i = 0; i < table.features.size(); ++i) {
        maxima[i] = table.features[i].max_reduction;
    }
    const auto alpha = softmax_temp(normalize(maxima), b1);
    const auto& chosen = table.features[sample_categorical(alpha, rng)];

    const auto beta = softmax_temp(normalize(chosen.reductions), b2);
    const std::size_t t = sample_categorical(beta, rng);
    return SplitPoint{chosen.feature, chosen.thresholds[t]};
}

}  // namespace

std::optional<SplitPoint> dmrf_split(const NodeView& node,
                                     std::span<const std::uint32_t> subspace,
                                     const SplitStrategyConfig& cfg,
                                     std::uint32_t min_child, Rng& rng) {
    if (rng.bernoulli(cfg.p)) {
        return best_split(node, subspace, min_child, cfg.weighted_mse);
    }
    const auto table = build_reduction_table(node, subspace, min_child, cfg.weighted_mse);
    return sample_split_from_table(table, cfg.b1, cfg.b2, rng);
}

std::optional<SplitPoint> mrf_split(const NodeView& node,
                                    const SplitStrategyConfig& cfg,
                                    std::uint32_t min_child, Rng& rng) {
    std::vector<std::uint32_t> all(node.data->feature_count());
    for (std::uint32_t f = 0; f < all.size(); ++f) all[f] = f;
    const auto table = build_reduction_table(node, all, min_child, cfg.weighted_mse);
    return sample_split_from_table(table, cfg.b1, cfg.b2, rng);
}

std::optional<SplitPoint> brf_split(const NodeView& node,
                                    const SplitStrategyConfig& cfg,
                                    std::uint32_t min_child, Rng& rng) {
    const auto d = static_cast<std::uint32_t>(node.data->feature_count());
    std::vector<std::uint32_t> subspace;
    if (rng.bernoulli(cfg.p1)) {
        subspace.push_back(static_cast<std::uint32_t>(rng.uniform_below(d)));
    } else {
        subspace = rng.sample_without_replacement(d, subspace_size(d));
    }

    const auto table = build_reduction_table(node, subspace, min_child, cfg.weighted_mse);
    if (table.empty()) return std::nullopt;
    const SplitPoint best = *table.best();
    if (!rng.bernoulli(cfg.p2)) return best;

    // Uniform threshold among the best feature's candidates.
    for (const auto& fr : table.features) {
        if (fr.feature == best.feature) {
            return SplitPoint{fr.feature, fr.thresholds[rng.uniform_below(fr.thresholds.size())]};
        }
    }
    return best;  // unreachable
}

std::optional<SplitPoint> denil14_split(const NodeView& node,
                                        const SplitStrategyConfig& cfg,
                                        std::uint32_t min_child, Rng& rng) {
    const auto d = static_cast<std::uint32_t>(node.data->feature_count());
    const auto size = std::min<std::uint32_t>(1 + static_cast<std::uint32_t>(rng.poisson(cfg.poisson_mean)), d);
    const auto subspace = rng.sample_without_replacement(d, size);

    const auto n = static_cast<std::uint32_t>(node.rows.size());
    std::vector<std::uint32_t> preselected;
    if (cfg.preselect >= n) {
        preselected.assign(node.rows.begin(), node.rows.end());
    } else {
        for (std::uint32_t slot : rng.sample_without_replacement(n, cfg.preselect)) {
            preselected.push_back(node.rows[slot]);
        }
    }

    return build_reduction_table(node, subspace, min_child, cfg.weighted_mse, preselected).best();
}

}  // namespace dmrf
