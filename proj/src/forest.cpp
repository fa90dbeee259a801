#include "dmrf/forest.hpp"

#include <atomic>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "dmrf/error.hpp"
#include "text_io.hpp"

namespace dmrf {

const std::vector<VariantId>& all_variants() {
    static const std::vector<VariantId> ids = {
        VariantId::DMRF,   VariantId::BreimanRF, VariantId::BRF_SE,     VariantId::BRF_b,
        VariantId::MRF_SE, VariantId::MRF_b,     VariantId::Denil14_SE, VariantId::Denil14_b,
    };
    return ids;
}

std::string to_string(VariantId v) {
    switch (v) {
        case VariantId::DMRF: return "DMRF";
        case VariantId::BreimanRF: return "BreimanRF";
        case VariantId::BRF_SE: return "BRF-SE";
        case VariantId::BRF_b: return "BRF-b";
        case VariantId::MRF_SE: return "MRF-SE";
        case VariantId::MRF_b: return "MRF-b";
        case VariantId::Denil14_SE: return "Denil14-SE";
        case VariantId::Denil14_b: return "Denil14-b";
    }
    return "?";
}

VariantId variant_from_string(const std::string& name) {
    for (VariantId v : all_variants()) {
        if (to_string(v) == name) return v;
    }
    throw ConfigError("unknown variant '" + name +
                      "' (expected DMRF, BreimanRF, BRF-SE, BRF-b, MRF-SE, MRF-b, "
                      "Denil14-SE or Denil14-b)");
}

bool VariantConfig::separates_estimation() const {
    return variant == VariantId::BRF_SE || variant == VariantId::MRF_SE ||
           variant == VariantId::Denil14_SE;
}

bool VariantConfig::uses_bernoulli_bootstrap() const {
    return variant == VariantId::DMRF || variant == VariantId::BRF_b ||
           variant == VariantId::MRF_b || variant == VariantId::Denil14_b;
}

SplitVariant VariantConfig::split_variant() const {
    switch (variant) {
        case VariantId::DMRF: return SplitVariant::dmrf;
        case VariantId::BreimanRF: return SplitVariant::best;
        case VariantId::BRF_SE:
        case VariantId::BRF_b: return SplitVariant::brf;
        case VariantId::MRF_SE:
        case VariantId::MRF_b: return SplitVariant::mrf;
        case VariantId::Denil14_SE:
        case VariantId::Denil14_b: return SplitVariant::denil14;
    }
    return SplitVariant::best;
}

TreeBuildConfig VariantConfig::tree_config(Task task) const {
    TreeBuildConfig cfg;
    cfg.strategy.variant = split_variant();
    cfg.strategy.p = p;
    cfg.strategy.b1 = b1;
    cfg.strategy.b2 = b2;
    cfg.strategy.p1 = p1;
    cfg.strategy.p2 = p2;
    cfg.strategy.poisson_mean = poisson_mean;
    cfg.strategy.preselect = preselect;
    cfg.strategy.weighted_mse = weighted_mse;
    cfg.min_node_size = kn;
    cfg.se_mode = separates_estimation();
    cfg.strict_leaf = strict_leaf;
    cfg.sampled_leaf_label = variant == VariantId::MRF_SE && task == Task::classification;
    return cfg;
}

void VariantConfig::validate(Task task) const {
    (void)task;
    if (trees < 1) throw ConfigError("M must be >= 1");
    if (kn < 1) throw ConfigError("k_n must be >= 1");
    if (uses_bernoulli_bootstrap() && !(q > 0.0 && q <= 1.0)) {
        throw ConfigError("q must lie in (0, 1]");
    }
    if (separates_estimation() && !(ratio > 0.0 && ratio < 1.0)) {
        throw ConfigError("Ratio must lie in (0, 1) for SE variants");
    }
    tree_config(task).strategy.validate();
}

Forest::Forest(std::vector<Tree> trees, VariantConfig cfg, Task task, int classes,
               std::size_t feature_count, std::vector<std::string> class_names)
    : trees_(std::move(trees)),
      cfg_(cfg),
      task_(task),
      classes_(classes),
      d_(feature_count),
      class_names_(std::move(class_names)) {}

std::vector<std::uint32_t> Forest::vote_counts(std::span<const double> x) const {
    if (task_ != Task::classification) throw ConfigError("vote_counts on a regression forest");
    std::vector<std::uint32_t> votes(classes_, 0);
    for (const auto& tree : trees_) ++votes[tree.predict_class(x) - 1];
    return votes;
}

int Forest::predict_class(std::span<const double> x, Rng& tie_rng) const {
    const auto votes = vote_counts(x);
    std::uint32_t top = 0;
    for (auto v : votes) top = std::max(top, v);
    std::vector<int> winners;
    for (int k = 0; k < classes_; ++k) {
        if (votes[k] == top) winners.push_back(k + 1);
    }
    if (winners.size() == 1) return winners.front();
    return winners[tie_rng.uniform_below(winners.size())];
}

double Forest::predict_value(std::span<const double> x) const {
    if (task_ != Task::regression) throw ConfigError("predict_value on a classification forest");
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict_value(x);
    return sum / static_cast<double>(trees_.size());
}

bool operator==(const Forest& a, const Forest& b) {
    return a.task_ == b.task_ && a.classes_ == b.classes_ && a.d_ == b.d_ &&
           a.class_names_ == b.class_names_ && a.trees_ == b.trees_;
}

std::vector<std::uint32_t> bootstrap_indices(std::size_t n, double q, Rng& rng) {
    if (n < 1) throw std::invalid_argument("bootstrap over an empty dataset");
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("q must lie in (0, 1]");
    std::vector<std::uint32_t> indices;
    do {
        indices.clear();
        for (std::uint32_t i = 0; i < n; ++i) {
            if (rng.bernoulli(q)) indices.push_back(i);
        }
    } while (indices.empty());
    return indices;
}

std::vector<std::uint32_t> classical_bootstrap(std::size_t n, Rng& rng) {
    std::vector<std::uint32_t> indices(n);
    for (auto& i : indices) i = static_cast<std::uint32_t>(rng.uniform_below(n));
    return indices;
}

namespace {

Tree train_one_tree(const Dataset& data, const VariantConfig& cfg, std::uint32_t index) {
    Rng rng(derive_seed(cfg.seed, stream::tree, index));
    const TreeBuildConfig tree_cfg = cfg.tree_config(data.task());

    if (cfg.separates_estimation()) {
        auto [structure, estimation] = structure_estimation_split(full_view(data), cfg.ratio, rng);
        return build_tree(data, structure.indices, estimation.indices, tree_cfg, rng);
    }
    const auto view = cfg.variant == VariantId::BreimanRF
                          ? classical_bootstrap(data.size(), rng)
                          : bootstrap_indices(data.size(), cfg.q, rng);
    return build_tree(data, view, {}, tree_cfg, rng);
}

}  // namespace

Forest train_forest(const Dataset& data, const VariantConfig& cfg, unsigned jobs) {
    cfg.validate(data.task());
    std::vector<Tree> trees(cfg.trees);

    if (jobs <= 1 || cfg.trees == 1) {
        for (std::uint32_t i = 0; i < cfg.trees; ++i) trees[i] = train_one_tree(data, cfg, i);
    } else {
        std::atomic<std::uint32_t> next{0};
        std::atomic<bool> failed{false};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (;;) {
                const std::uint32_t i = next.fetch_add(1);
                if (i >= cfg.trees || failed.load()) return;
                try {
                    trees[i] = train_one_tree(data, cfg, i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const unsigned count = std::min<unsigned>(jobs, cfg.trees);
        pool.reserve(count);
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    std::vector<std::string> names = data.class_names();
    return Forest(std::move(trees), cfg, data.task(), data.class_count(), data.feature_count(),
                  std::move(names));
}

void Forest::save(std::ostream& out) const {
    out << "dmrf-forest v1\n";
    out << "task " << dmrf::to_string(task_) << '\n';
    out << "features " << d_ << '\n';
    out << "classes " << classes_ << '\n';
    for (int k = 1; k <= classes_; ++k) {
        out << "class " << k << ' ' << class_names_[k - 1] << '\n';
    }
    out << "variant " << dmrf::to_string(cfg_.variant) << '\n';
    out << "trees " << cfg_.trees << '\n';
    out << "q " << detail::fmt_double(cfg_.q) << '\n';
    out << "p " << detail::fmt_double(cfg_.p) << '\n';
    out << "b1 " << detail::fmt_double(cfg_.b1) << '\n';
    out << "b2 " << detail::fmt_double(cfg_.b2) << '\n';
    out << "p1 " << detail::fmt_double(cfg_.p1) << '\n';
    out << "p2 " << detail::fmt_double(cfg_.p2) << '\n';
    out << "lambda " << detail::fmt_double(cfg_.poisson_mean) << '\n';
    out << "m " << cfg_.preselect << '\n';
    out << "kn " << cfg_.kn << '\n';
    out << "ratio " << detail::fmt_double(cfg_.ratio) << '\n';
    out << "strict_leaf " << (cfg_.strict_leaf ? 1 : 0) << '\n';
    out << "weighted_mse " << (cfg_.weighted_mse ? 1 : 0) << '\n';
    out << "seed " << cfg_.seed << '\n';
    for (std::size_t i = 0; i < trees_.size(); ++i) {
        out << "tree " << i << '\n';
        trees_[i].save(out);
    }
    out << "end\n";
}

void Forest::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    save(out);
}

namespace {

std::string expect_line(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("truncated model file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::string expect_field(std::istream& in, const std::string& key) {
    const std::string line = expect_line(in);
    if (line.size() < key.size() + 1 || line.compare(0, key.size(), key) != 0 ||
        line[key.size()] != ' ') {
        throw DataError("model file: expected '" + key + " ...', got '" + line + "'");
    }
    return line.substr(key.size() + 1);
}

double parse_double_field(std::istream& in, const std::string& key) {
    const std::string text = expect_field(in, key);
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw DataError("model file: bad value for '" + key + "': " + text);
    }
}

std::uint64_t parse_uint_field(std::istream& in, const std::string& key) {
    const std::string text = expect_field(in, key);
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw DataError("model file: bad value for '" + key + "': " + text);
    }
}

}  // namespace

Forest Forest::load(std::istream& in) {
    if (expect_line(in) != "dmrf-forest v1") throw DataError("not a dmrf model file");
    const Task task = task_from_string(expect_field(in, "task"));
    const auto d = static_cast<std::size_t>(parse_uint_field(in, "features"));
    const auto classes = static_cast<int>(parse_uint_field(in, "classes"));
    std::vector<std::string> class_names;
    for (int k = 1; k <= classes; ++k) {
        const std::string entry = expect_field(in, "class");
        const auto space = entry.find(' ');
        if (space == std::string::npos || std::atoi(entry.substr(0, space).c_str()) != k) {
            throw DataError("model file: malformed class entry '" + entry + "'");
        }
        class_names.push_back(entry.substr(space + 1));
    }

    VariantConfig cfg;
    cfg.variant = variant_from_string(expect_field(in, "variant"));
    cfg.trees = static_cast<std::uint32_t>(parse_uint_field(in, "trees"));
    cfg.q = parse_double_field(in, "q");
    cfg.p = parse_double_field(in, "p");
    cfg.b1 = parse_double_field(in, "b1");
    cfg.b2 = parse_double_field(in, "b2");
    cfg.p1 = parse_double_field(in, "p1");
    cfg.p2 = parse_double_field(in, "p2");
    cfg.poisson_mean = parse_double_field(in, "lambda");
    cfg.preselect = static_cast<std::uint32_t>(parse_uint_field(in, "m"));
    cfg.kn = static_cast<std::uint32_t>(parse_uint_field(in, "kn"));
    cfg.ratio = parse_double_field(in, "ratio");
    cfg.strict_leaf = parse_uint_field(in, "strict_leaf") != 0;
    cfg.weighted_mse = parse_uint_field(in, "weighted_mse") != 0;
    cfg.seed = parse_uint_field(in, "seed");

    std::vector<Tree> trees;
    trees.reserve(cfg.trees);
    for (std::uint32_t i = 0; i < cfg.trees; ++i) {
        const std::string marker = expect_line(in);
        if (marker != "tree " + std::to_string(i)) {
            throw DataError("model file: expected 'tree " + std::to_string(i) + "'");
        }
        trees.push_back(Tree::load(in, d, task, classes));
    }
    if (expect_line(in) != "end") throw DataError("model file: missing end marker");
    return Forest(std::move(trees), cfg, task, classes, d, std::move(class_names));
}

Forest Forest::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return load(in);
}

}  // namespace dmrf
