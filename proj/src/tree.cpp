#include "dmrf/tree.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "dmrf/error.hpp"
#include "text_io.hpp"

namespace dmrf {

Tree::Tree(std::vector<TreeNode> nodes, std::size_t feature_count, Task task, int classes)
    : nodes_(std::move(nodes)), d_(feature_count), task_(task), classes_(classes) {}

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
    if (x.size() != d_) throw DataError("query has wrong dimension");
    const TreeNode* node = &nodes_[0];
    while (!node->is_leaf) {
        node = &nodes_[x[node->feature] <= node->threshold ? node->left : node->right];
    }
    return *node;
}

int Tree::predict_class(std::span<const double> x) const { return leaf_for(x).leaf.label; }

double Tree::predict_value(std::span<const double> x) const { return leaf_for(x).leaf.mean; }

bool operator==(const TreeNode& a, const TreeNode& b) {
    if (a.is_leaf != b.is_leaf) return false;
    if (a.is_leaf) {
        return a.leaf.votes == b.leaf.votes && a.leaf.label == b.leaf.label &&
               a.leaf.mean == b.leaf.mean && a.leaf.count == b.leaf.count;
    }
    return a.feature == b.feature && a.threshold == b.threshold && a.left == b.left &&
           a.right == b.right;
}

bool operator==(const Tree& a, const Tree& b) {
    return a.d_ == b.d_ && a.task_ == b.task_ && a.classes_ == b.classes_ && a.nodes_ == b.nodes_;
}

void Tree::save(std::ostream& out) const {
    for (const auto& node : nodes_) {
        if (!node.is_leaf) {
            out << "s " << node.feature << ' ' << detail::fmt_double(node.threshold) << '\n';
        } else if (task_ == Task::classification) {
            out << "l " << node.leaf.label << ' ' << node.leaf.count;
            for (double v : node.leaf.votes) out << ' ' << detail::fmt_double(v);
            out << '\n';
        } else {
            out << "v " << detail::fmt_double(node.leaf.mean) << ' ' << node.leaf.count << '\n';
        }
    }
}

namespace {

// Preorder reader: a split line is followed by its left then right subtree.
std::int32_t read_node(std::istream& in, std::vector<TreeNode>& nodes, Task task, int classes) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("truncated tree");
    std::istringstream ls(line);
    char tag;
    if (!(ls >> tag)) throw DataError("empty tree line");

    const auto index = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    if (tag == 's') {
        TreeNode node;
        node.is_leaf = false;
        if (!(ls >> node.feature >> node.threshold)) throw DataError("malformed split line");
        node.left = read_node(in, nodes, task, classes);
        node.right = read_node(in, nodes, task, classes);
        nodes[index] = std::move(node);
    } else if (tag == 'l') {
        if (task != Task::classification) throw DataError("classification leaf in a regression tree");
        TreeNode node;
        if (!(ls >> node.leaf.label >> node.leaf.count)) throw DataError("malformed leaf line");
        node.leaf.votes.resize(classes);
        for (auto& v : node.leaf.votes) {
            if (!(ls >> v)) throw DataError("leaf vote vector shorter than class count");
        }
        nodes[index] = std::move(node);
    } else if (tag == 'v') {
        if (task != Task::regression) throw DataError("regression leaf in a classification tree");
        TreeNode node;
        if (!(ls >> node.leaf.mean >> node.leaf.count)) throw DataError("malformed leaf line");
        nodes[index] = std::move(node);
    } else {
        throw DataError(std::string("unknown tree node tag '") + tag + "'");
    }
    return index;
}

}  // namespace

Tree Tree::load(std::istream& in, std::size_t feature_count, Task task, int classes) {
    std::vector<TreeNode> nodes;
    read_node(in, nodes, task, classes);
    return Tree(std::move(nodes), feature_count, task, classes);
}

LeafPayload leaf_label_classification(const Dataset& data, std::span<const std::uint32_t> rows) {
    if (rows.empty()) throw std::invalid_argument("empty leaf");
    LeafPayload payload;
    payload.count = static_cast<std::uint32_t>(rows.size());
    payload.votes.assign(data.class_count(), 0.0);
    for (auto r : rows) payload.votes[data.class_label(r) - 1] += 1.0;
    for (auto& v : payload.votes) v /= static_cast<double>(rows.size());
    // argmax; ties go to the lowest label
    std::size_t best = 0;
    for (std::size_t k = 1; k < payload.votes.size(); ++k) {
        if (payload.votes[k] > payload.votes[best]) best = k;
    }
    payload.label = static_cast<int>(best) + 1;
    return payload;
}

double leaf_label_regression(const Dataset& data, std::span<const std::uint32_t> rows) {
    if (rows.empty()) throw std::invalid_argument("empty leaf");
    double sum = 0.0;
    for (auto r : rows) sum += data.label(r);
    return sum / static_cast<double>(rows.size());
}

int mrf_se_leaf_label(std::span<const double> votes, Rng& rng) {
    return static_cast<int>(sample_categorical(votes, rng)) + 1;
}

namespace {

struct TreeBuilder {
    const Dataset& data;
    const TreeBuildConfig& cfg;
    Rng& rng;
    std::vector<TreeNode> nodes;

    bool pure(std::span<const std::uint32_t> rows) const {
        const double first = data.label(rows[0]);
        return std::all_of(rows.begin(), rows.end(),
                           [&](std::uint32_t r) { return data.label(r) == first; });
    }

    std::optional<SplitPoint> choose_split(std::span<const std::uint32_t> rows) {
        const NodeView node{&data, rows};
        const std::uint32_t min_child = cfg.strict_leaf ? cfg.min_node_size : 1;
        const auto& s = cfg.strategy;
        switch (s.variant) {
            case SplitVariant::best: {
                const auto subspace = rng.sample_without_replacement(
                    static_cast<std::uint32_t>(data.feature_count()),
                    subspace_size(data.feature_count()));
                return best_split(node, subspace, min_child, s.weighted_mse);
            }
            case SplitVariant::dmrf: {
                const auto subspace = rng.sample_without_replacement(
                    static_cast<std::uint32_t>(data.feature_count()),
                    subspace_size(data.feature_count()));
                return dmrf_split(node, subspace, s, min_child, rng);
            }
            case SplitVariant::mrf:
                return mrf_split(node, s, min_child, rng);
            case SplitVariant::brf:
                return brf_split(node, s, min_child, rng);
            case SplitVariant::denil14:
                return denil14_split(node, s, min_child, rng);
        }
        return std::nullopt;
    }

    std::int32_t make_leaf(std::span<const std::uint32_t> train,
                           std::span<const std::uint32_t> estimation) {
        // SE mode labels leaves from estimation samples; when none reach the
        // leaf, fall back to the training rows.
        const auto rows = (cfg.se_mode && !estimation.empty()) ? estimation : train;
        TreeNode node;
        if (data.task() == Task::classification) {
            node.leaf = leaf_label_classification(data, rows);
            if (cfg.sampled_leaf_label) {
                node.leaf.label = mrf_se_leaf_label(node.leaf.votes, rng);
            }
        } else {
            node.leaf.mean = leaf_label_regression(data, rows);
            node.leaf.count = static_cast<std::uint32_t>(rows.size());
        }
        const auto index = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(std::move(node));
        return index;
    }

    std::int32_t build(std::vector<std::uint32_t> train, std::vector<std::uint32_t> estimation) {
        if (train.size() < cfg.min_node_size || pure(train)) {
            return make_leaf(train, estimation);
        }
        const auto split = choose_split(train);
        if (!split) return make_leaf(train, estimation);

        auto partition = [&](const std::vector<std::uint32_t>& rows,
                             std::vector<std::uint32_t>& left, std::vector<std::uint32_t>& right) {
            for (auto r : rows) {
                (data.x(r, split->feature) <= split->threshold ? left : right).push_back(r);
            }
        };
        std::vector<std::uint32_t> train_l, train_r, est_l, est_r;
        partition(train, train_l, train_r);
        partition(estimation, est_l, est_r);

        const auto index = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        nodes[index].is_leaf = false;
        nodes[index].feature = split->feature;
        nodes[index].threshold = split->threshold;
        const auto left = build(std::move(train_l), std::move(est_l));
        const auto right = build(std::move(train_r), std::move(est_r));
        nodes[index].left = left;
        nodes[index].right = right;
        return index;
    }
};

}  // namespace

Tree build_tree(const Dataset& data, std::span<const std::uint32_t> train,
                std::span<const std::uint32_t> estimation,
                const TreeBuildConfig& cfg, Rng& rng) {
    if (train.empty()) throw std::invalid_argument("empty training view");
    if (cfg.min_node_size < 1) throw ConfigError("k_n must be >= 1");

    TreeBuilder builder{data, cfg, rng, {}};
    builder.build({train.begin(), train.end()}, {estimation.begin(), estimation.end()});
    return Tree(std::move(builder.nodes), data.feature_count(), data.task(), data.class_count());
}

}  // namespace dmrf
