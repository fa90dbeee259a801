#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dmrf/dataset.hpp"
#include "dmrf/rng.hpp"
#include "dmrf/split.hpp"

namespace dmrf {

/// Per-leaf prediction record: class-vote fractions plus the recorded label
/// (classification) or the sample mean (regression), and the count of
/// samples it was computed from.
struct LeafPayload {
    std::vector<double> votes;  // size c, fractions summing to 1
    int label = 0;
    double mean = 0.0;
    std::uint32_t count = 0;
};

struct TreeNode {
    bool is_leaf = true;
    std::uint32_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    LeafPayload leaf;
};

struct TreeBuildConfig {
    SplitStrategyConfig strategy;
    std::uint32_t min_node_size = 5;  // k_n: nodes below this never split
    bool se_mode = false;        // split on structure rows, label from estimation rows
    bool strict_leaf = false;    // reject splits that would leave a child below k_n
    bool sampled_leaf_label = false;  // leaf label drawn from the vote multinomial
};

class Tree {
public:
    Tree() = default;
    Tree(std::vector<TreeNode> nodes, std::size_t feature_count, Task task, int classes);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t feature_count() const { return d_; }
    Task task() const { return task_; }
    int class_count() const { return classes_; }

    const TreeNode& leaf_for(std::span<const double> x) const;
    int predict_class(std::span<const double> x) const;
    double predict_value(std::span<const double> x) const;

    /// Nested text form, one node per line in preorder.
    void save(std::ostream& out) const;
    static Tree load(std::istream& in, std::size_t feature_count, Task task, int classes);

    friend bool operator==(const Tree&, const Tree&);

private:
    std::vector<TreeNode> nodes_;  // nodes_[0] is the root
    std::size_t d_ = 0;
    Task task_ = Task::classification;
    int classes_ = 0;
};

bool operator==(const TreeNode&, const TreeNode&);

/// Vote fractions and majority label (ties go to the lowest label).
LeafPayload leaf_label_classification(const Dataset& data, std::span<const std::uint32_t> rows);

/// Arithmetic mean of the rows' targets.
double leaf_label_regression(const Dataset& data, std::span<const std::uint32_t> rows);

/// Label drawn once from the vote multinomial; the leaf is deterministic
/// afterwards.
int mrf_se_leaf_label(std::span<const double> votes, Rng& rng);

/// Grows a binary tree. A node becomes a leaf when its training count drops
/// below k_n, it is label-pure, or the split strategy finds nothing
/// splittable. In se_mode the split decisions see only `train`, while leaf
/// payloads come from `estimation` routed down the same tree (falling back to
/// the training rows when no estimation sample reaches a leaf); otherwise
/// pass an empty estimation view.
Tree build_tree(const Dataset& data, std::span<const std::uint32_t> train,
                std::span<const std::uint32_t> estimation,
                const TreeBuildConfig& cfg, Rng& rng);

}  // namespace dmrf
