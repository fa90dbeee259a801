#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dmrf/error.hpp"
#include "dmrf/rng.hpp"

namespace dmrf {

enum class Task { classification, regression };

std::string to_string(Task task);
Task task_from_string(const std::string& s);

/// Immutable numeric sample matrix with labels. Classification labels are
/// contiguous integers 1..c (original strings kept for output mapping);
/// regression labels are raw (optionally log-transformed) target values.
class Dataset {
public:
    Dataset(std::vector<double> features, std::vector<double> labels,
            std::size_t feature_count, Task task,
            std::vector<std::string> class_names = {},
            std::vector<std::string> feature_names = {});

    std::size_t size() const { return n_; }
    std::size_t feature_count() const { return d_; }
    Task task() const { return task_; }
    int class_count() const { return classes_; }

    double x(std::size_t row, std::size_t col) const { return features_[row * d_ + col]; }
    std::span<const double> row(std::size_t r) const { return {features_.data() + r * d_, d_}; }
    double label(std::size_t row) const { return labels_[row]; }
    int class_label(std::size_t row) const { return static_cast<int>(labels_[row]); }

    const std::vector<std::string>& class_names() const { return class_names_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    /// Original string for encoded class k in 1..c.
    const std::string& class_name(int k) const { return class_names_[static_cast<std::size_t>(k) - 1]; }

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> features_;  // row-major n x d
    std::vector<double> labels_;
    Task task_ = Task::classification;
    int classes_ = 0;
    std::vector<std::string> class_names_;
    std::vector<std::string> feature_names_;
};

/// A subset (possibly with repeats) of a dataset's rows.
struct IndexView {
    const Dataset* dataset = nullptr;
    std::vector<std::uint32_t> indices;

    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
};

IndexView full_view(const Dataset& data);

/// Label column is either a 0-based position or a header name.
using LabelColumn = std::variant<std::size_t, std::string>;

struct LoadOptions {
    LabelColumn label_column = std::string("__last__");  // sentinel: last column
    bool has_header = false;
    bool log_transform_label = false;
    Task task = Task::classification;
};

/// Reads a delimited text file into a Dataset.
///
/// Missing cells (empty, "?", "NA", "NaN") become -1.0. A feature column
/// whose every non-missing cell fails numeric parsing is treated as
/// categorical and ordinal-encoded by first appearance (1, 2, ...); stray
/// non-numeric cells in otherwise numeric columns are treated as missing.
/// Classification labels are re-encoded to 1..c preserving first appearance.
Dataset load_csv(const std::string& path, const LoadOptions& options = {});

/// Writes a dataset back to CSV, label last. Classification labels are
/// written as their original strings. load_csv(write_csv(d)) == d.
void write_csv(const Dataset& data, const std::string& path, bool header = false);

/// Feature-only CSV reader for prediction inputs, with the same cell rules
/// as load_csv. `drop` names a column to ignore (e.g. a label column still
/// present in the file). An empty file yields an empty matrix.
std::vector<std::vector<double>> load_feature_matrix(const std::string& path, bool has_header,
                                                     const LabelColumn* drop = nullptr);

/// k test sets that partition [0, n) with sizes differing by at most one;
/// train sets are the complements. Deterministic per seed.
std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>>
kfold(std::size_t n, std::size_t k, std::uint64_t seed);

/// Random disjoint split of a view into a structure part of
/// round(ratio * size) indices (round half up) and the estimation remainder.
std::pair<IndexView, IndexView>
structure_estimation_split(const IndexView& view, double ratio, Rng& rng);

}  // namespace dmrf
