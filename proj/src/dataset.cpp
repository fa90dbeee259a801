#include "dmrf/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace dmrf {

std::string to_string(Task task) {
    return task == Task::classification ? "classification" : "regression";
}

Task task_from_string(const std::string& s) {
    if (s == "classification") return Task::classification;
    if (s == "regression") return Task::regression;
    throw ConfigError("unknown task: " + s);
}

Dataset::Dataset(std::vector<double> features, std::vector<double> labels,
                 std::size_t feature_count, Task task,
                 std::vector<std::string> class_names,
                 std::vector<std::string> feature_names)
    : n_(labels.size()),
      d_(feature_count),
      features_(std::move(features)),
      labels_(std::move(labels)),
      task_(task),
      class_names_(std::move(class_names)),
      feature_names_(std::move(feature_names)) {
    if (n_ < 1 || d_ < 1) throw DataError("dataset needs at least one row and one feature");
    if (features_.size() != n_ * d_) throw DataError("feature matrix size does not match n x D");
    if (task_ == Task::classification) {
        classes_ = static_cast<int>(class_names_.size());
        if (classes_ < 1) throw DataError("classification dataset without classes");
        for (double y : labels_) {
            if (y != std::floor(y) || y < 1 || y > classes_) {
                throw DataError("class label out of range 1..c");
            }
        }
    }
}

IndexView full_view(const Dataset& data) {
    IndexView view{&data, std::vector<std::uint32_t>(data.size())};
    std::iota(view.indices.begin(), view.indices.end(), 0u);
    return view;
}

namespace {

bool is_missing_token(const std::string& cell) {
    if (cell.empty()) return true;
    return cell == "?" || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan";
}

bool parse_number(const std::string& cell, double& out) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
    if (begin == end) return false;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (first && options.has_header) {
            header = cells;
            first = false;
            continue;
        }
        first = false;
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    const std::size_t columns = rows.front().size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != columns) {
            throw DataError(path + ": row " + std::to_string(r + 1) + " has " +
                            std::to_string(rows[r].size()) + " cells, expected " +
                            std::to_string(columns));
        }
    }

    std::size_t label_col;
    if (std::holds_alternative<std::size_t>(options.label_column)) {
        label_col = std::get<std::size_t>(options.label_column);
        if (label_col >= columns) throw DataError(path + ": label column index out of range");
    } else {
        const std::string& name = std::get<std::string>(options.label_column);
        if (name == "__last__") {
            label_col = columns - 1;
        } else {
            auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) throw DataError(path + ": label column '" + name + "' not found");
            label_col = static_cast<std::size_t>(it - header.begin());
        }
    }

    const std::size_t d = columns - 1;
    if (d == 0) throw DataError(path + ": no feature columns");
    const std::size_t n = rows.size();

    // Column scan: a feature column is categorical when no non-missing cell
    // parses as a number.
    std::vector<bool> categorical(columns, false);
    for (std::size_t c = 0; c < columns; ++c) {
        if (c == label_col) continue;
        bool any_numeric = false, any_value = false;
        for (const auto& row : rows) {
            if (is_missing_token(row[c])) continue;
            any_value = true;
            double v;
            if (parse_number(row[c], v)) {
                any_numeric = true;
                break;
            }
        }
        categorical[c] = any_value && !any_numeric;
    }

    std::vector<double> features(n * d);
    std::vector<std::unordered_map<std::string, double>> codes(columns);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t out_col = 0;
        for (std::size_t c = 0; c < columns; ++c) {
            if (c == label_col) continue;
            const std::string& cell = rows[r][c];
            double v = -1.0;
            if (!is_missing_token(cell)) {
                if (categorical[c]) {
                    auto [it, inserted] = codes[c].try_emplace(cell, static_cast<double>(codes[c].size() + 1));
                    v = it->second;
                } else if (!parse_number(cell, v)) {
                    v = -1.0;
                }
            }
            features[r * d + out_col] = v;
            ++out_col;
        }
    }

    std::vector<double> labels(n);
    std::vector<std::string> class_names;
    if (options.task == Task::classification) {
        if (options.log_transform_label) {
            throw ConfigError("log-transform applies to regression labels only");
        }
        std::unordered_map<std::string, int> encoding;
        for (std::size_t r = 0; r < n; ++r) {
            const std::string& cell = rows[r][label_col];
            if (cell.empty()) throw DataError(path + ": row " + std::to_string(r + 1) + " has an empty label");
            auto [it, inserted] = encoding.try_emplace(cell, static_cast<int>(encoding.size() + 1));
            if (inserted) class_names.push_back(cell);
            labels[r] = it->second;
        }
    } else {
        for (std::size_t r = 0; r < n; ++r) {
            double y;
            if (!parse_number(rows[r][label_col], y)) {
                throw DataError(path + ": row " + std::to_string(r + 1) +
                                " has a non-numeric regression label '" + rows[r][label_col] + "'");
            }
            if (options.log_transform_label) {
                if (y <= 0.0) {
                    throw DataError(path + ": row " + std::to_string(r + 1) +
                                    " has a non-positive label; cannot log-transform");
                }
                y = std::log(y);
            }
            labels[r] = y;
        }
    }

    std::vector<std::string> feature_names;
    if (!header.empty()) {
        for (std::size_t c = 0; c < columns; ++c) {
            if (c != label_col) feature_names.push_back(header[c]);
        }
    }

    return Dataset(std::move(features), std::move(labels), d, options.task,
                   std::move(class_names), std::move(feature_names));
}

std::vector<std::vector<double>> load_feature_matrix(const std::string& path, bool has_header,
                                                     const LabelColumn* drop) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (first && has_header) {
            header = cells;
            first = false;
            continue;
        }
        first = false;
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) return {};

    const std::size_t columns = rows.front().size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != columns) {
            throw DataError(path + ": row " + std::to_string(r + 1) + " has " +
                            std::to_string(rows[r].size()) + " cells, expected " +
                            std::to_string(columns));
        }
    }

    std::size_t drop_col = columns;  // sentinel: keep everything
    if (drop) {
        if (std::holds_alternative<std::size_t>(*drop)) {
            drop_col = std::get<std::size_t>(*drop);
        } else {
            const std::string& name = std::get<std::string>(*drop);
            if (name == "__last__") {
                drop_col = columns - 1;
            } else {
                auto it = std::find(header.begin(), header.end(), name);
                if (it == header.end()) throw DataError(path + ": column '" + name + "' not found");
                drop_col = static_cast<std::size_t>(it - header.begin());
            }
        }
        if (drop_col >= columns) throw DataError(path + ": drop column index out of range");
    }

    std::vector<bool> categorical(columns, false);
    for (std::size_t c = 0; c < columns; ++c) {
        if (c == drop_col) continue;
        bool any_numeric = false, any_value = false;
        for (const auto& row : rows) {
            if (is_missing_token(row[c])) continue;
            any_value = true;
            double v;
            if (parse_number(row[c], v)) {
                any_numeric = true;
                break;
            }
        }
        categorical[c] = any_value && !any_numeric;
    }

    std::vector<std::vector<double>> matrix(rows.size());
    std::vector<std::unordered_map<std::string, double>> codes(columns);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < columns; ++c) {
            if (c == drop_col) continue;
            const std::string& cell = rows[r][c];
            double v = -1.0;
            if (!is_missing_token(cell)) {
                if (categorical[c]) {
                    auto [it, inserted] =
                        codes[c].try_emplace(cell, static_cast<double>(codes[c].size() + 1));
                    v = it->second;
                } else if (!parse_number(cell, v)) {
                    v = -1.0;
                }
            }
            matrix[r].push_back(v);
        }
    }
    return matrix;
}

void write_csv(const Dataset& data, const std::string& path, bool header) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    if (header) {
        for (std::size_t c = 0; c < data.feature_count(); ++c) {
            if (c < data.feature_names().size()) {
                out << data.feature_names()[c];
            } else {
                out << "f" << c;
            }
            out << ',';
        }
        out << "label\n";
    }
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.feature_count(); ++c) {
            out << data.x(r, c) << ',';
        }
        if (data.task() == Task::classification) {
            out << data.class_name(data.class_label(r));
        } else {
            out << data.label(r);
        }
        out << '\n';
    }
}

std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>>
kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n) throw ConfigError("kfold needs 2 <= k <= n");

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(derive_seed(seed, stream::fold));
    rng.shuffle(order);

    std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> result(k);
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        auto& [train, test] = result[f];
        test.assign(order.begin() + pos, order.begin() + pos + size);
        train.reserve(n - size);
        train.insert(train.end(), order.begin(), order.begin() + pos);
        train.insert(train.end(), order.begin() + pos + size, order.end());
        std::sort(test.begin(), test.end());
        std::sort(train.begin(), train.end());
        pos += size;
    }
    return result;
}

std::pair<IndexView, IndexView>
structure_estimation_split(const IndexView& view, double ratio, Rng& rng) {
    if (view.size() < 2) throw ConfigError("structure/estimation split needs at least 2 indices");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("ratio must lie in (0, 1)");

    // Round half up; the remainder goes to the structure part.
    const auto structure_size =
        static_cast<std::size_t>(std::floor(ratio * static_cast<double>(view.size()) + 0.5));
    if (structure_size == 0 || structure_size == view.size()) {
        throw ConfigError("structure/estimation split would leave an empty part");
    }

    std::vector<std::uint32_t> order = view.indices;
    rng.shuffle(order);
    IndexView structure{view.dataset, {order.begin(), order.begin() + structure_size}};
    IndexView estimation{view.dataset, {order.begin() + structure_size, order.end()}};
    return {std::move(structure), std::move(estimation)};
}

}  // namespace dmrf
