#include "dmrf/impurity.hpp"

#include <cmath>

namespace dmrf {

double gini(std::span<const std::uint32_t> class_counts) {
    std::uint64_t total = 0;
    for (auto c : class_counts) total += c;
    if (total == 0) throw std::invalid_argument("gini of an empty node");
    double sum_sq = 0.0;
    for (auto c : class_counts) {
        const double f = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += f * f;
    }
    return 1.0 - sum_sq;
}

double mse(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mse of an empty node");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(values.size());
}

namespace {
std::uint64_t total_of(std::span<const std::uint32_t> counts) {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}
}  // namespace

double gini_reduction(std::span<const std::uint32_t> parent,
                      std::span<const std::uint32_t> left,
                      std::span<const std::uint32_t> right) {
    const auto np = total_of(parent), nl = total_of(left), nr = total_of(right);
    if (nl == 0 || nr == 0) throw std::invalid_argument("gini_reduction with an empty child");
    const double wl = static_cast<double>(nl) / static_cast<double>(np);
    const double wr = static_cast<double>(nr) / static_cast<double>(np);
    const double red = gini(parent) - wl * gini(left) - wr * gini(right);
    // Concavity guarantees red >= 0; clamp float dust.
    return (red < 0.0 && red > -1e-9) ? 0.0 : red;
}

double mse_reduction(std::span<const double> parent,
                     std::span<const double> left,
                     std::span<const double> right,
                     bool weighted) {
    if (left.empty() || right.empty()) throw std::invalid_argument("mse_reduction with an empty child");
    if (!weighted) return mse(parent) - mse(left) - mse(right);
    const double wl = static_cast<double>(left.size()) / static_cast<double>(parent.size());
    const double wr = static_cast<double>(right.size()) / static_cast<double>(parent.size());
    const double red = mse(parent) - wl * mse(left) - wr * mse(right);
    return (red < 0.0 && red > -1e-9) ? 0.0 : red;
}

}  // namespace dmrf
