#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace dmrf {

/// Gini index of a node given per-class counts: 1 - sum((count_k/total)^2).
double gini(std::span<const std::uint32_t> class_counts);

/// Mean squared deviation from the sample mean.
double mse(std::span<const double> values);

/// Size-weighted Gini reduction of a split:
/// gini(parent) - |L|/|P| * gini(L) - |R|/|P| * gini(R). Never negative;
/// float dust below zero is clamped.
double gini_reduction(std::span<const std::uint32_t> parent,
                      std::span<const std::uint32_t> left,
                      std::span<const std::uint32_t> right);

/// MSE reduction of a split. The default form is unweighted,
/// mse(parent) - mse(L) - mse(R), and may be negative; the weighted form
/// mirrors the Gini version and is nonnegative.
double mse_reduction(std::span<const double> parent,
                     std::span<const double> left,
                     std::span<const double> right,
                     bool weighted = false);

}  // namespace dmrf
