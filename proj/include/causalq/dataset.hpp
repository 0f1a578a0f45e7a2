#pragma once

#include <string>
#include <vector>

#include "causalq/errors.hpp"

namespace causalq {

/// An n x d sample matrix with named variables, stored column-major so the
/// per-column dot products in scoring stream contiguously.
struct Dataset {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // d columns of length n

    int num_vars() const { return static_cast<int>(columns.size()); }
    int num_samples() const { return columns.empty() ? 0 : static_cast<int>(columns[0].size()); }

    /// Checks rectangular shape, finiteness, and n >= d + 2 (OLS with any
    /// parent set plus intercept must stay determined).
    void validate() const;
};

/// Rescales every column to zero mean and unit (population) variance,
/// in place. Kept as an explicit preprocessing step; scoring itself is
/// invariant to per-column scaling.
void standardize(Dataset& data);

double column_mean(const std::vector<double>& column);
double column_variance(const std::vector<double>& column);  // population (1/n)

}  // namespace causalq
