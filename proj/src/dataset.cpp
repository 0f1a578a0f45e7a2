#include "causalq/dataset.hpp"

#include <cmath>

namespace causalq {

void Dataset::validate() const {
    const int d = num_vars();
    const int n = num_samples();
    if (static_cast<int>(names.size()) != d)
        throw DimensionMismatch("Dataset: names/columns size mismatch");
    for (int j = 0; j < d; ++j) {
        if (static_cast<int>(columns[j].size()) != n)
            throw DimensionMismatch("Dataset: column " + std::to_string(j) + " has ragged length");
        for (int t = 0; t < n; ++t)
            if (!std::isfinite(columns[j][t]))
                throw NonFiniteValue("Dataset: non-finite value at row " + std::to_string(t) +
                                     ", column " + std::to_string(j));
    }
    if (n < d + 2)
        throw TooFewSamples("Dataset: need n >= d + 2, got n = " + std::to_string(n) +
                            ", d = " + std::to_string(d));
}

double column_mean(const std::vector<double>& column) {
    double s = 0.0;
    for (double x : column) s += x;
    return s / static_cast<double>(column.size());
}

double column_variance(const std::vector<double>& column) {
    const double m = column_mean(column);
    double s = 0.0;
    for (double x : column) s += (x - m) * (x - m);
    return s / static_cast<double>(column.size());
}

void standardize(Dataset& data) {
    for (auto& col : data.columns) {
        const double m = column_mean(col);
        const double sd = std::sqrt(column_variance(col));
        const double scale = sd > 0.0 ? 1.0 / sd : 1.0;  // constant column: only center
        for (double& x : col) x = (x - m) * scale;
    }
}

}  // namespace causalq
