#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace causalq {

/// log(sum_i exp(xs[i])) with running-max stabilization.
/// Empty input yields -inf.
inline double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    double m = xs[0];
    for (double x : xs)
        if (x > m) m = x;
    if (std::isinf(m) && m < 0) return m;  // all -inf
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

inline double log_sum_exp(const std::vector<double>& xs) {
    return log_sum_exp(std::span<const double>(xs));
}

/// Streaming log-sum-exp accumulator. Supports merging partial
/// accumulators, which keeps chunked parallel reductions deterministic
/// when partials are merged in a fixed order.
class LogSumAccumulator {
public:
    void add(double x) {
        if (x <= max_) {
            sum_ += std::exp(x - max_);
        } else {
            if (std::isfinite(max_) || sum_ > 0.0) sum_ = sum_ * std::exp(max_ - x) + 1.0;
            else sum_ = 1.0;
            max_ = x;
        }
    }

    void merge(const LogSumAccumulator& other) {
        if (other.empty()) return;
        if (empty()) { *this = other; return; }
        if (other.max_ <= max_) {
            sum_ += other.sum_ * std::exp(other.max_ - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
            max_ = other.max_;
        }
    }

    bool empty() const { return sum_ == 0.0 && !std::isfinite(max_); }

    double value() const {
        if (empty()) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

/// Pearson correlation coefficient of two equal-length samples.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mx += xs[i]; my += ys[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace causalq
