#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "fim/common.hpp"

namespace fim {

// Neumaier-compensated running sum; keeps reductions stable under reordering.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

inline double mean(std::span<const double> xs) {
    require(!xs.empty(), "mean: empty input");
    return compensated_sum(xs) / static_cast<double>(xs.size());
}

// Unbiased sample variance (n-1 denominator).
inline double sample_variance(std::span<const double> xs) {
    require(xs.size() >= 2, "sample_variance: need at least 2 samples");
    const double m = mean(xs);
    CompensatedSum s;
    for (double x : xs) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(xs.size() - 1);
}

inline double sample_stddev(std::span<const double> xs) { return std::sqrt(sample_variance(xs)); }

// Standard error of the sample mean.
inline double standard_error(std::span<const double> xs) {
    return sample_stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
}

// Order-statistic quantile with linear interpolation between closest ranks
// (Hyndman-Fan type 7): h = (n-1)p + 1 on 1-based ranks.
inline double empirical_quantile(std::span<const double> samples, double p) {
    require(!samples.empty(), "empirical_quantile: empty input");
    require(p > 0.0 && p < 1.0, "empirical_quantile: p must lie in (0,1)");
    std::vector<double> xs(samples.begin(), samples.end());
    std::sort(xs.begin(), xs.end());
    const auto n = xs.size();
    if (n == 1) return xs[0];
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return xs[lo] + frac * (xs[hi] - xs[lo]);
}

inline double interquartile_range(std::span<const double> xs) {
    return empirical_quantile(xs, 0.75) - empirical_quantile(xs, 0.25);
}

inline double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace fim
