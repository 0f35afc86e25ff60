#ifndef POLYMERLAB_STATS_HPP
#define POLYMERLAB_STATS_HPP

#include <cmath>
#include <cstdint>

namespace polymerlab {

// z for two-sided 99% normal intervals, the CI convention of every lab.
inline constexpr double kCiZ = 2.5758293035489004;

struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    int64_t count = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++count;
    }
    void merge(const Accumulator& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        count += o.count;
    }
    double mean() const { return count > 0 ? sum / double(count) : 0.0; }
    double variance() const {
        if (count < 2) return 0.0;
        double m = mean();
        double v = (sum_sq - double(count) * m * m) / double(count - 1);
        return v > 0.0 ? v : 0.0;
    }
    double stderr_mean() const {
        return count > 0 ? std::sqrt(variance() / double(count)) : 0.0;
    }
    double ci_half_width() const { return kCiZ * stderr_mean(); }
};

struct Interval {
    double lo = 0.0, hi = 0.0;
};

// Wilson score interval for a binomial proportion at the 99% level.
inline Interval wilson_interval(int64_t hits, int64_t trials) {
    if (trials <= 0) return {0.0, 1.0};
    double z = kCiZ, n = double(trials), p = double(hits) / n;
    double denom = 1.0 + z * z / n;
    double center = (p + z * z / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    return {std::fmax(0.0, center - half), std::fmin(1.0, center + half)};
}

}  // namespace polymerlab

#endif
