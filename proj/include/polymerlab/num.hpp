#ifndef POLYMERLAB_NUM_HPP
#define POLYMERLAB_NUM_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace polymerlab {

// A positive real stored as e^{log_scale} * mantissa.  The DP renormalizes
// so that mantissas stay O(1) even when the raw value spans hundreds of
// orders of magnitude.
struct LogValue {
    double log_scale = 0.0;
    double mantissa = 1.0;

    double log() const { return log_scale + std::log(mantissa); }
    double value() const { return std::exp(log_scale) * mantissa; }

    static LogValue one() { return {0.0, 1.0}; }

    bool operator<(double t) const { return log() < std::log(t); }
    bool operator>=(double t) const { return !(*this < t); }
};

inline double log_sum_exp(const std::vector<double>& args) {
    double m = -std::numeric_limits<double>::infinity();
    for (double a : args) m = std::max(m, a);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double a : args) s += std::exp(a - m);
    return m + std::log(s);
}

// Acklam's rational approximation of the standard normal quantile.
// Relative error ~1.15e-9, monotone, branch structure cheap enough for the
// lattice hot loop.
inline double inv_normal_cdf(double u) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double u_low = 0.02425;
    if (u < u_low) {
        double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - u_low) {
        double q = std::sqrt(-2.0 * std::log(1.0 - u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = u - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace polymerlab

#endif
