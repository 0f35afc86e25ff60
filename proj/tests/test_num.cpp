#include <doctest.h>

#include <cmath>
#include <vector>

#include "polymerlab/num.hpp"
#include "polymerlab/quadrature.hpp"

using namespace polymerlab;

TEST_CASE("LogValue round-trips through log and value") {
    LogValue v{10.0, 0.5};
    CHECK(v.log() == doctest::Approx(10.0 + std::log(0.5)).epsilon(1e-15));
    CHECK(v.value() == doctest::Approx(std::exp(10.0) * 0.5).epsilon(1e-15));
    CHECK(LogValue::one().value() == 1.0);
}

TEST_CASE("log_sum_exp agrees with direct summation in range") {
    std::vector<double> logs{-1.0, 0.5, 2.0, 2.0};
    double direct = std::log(std::exp(-1.0) + std::exp(0.5) + 2 * std::exp(2.0));
    CHECK(log_sum_exp(logs) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("log_sum_exp survives huge offsets") {
    std::vector<double> logs{1000.0, 1000.0 + std::log(2.0)};
    CHECK(log_sum_exp(logs) == doctest::Approx(1000.0 + std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("inverse normal CDF hits standard quantiles") {
    CHECK(inv_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(inv_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-8));
    CHECK(inv_normal_cdf(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-8));
    // round trip against the erfc-based tail on a grid
    for (double x = -5.0; x <= 5.0; x += 0.25) {
        double u = 1.0 - normal_upper_tail(x);
        CHECK(inv_normal_cdf(u) == doctest::Approx(x).epsilon(2e-8));
    }
}

TEST_CASE("normal upper tail basics") {
    CHECK(normal_upper_tail(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_upper_tail(1.0) == doctest::Approx(0.15865525393145705).epsilon(1e-13));
}

TEST_CASE("adaptive quadrature integrates smooth functions to tolerance") {
    double v = integrate([](double x) { return std::exp(-x * x); }, 0.0, 5.0);
    CHECK(v == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-12));
    double t = integrate_tail([](double x) { return std::exp(-x); }, 2.0);
    CHECK(t == doctest::Approx(std::exp(-2.0)).epsilon(1e-11));
}
