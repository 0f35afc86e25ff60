#include <doctest.h>

#include <cmath>
#include <vector>

#include "polymerlab/env_model.hpp"
#include "polymerlab/overshoot_lab.hpp"

using namespace polymerlab;

namespace {

const EnvironmentSpec kGauss(Gaussian{0.0, 1.0}, 4.0);
// Y atoms {1/2 w.p. 7/8, 9/2 w.p. 1/8} at beta=1
const EnvironmentSpec kAtomY(TwoPoint{0.0, std::log(9.0), 1.0 / 8.0}, 8.0);

}  // namespace

TEST_CASE("count_exceedances") {
    CHECK(count_exceedances({0.5, 0.5}, {3.0, 1.0}, 1.0) == 1);
    CHECK(count_exceedances({0.5, 0.5}, {1.5, 1.9}, 1.0) == 0);
    CHECK(count_exceedances({1.0 / 3, 1.0 / 3, 1.0 / 3}, {6.0, 6.0, 6.0}, 1.0) == 3);
}

TEST_CASE("exceedance moments: single weight is 0/1 valued") {
    auto y = y_sampler(kGauss, 0.8);
    OvershootStats st = exceedance_moments(y, {1.0}, 1.5, 200000, 11);
    CHECK(!st.inconclusive);
    CHECK(st.n_mean_cond.estimate == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.n_sq_cond.estimate == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.n_mean.estimate <= 1.0 / 1.5 + 3 * (st.n_mean.ci_hi - st.n_mean.estimate));
}

TEST_CASE("exceedance moments: two-atom pair matches the 4-outcome enumeration") {
    // alpha*Y in {1/4, 9/4}; exceeds A=1 iff the high atom (prob 1/8) shows
    auto y = y_sampler(kAtomY, 1.0);
    OvershootStats st = exceedance_moments(y, {0.5, 0.5}, 1.0, 400000, 21);
    double q = 1.0 / 8.0;
    double p1 = 2 * q * (1 - q), p2 = q * q, pc = p1 + p2;
    CHECK(!st.inconclusive);
    CHECK(std::fabs(st.n_mean.estimate - 2 * q) <=
          3 * (st.n_mean.ci_hi - st.n_mean.estimate));
    CHECK(std::fabs(st.n_mean_cond.estimate - (p1 + 2 * p2) / pc) <=
          3 * (st.n_mean_cond.ci_hi - st.n_mean_cond.estimate));
    CHECK(std::fabs(st.n_sq_cond.estimate - (p1 + 4 * p2) / pc) <=
          3 * (st.n_sq_cond.ci_hi - st.n_sq_cond.estimate));
}

TEST_CASE("exceedance bounds hold on Gaussian profiles") {
    auto y = y_sampler(kGauss, 0.8);
    for (int m : {2, 8, 32}) {
        std::vector<double> w(m, 1.0 / m);
        for (double A : {1.0, 2.0}) {
            OvershootStats st = exceedance_moments(y, w, A, 100000, 31 + m);
            if (st.inconclusive) continue;
            CHECK(exceedance_bounds_hold(st));
        }
    }
}

TEST_CASE("convex overshoot: enumeration oracle and N-split") {
    auto y = y_sampler(kAtomY, 1.0);
    auto stats = simulate_convex_overshoot(y, {0.5, 0.5}, {2.0}, {2.0}, 400000, 9);
    REQUIRE(stats.size() == 1);
    const OvershootStats& st = stats[0];
    // S in {1/2, 5/2, 9/2}; P(S>2) = 2*(7/64)+1/64 = 15/64
    double pc = 15.0 / 64.0;
    double exact = (14 * 6.25 + 20.25) / 15.0 / 4.0;
    CHECK(std::fabs(st.conditioning_prob.estimate - pc) <=
          3 * (st.conditioning_prob.ci_hi - st.conditioning_prob.estimate) + 1e-12);
    CHECK(std::fabs(st.ratio.estimate - exact) <=
          3 * (st.ratio.ci_hi - st.ratio.estimate));
    // every S > 2 outcome contains the high atom, which itself exceeds A
    CHECK(st.split_n0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(st.split_n0 + st.split_n1 == doctest::Approx(st.ratio.estimate).epsilon(1e-12));
    CHECK(st.truncation_violations == 0);
}

TEST_CASE("truncation bound never fails across profiles") {
    auto y = y_sampler(kGauss, 0.8);
    for (int m : {1, 2, 8}) {
        std::vector<double> w(m, 1.0 / m);
        auto stats = simulate_convex_overshoot(y, w, {1.0, 2.0}, {1.0, 4.0}, 100000, 17);
        for (const auto& st : stats) CHECK(st.truncation_violations == 0);
    }
}

TEST_CASE("martingale overshoot: ratios >= 1, identity check, determinism") {
    std::vector<double> t_grid = {1.3, 1.8};
    std::vector<double> p_grid = {1.0, 2.0};
    OvershootTable a = martingale_overshoot_experiment(kGauss, 0.4, 2, t_grid, p_grid, 40,
                                                       300, 77, 2.0, 1);
    OvershootTable b = martingale_overshoot_experiment(kGauss, 0.4, 2, t_grid, p_grid, 40,
                                                       300, 77, 2.0, 4);
    REQUIRE(!a.aggregated.empty());
    for (const auto& row : a.aggregated)
        if (row.hits > 0) CHECK(row.ratio >= 1.0 - 1e-12);
    for (const auto& row : a.per_k)
        if (row.hits > 0) CHECK(row.ratio >= 1.0 - 1e-12);
    CHECK(a.max_identity_error <= 1e-12);
    // workers must not change a single byte of the table
    REQUIRE(a.per_k.size() == b.per_k.size());
    for (std::size_t i = 0; i < a.per_k.size(); ++i) {
        CHECK(a.per_k[i].ratio == b.per_k[i].ratio);
        CHECK(a.per_k[i].hits == b.per_k[i].hits);
    }
    CHECK(a.max_identity_error == b.max_identity_error);
}

TEST_CASE("moment trace: p=1 near one, p=2 matches the exact oracle") {
    auto rows = moment_trace(kGauss, 0.3, 3, {1.0, 2.0}, {2, 5, 8}, 3000, 13, 1);
    for (const auto& r : rows) {
        double half = (r.ci_hi - r.estimate);
        if (r.p == 1.0) CHECK(std::fabs(r.estimate - 1.0) <= 4 * half / 2.5758293035489004 * 4);
        if (r.p == 2.0) {
            REQUIRE(r.exact_if_p2.has_value());
            double se = half / 2.5758293035489004;
            CHECK(std::fabs(r.estimate - *r.exact_if_p2) <= 4 * se);
        }
    }
}

TEST_CASE("moment trace grows in d=1 strong disorder") {
    auto rows = moment_trace(kGauss, 1.0, 1, {2.0}, {5, 25}, 20000, 19, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].estimate > 2 * rows[0].estimate);
    CHECK(*rows[1].exact_if_p2 > 2 * *rows[0].exact_if_p2);
}
