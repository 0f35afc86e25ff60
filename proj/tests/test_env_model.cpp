#include <doctest.h>

#include <cmath>
#include <vector>

#include "polymerlab/cone.hpp"
#include "polymerlab/env_model.hpp"
#include "polymerlab/num.hpp"
#include "polymerlab/quadrature.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/stats.hpp"

using namespace polymerlab;

namespace {

std::vector<EnvironmentSpec> battery() {
    return {
        EnvironmentSpec(Gaussian{0.0, 1.0}, 4.0),
        EnvironmentSpec(TwoPoint{-1.0, 1.0, 0.5}, 8.0),
        EnvironmentSpec(Poisson{1.0}, 4.0),
        EnvironmentSpec(Weibull{1.0, 2.0, 1.0}, 4.0),
        EnvironmentSpec(GumbelNeg{0.0, 1.0}, 4.0),
        EnvironmentSpec(SquaresLattice{2.0}, 1.5),
    };
}

}  // namespace

TEST_CASE("log_mgf closed forms") {
    EnvironmentSpec g(Gaussian{0.0, 1.0}, 4.0);
    CHECK(log_mgf(g, 0.5) == doctest::Approx(0.125).epsilon(1e-14));
    for (const auto& spec : battery())
        CHECK(log_mgf(spec, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    // Poisson series oracle
    EnvironmentSpec p(Poisson{1.0}, 4.0);
    double series = 0.0, logfac = 0.0;
    for (int k = 0; k < 200; ++k) {
        if (k > 0) logfac += std::log(double(k));
        series += std::exp(k * 1.0 - 1.0 - logfac);
    }
    CHECK(log_mgf(p, 1.0) == doctest::Approx(std::log(series)).epsilon(1e-12));
    CHECK(log_mgf(p, 1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("log_mgf by independent quadrature for tail-defined families") {
    // Gaussian: integrate e^{beta x} phi(x) over R
    EnvironmentSpec g(Gaussian{0.0, 1.0}, 4.0);
    auto integrand = [](double x) {
        return std::exp(0.7 * x) * std::exp(-x * x / 2) / std::sqrt(2 * M_PI);
    };
    double direct = integrate(integrand, -12.0, 12.0, 1e-13);
    CHECK(log_mgf(g, 0.7) == doctest::Approx(std::log(direct)).epsilon(1e-11));
    // Weibull / GumbelNeg: lambda defined through the tail; cross-check with
    // E[e^{beta w}] = integral of beta e^{beta x} P(w > x) plus boundary mass
    for (const auto& spec : {EnvironmentSpec(Weibull{1.0, 2.0, 1.0}, 4.0),
                             EnvironmentSpec(GumbelNeg{0.0, 1.0}, 4.0)}) {
        double beta = 0.8;
        double upper = integrate_tail(
            [&](double x) { return beta * std::exp(beta * x) * tail_prob(spec, x); }, 0.0);
        double lower = integrate_lower_tail(
            [&](double x) { return beta * std::exp(beta * x) * (tail_prob(spec, x) - 1.0); },
            0.0);
        CHECK(log_mgf(spec, beta) ==
              doctest::Approx(std::log(1.0 + upper + lower)).epsilon(1e-9));
    }
}

TEST_CASE("tail_prob closed values") {
    CHECK(tail_prob(EnvironmentSpec(Gaussian{0.0, 1.0}, 4.0), 0.0) ==
          doctest::Approx(0.5).epsilon(1e-14));
    CHECK(tail_prob(EnvironmentSpec(GumbelNeg{0.0, 1.0}, 4.0), 0.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(tail_prob(EnvironmentSpec(TwoPoint{-1.0, 1.0, 0.5}, 8.0), 0.0) ==
          doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("tail_prob is nonincreasing and in [0,1]") {
    for (const auto& spec : battery()) {
        double prev = 1.1;
        for (double x = -6.0; x <= 30.0; x += 0.25) {
            double t = tail_prob(spec, x);
            CHECK(t >= 0.0);
            CHECK(t <= 1.0);
            CHECK(t <= prev + 1e-15);
            prev = t;
        }
    }
}

TEST_CASE("conditional_exp_moment examples") {
    EnvironmentSpec tp(TwoPoint{0.0, 1.0, 0.5}, 8.0);
    CHECK(conditional_exp_moment(tp, 1.0, 0.5) ==
          doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    EnvironmentSpec g(Gaussian{0.0, 1.0}, 4.0);
    double mills = std::exp(0.5) * normal_upper_tail(1.0) / normal_upper_tail(2.0);
    CHECK(conditional_exp_moment(g, 1.0, 2.0) == doctest::Approx(mills).epsilon(1e-9));
    // quadrature oracle for the same value
    double num = integrate_tail(
        [](double x) { return std::exp(x) * std::exp(-x * x / 2) / std::sqrt(2 * M_PI); },
        2.0);
    CHECK(conditional_exp_moment(g, 1.0, 2.0) ==
          doctest::Approx(num / normal_upper_tail(2.0)).epsilon(1e-9));
}

TEST_CASE("squares-support counterexample inequality") {
    EnvironmentSpec sq(SquaresLattice{2.0}, 1.5);
    for (double beta : {0.5, 1.0}) {
        for (int k = 1; k <= 6; ++k) {
            double m = conditional_exp_moment(sq, beta, double(k) * k);
            CHECK(m >= std::exp(beta * (k + 1.0) * (k + 1.0)));
        }
    }
}

TEST_CASE("conditional_exp_moment dominates e^{beta A}") {
    for (const auto& spec : battery()) {
        for (double beta : {0.3, 1.0}) {
            if (beta > spec.beta_max) continue;
            for (double A : {-0.5, 0.5, 1.5, 4.0}) {
                if (tail_prob(spec, A) <= 0.0) continue;
                CHECK(conditional_exp_moment(spec, beta, A) >=
                      std::exp(beta * A) * (1.0 - 1e-12));
            }
        }
    }
}

TEST_CASE("lambda is convex with lambda(0) = 0") {
    for (const auto& spec : battery()) {
        double beta_hi = std::min(spec.beta_max, 1.4);
        double h = beta_hi / 20;
        for (double b = h; b + h <= beta_hi; b += h) {
            double second =
                log_mgf(spec, b - h) - 2 * log_mgf(spec, b) + log_mgf(spec, b + h);
            CHECK(second >= -1e-8);
        }
        CHECK(log_mgf(spec, 0.0) == doctest::Approx(0.0).epsilon(1e-13));
    }
}

TEST_CASE("sampled Y has mean one") {
    for (const auto& spec : battery()) {
        double beta = std::min(0.5, spec.beta_max / 2);
        double lambda = log_mgf(spec, beta);
        Sequence rng(99);
        Accumulator acc;
        for (int i = 0; i < 400000; ++i)
            acc.add(std::exp(beta * sample_omega(spec, rng.next_u01()) - lambda));
        CHECK(std::fabs(acc.mean() - 1.0) <= 4 * acc.stderr_mean());
    }
}

TEST_CASE("sample_field covers exactly the cone and is reproducible") {
    ConeLattice lattice(1, 2);
    EnvField f = sample_field(EnvironmentSpec(Gaussian{0.0, 1.0}, 4.0), lattice, 7);
    CHECK(f.values.size() == 3);  // rows 0..2
    CHECK(f.values[1].size() == 2);
    CHECK(f.values[2].size() == 3);
    EnvField g = sample_field(EnvironmentSpec(Gaussian{0.0, 1.0}, 4.0), lattice, 7);
    for (std::size_t t = 0; t < f.values.size(); ++t)
        for (std::size_t i = 0; i < f.values[t].size(); ++i)
            CHECK(f.values[t][i] == g.values[t][i]);

    ConeLattice l3(3, 10);
    EnvField h = sample_field(EnvironmentSpec(Gaussian{0.0, 1.0}, 4.0), l3, 0);
    for (int t = 1; t <= 10; ++t) {
        const ConeLevel& lv = l3.level(t);
        CHECK(int64_t(h.values[t].size()) == lv.n_sites);
        for (int32_t i = 0; i < lv.n_sites; ++i) {
            Coords x = lv.site_coords(i);
            int l1 = std::abs(x[0]) + std::abs(x[1]) + std::abs(x[2]);
            CHECK((l1 & 1) == (t & 1));
        }
    }
}

TEST_CASE("environment config round-trips and rejects junk") {
    for (const auto& spec : battery()) {
        auto kv = environment_to_config(spec);
        EnvironmentSpec back = environment_from_config(kv);
        CHECK(back.family_name() == spec.family_name());
        CHECK(log_mgf(back, std::min(1.0, spec.beta_max)) ==
              doctest::Approx(log_mgf(spec, std::min(1.0, spec.beta_max))).epsilon(1e-14));
    }
    auto kv = environment_to_config(EnvironmentSpec(Gaussian{0.0, 1.0}, 4.0));
    kv["mystery"] = "1";
    CHECK_THROWS(environment_from_config(kv));
}
