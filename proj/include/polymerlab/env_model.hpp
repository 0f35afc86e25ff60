#ifndef POLYMERLAB_ENV_MODEL_HPP
#define POLYMERLAB_ENV_MODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "polymerlab/cone.hpp"

namespace polymerlab {

// Distribution families.  Weibull and GumbelNeg are specified directly by
// their tail formulas; densities where needed come from differentiating the
// tail.  SquaresLattice puts mass proportional to e^{-r k^2} on {k^2, k>=1}.
struct Gaussian {
    double mean = 0.0;
    double stddev = 1.0;
};
struct TwoPoint {
    double v_low = -1.0;
    double v_high = 1.0;
    double p_high = 0.5;
};
struct Poisson {
    double mean = 1.0;
};
struct Weibull {
    double c_prime = 1.0;  // tail P(w > x) = min(1, c * exp(-c' x^alpha)), x >= 0
    double alpha = 2.0;    // shape, > 1
    double c = 1.0;        // prefactor, tail capped at 1
};
struct GumbelNeg {
    double loc = 0.0;    // tail P(w > x) = exp(-e^{(x-loc)/scale})
    double scale = 1.0;
};
struct SquaresLattice {
    double rate = 2.0;
    double norm = 0.0;  // sum_{k>=1} e^{-r k^2}, filled in by EnvironmentSpec
};

using FamilyParams =
    std::variant<Gaussian, TwoPoint, Poisson, Weibull, GumbelNeg, SquaresLattice>;

struct EnvironmentSpec {
    FamilyParams family;
    double beta_max = 4.0;

    EnvironmentSpec(FamilyParams f, double beta_max_ = 4.0);

    std::string family_name() const;
};

// lambda(beta) = log E[e^{beta w}].  Closed form for Gaussian/TwoPoint/
// Poisson, series or tail quadrature otherwise (abs tol 1e-12).
double log_mgf(const EnvironmentSpec& spec, double beta);

// P(w > x), exact for all families; nonincreasing in x.
double tail_prob(const EnvironmentSpec& spec, double x);

// E[e^{beta w} | w > A]; requires tail_prob(A) > 0.
double conditional_exp_moment(const EnvironmentSpec& spec, double beta, double A);

// Deterministic inverse-CDF style draw from a uniform u in (0,1).
double sample_omega(const EnvironmentSpec& spec, double u);

// Realized environment on the reachable cone up to a horizon.  Values are a
// pure function of (seed, t, x), so regeneration is bit-exact.
struct EnvField {
    int dim = 1;
    int horizon = 0;
    uint64_t seed = 0;
    std::vector<std::vector<double>> values;  // values[t] aligned with lattice level t

    double at(const ConeLattice& lattice, int t, const Coords& x) const;
};

// Fills the cone with i.i.d. draws keyed by (seed, t, x).
EnvField sample_field(const EnvironmentSpec& spec, const ConeLattice& lattice,
                      uint64_t seed, int64_t site_budget = int64_t(1) << 27);

// Text-config (de)serialization: family name plus named numeric parameters.
std::map<std::string, std::string> environment_to_config(const EnvironmentSpec& spec);
EnvironmentSpec environment_from_config(const std::map<std::string, std::string>& kv);

// Round-trip decimal formatting used by all artifact writers.
std::string format_double(double x);

}  // namespace polymerlab

#endif
