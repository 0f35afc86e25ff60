#ifndef POLYMERLAB_OVERSHOOT_LAB_HPP
#define POLYMERLAB_OVERSHOOT_LAB_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "polymerlab/env_model.hpp"
#include "polymerlab/stats.hpp"

namespace polymerlab {

using YSampler = std::function<double(double)>;  // uniform u -> Y draw

// Y = e^{beta w - lambda(beta)} for an environment spec.
YSampler y_sampler(const EnvironmentSpec& spec, double beta);

struct CiValue {
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    int64_t n = 0;
};

struct OvershootStats {
    double A = 0.0;
    double p = 2.0;
    CiValue conditioning_prob;
    CiValue ratio;            // E[S^p | S > A] / A^p
    double split_n0 = 0.0;    // contribution to ratio from {N = 0}
    double split_n1 = 0.0;    // contribution from {N >= 1}
    CiValue n_mean;           // E[N]
    CiValue n_sq;             // E[N^2]
    CiValue n_mean_cond;      // E[N | N >= 1]
    CiValue n_sq_cond;        // E[N^2 | N >= 1]
    int64_t truncation_violations = 0;  // per-sample 2A bound failures
    int64_t replicas = 0;
    uint64_t seed = 0;
    bool inconclusive = false;
};

// #{i : alpha_i Y_i > A}.
int count_exceedances(const std::vector<double>& weights,
                      const std::vector<double>& samples, double A);

// Monte Carlo moments of the exceedance count N for one weight profile.
OvershootStats exceedance_moments(const YSampler& sample_y,
                                  const std::vector<double>& weights, double A,
                                  int64_t replicas, uint64_t seed);

// The Markov-inequality bounds behind the exceedance lemma, with slack of
// `ci_slack` CI half-widths: E[N] <= 1/A, E[N|N>=1] <= 2, E[N^2|N>=1] <= 5.
bool exceedance_bounds_hold(const OvershootStats& s, double ci_slack = 3.0);

// Conditional overshoot of a convex combination with the N=0 / N>=1 split and
// the per-sample first-passage truncation bound (<= 2A) checked on the way.
std::vector<OvershootStats> simulate_convex_overshoot(
    const YSampler& sample_y, const std::vector<double>& weights,
    const std::vector<double>& p_grid, const std::vector<double>& A_grid,
    int64_t replicas, uint64_t seed);

// Stopping-time overshoot of the polymer martingale.
struct OvershootRow {
    double t = 0.0;
    double p = 0.0;
    int k = 0;            // -1 aggregates over k
    double ratio = 0.0;   // E[W_k^p 1{tau=k}] / (t^p P(tau=k))
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    int64_t hits = 0;
};

struct OvershootTable {
    std::vector<OvershootRow> per_k;
    std::vector<OvershootRow> aggregated;   // one row per (t, p), k = -1
    double max_identity_error = 0.0;        // one-step ratio vs alpha/Y recomputation
    double frac_above_A3t = 0.0;            // hits with W_tau > A3 t
    double A3 = 0.0;
    int64_t replicas = 0;
    int64_t inconclusive_t = 0;             // thresholds with zero hits
};

OvershootTable martingale_overshoot_experiment(
    const EnvironmentSpec& spec, double beta, int dim,
    const std::vector<double>& t_grid, const std::vector<double>& p_grid, int horizon,
    int64_t replicas, uint64_t seed, double A3 = 2.0, int workers = 1,
    double radius_cap_a = 0.0, int radius_cap_b = 0);

// Monte Carlo E[W_n^p] along a grid of n, with the exact second moment
// alongside for p = 2.
struct MomentRow {
    int n = 0;
    double p = 0.0;
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::optional<double> exact_if_p2;
};

std::vector<MomentRow> moment_trace(const EnvironmentSpec& spec, double beta, int dim,
                                    const std::vector<double>& p_grid,
                                    const std::vector<int>& n_grid, int64_t replicas,
                                    uint64_t seed, int workers = 1,
                                    double radius_cap_a = 0.0, int radius_cap_b = 0);

}  // namespace polymerlab

#endif
