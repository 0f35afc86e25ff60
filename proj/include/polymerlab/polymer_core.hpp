#ifndef POLYMERLAB_POLYMER_CORE_HPP
#define POLYMERLAB_POLYMER_CORE_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "polymerlab/cone.hpp"
#include "polymerlab/env_model.hpp"
#include "polymerlab/num.hpp"

namespace polymerlab {

// Pinned partition-function vector (W_{n,x})_x at time n.  weights holds
// W_{n,x} / e^{log_scale}; the per-step renormalization keeps the largest
// mantissa at exactly 1.
struct PartitionState {
    int time = 0;
    int dim = 1;
    double log_scale = 0.0;
    std::vector<double> weights;
};

struct MartingaleTrace {
    double beta = 0.0;
    uint64_t field_seed = 0;
    std::vector<LogValue> values;  // values[n] = W_n, values[0] = 1 exactly
};

PartitionState initial_state(const ConeLattice& lattice);

// One DP step: W_{n+1,x} = e^{beta w - lambda} (2d)^{-1} sum_{|y-x|=1} W_{n,y}.
// env_row holds omega values aligned with lattice level time+1.
void evolve(const ConeLattice& lattice, PartitionState& state,
            const std::vector<double>& env_row, double beta, double lambda);

// Same step with the environment generated on the fly from the counter
// stream keyed by (seed, t, x).  Time/space offsets implement the shift
// theta_{k,x0}: the value consumed at (t, x) is the field value at
// (t + t_offset, x + x_offset).
void evolve_keyed(const ConeLattice& lattice, PartitionState& state,
                  const EnvironmentSpec& spec, uint64_t seed, double beta, double lambda,
                  int t_offset = 0, const Coords& x_offset = Coords{});

// W_n as a (log_scale, mantissa-sum) pair.
LogValue total(const PartitionState& state);

// Endpoint marginal alpha_x = W_{n,x} / W_n over the cone sites at time n.
std::vector<double> endpoint_measure(const PartitionState& state);

MartingaleTrace run_trace(const EnvironmentSpec& spec, double beta,
                          const ConeLattice& lattice, uint64_t seed);

// tau(t) = inf{n >= 1 : W_n >= t}, or nullopt if the trace never reaches t.
std::optional<int> stopping_time(const MartingaleTrace& trace, double t);

// Both sides of the Markov decomposition
//   W_n = sum_x W_{k,x} (W_{n-k} o theta_{k,x})
// evaluated on the same realized field.  Requires an uncapped lattice.
std::pair<LogValue, LogValue> decompose_at(const EnvironmentSpec& spec,
                                           const EnvField& field,
                                           const ConeLattice& lattice, int k, int n,
                                           double beta);

// Exact E[W_n^2] via the two-replica identity
//   E[W_n^2] = E^{x2}[exp(gamma * #{t <= n : X_t = X'_t})],
// gamma = lambda(2 beta) - 2 lambda(beta), computed deterministically from
// the return-time structure of the difference walk.
double second_moment_exact(const EnvironmentSpec& spec, double beta, int dim, int n);

// P(SRW on Z^dim returns to the origin at time 2m); exact multinomial sum.
double srw_return_prob(int dim, int m);

}  // namespace polymerlab

#endif
