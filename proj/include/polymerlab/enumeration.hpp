#ifndef POLYMERLAB_ENUMERATION_HPP
#define POLYMERLAB_ENUMERATION_HPP

#include <cstdint>
#include <functional>
#include <map>

#include "polymerlab/cone.hpp"
#include "polymerlab/env_model.hpp"

namespace polymerlab {

// Brute-force W_n by summing the (2d)^n walk paths directly; the slow
// counterpart of the DP step, used as an oracle.
struct PathEnumeration {
    double w_n = 0.0;
    std::map<Coords, double> w_nx;  // pinned values by endpoint
};

using OmegaFn = std::function<double(int t, const Coords& x)>;

PathEnumeration enumerate_paths(const OmegaFn& omega, int dim, int n, double beta,
                                double lambda);

// Same walk sum against the counter-keyed field, matching evolve_keyed.
PathEnumeration enumerate_paths_keyed(const EnvironmentSpec& spec, uint64_t seed,
                                      double beta, int dim, int n);

}  // namespace polymerlab

#endif
