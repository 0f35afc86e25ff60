#include "polymerlab/enumeration.hpp"

#include <cmath>

#include "polymerlab/rng.hpp"

namespace polymerlab {

namespace {

void walk(const OmegaFn& omega, int dim, int n, double beta, double lambda, int t,
          Coords& x, double weight, PathEnumeration& out) {
    if (t == n) {
        out.w_n += weight;
        out.w_nx[x] += weight;
        return;
    }
    for (int j = 0; j < dim; ++j) {
        for (int dir = -1; dir <= 1; dir += 2) {
            x[j] += dir;
            double w = weight * std::exp(beta * omega(t + 1, x) - lambda) /
                       (2.0 * dim);
            walk(omega, dim, n, beta, lambda, t + 1, x, w, out);
            x[j] -= dir;
        }
    }
}

}  // namespace

PathEnumeration enumerate_paths(const OmegaFn& omega, int dim, int n, double beta,
                                double lambda) {
    PathEnumeration out;
    Coords x{};
    walk(omega, dim, n, beta, lambda, 0, x, 1.0, out);
    return out;
}

PathEnumeration enumerate_paths_keyed(const EnvironmentSpec& spec, uint64_t seed,
                                      double beta, int dim, int n) {
    double lambda = log_mgf(spec, beta);
    return enumerate_paths(
        [&](int t, const Coords& x) {
            return sample_omega(spec, site_uniform(seed, t, pack_coords(x, dim)));
        },
        dim, n, beta, lambda);
}

}  // namespace polymerlab
