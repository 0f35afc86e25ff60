#include "polymerlab/polymer_core.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "polymerlab/rng.hpp"

namespace polymerlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Shared DP step.  WeightFn(site_index, packed_coords) -> e^{beta omega} for
// the site at time state.time+1.
template <typename WeightFn>
void evolve_impl(const ConeLattice& lattice, PartitionState& state, double beta,
                 double lambda, WeightFn&& weight_at) {
    (void)beta;
    const int d = lattice.dim();
    const ConeLevel& oldlv = lattice.level(state.time);
    const ConeLevel& newlv = lattice.level(state.time + 1);
    if (static_cast<int64_t>(state.weights.size()) != oldlv.n_sites)
        throw std::invalid_argument("state does not match the lattice cone");
    std::vector<double> out(newlv.n_sites);
    const double* w = state.weights.data();

    int pre[kMaxDim] = {};
    for (int64_t cell : newlv.nonempty_cells) {
        const ConeLevel::Row& r = newlv.rows[cell];
        int64_t rem = cell;
        for (int j = 0; j + 1 < d; ++j) {
            pre[j] = static_cast<int>(rem % (2 * newlv.extent + 1)) - newlv.extent;
            rem /= 2 * newlv.extent + 1;
        }
        // neighbor rows at the previous level: prefix +-1 (same x_d) and the
        // same prefix (x_d +- 1)
        const ConeLevel::Row* side[2 * (kMaxDim - 1)];
        int n_side = 0;
        for (int j = 0; j + 1 < d; ++j) {
            for (int dir = -1; dir <= 1; dir += 2) {
                pre[j] += dir;
                const ConeLevel::Row* nr = oldlv.row_at(pre);
                if (nr && !nr->empty()) side[n_side++] = nr;
                pre[j] -= dir;
            }
        }
        const ConeLevel::Row* own =
            (d == 1) ? &oldlv.rows[0] : oldlv.row_at(pre);
        if (own && own->empty()) own = nullptr;

        uint64_t packed_pre = 0;
        for (int j = 0; j + 1 < d; ++j)
            packed_pre |= static_cast<uint64_t>(static_cast<uint16_t>(pre[j] + 0x8000))
                          << (16 * j);
        const int shift = 16 * (d - 1);

        for (int xd = r.lo; xd <= r.hi; xd += 2) {
            double sum = 0.0;
            for (int s = 0; s < n_side; ++s) {
                const ConeLevel::Row* nr = side[s];
                if (xd >= nr->lo && xd <= nr->hi) sum += w[nr->start + (xd - nr->lo) / 2];
            }
            if (own) {
                if (xd - 1 >= own->lo && xd - 1 <= own->hi)
                    sum += w[own->start + (xd - 1 - own->lo) / 2];
                if (xd + 1 >= own->lo && xd + 1 <= own->hi)
                    sum += w[own->start + (xd + 1 - own->lo) / 2];
            }
            uint64_t packed =
                packed_pre |
                (static_cast<uint64_t>(static_cast<uint16_t>(xd + 0x8000)) << shift);
            int32_t idx = r.start + (xd - r.lo) / 2;
            out[idx] = sum * weight_at(idx, packed);
        }
    }

    double maxw = 0.0;
    for (double v : out) maxw = std::max(maxw, v);
    if (!(maxw > 0.0)) throw std::runtime_error("degenerate all-zero partition state");
    double inv = 1.0 / maxw;
    for (double& v : out) v *= inv;
    state.weights = std::move(out);
    state.log_scale += std::log(maxw) - lambda - std::log(2.0 * d);
    state.time += 1;
}

}  // namespace

PartitionState initial_state(const ConeLattice& lattice) {
    PartitionState s;
    s.time = 0;
    s.dim = lattice.dim();
    s.log_scale = 0.0;
    s.weights.assign(lattice.level(0).n_sites, 1.0);
    return s;
}

void evolve(const ConeLattice& lattice, PartitionState& state,
            const std::vector<double>& env_row, double beta, double lambda) {
    const ConeLevel& newlv = lattice.level(state.time + 1);
    if (static_cast<int64_t>(env_row.size()) != newlv.n_sites)
        throw std::invalid_argument("env_row does not cover the time-(n+1) cone");
    evolve_impl(lattice, state, beta, lambda,
                [&](int32_t idx, uint64_t) { return std::exp(beta * env_row[idx]); });
}

void evolve_keyed(const ConeLattice& lattice, PartitionState& state,
                  const EnvironmentSpec& spec, uint64_t seed, double beta, double lambda,
                  int t_offset, const Coords& x_offset) {
    const int d = lattice.dim();
    const int t = state.time + 1 + t_offset;
    uint64_t packed_off = 0;
    bool shifted = t_offset != 0;
    for (int j = 0; j < d; ++j) {
        packed_off |= static_cast<uint64_t>(static_cast<uint16_t>(x_offset[j]))
                      << (16 * j);
        if (x_offset[j] != 0) shifted = true;
    }
    // packed coordinate fields add per 16-bit lane; offsets cannot overflow a
    // lane for desk-scale horizons, so lane-wise addition equals packing x+x0
    auto add_lanes = [d](uint64_t a, uint64_t b) {
        uint64_t r = 0;
        for (int j = 0; j < d; ++j) {
            uint64_t m = 0xffffULL << (16 * j);
            r |= ((a & m) + (b & m)) & m;
        }
        return r;
    };
    std::visit(
        overloaded{
            [&](const Gaussian& g) {
                evolve_impl(lattice, state, beta, lambda, [&](int32_t, uint64_t packed) {
                    uint64_t p = shifted ? add_lanes(packed, packed_off) : packed;
                    double u = site_uniform(seed, t, p);
                    double w = g.mean + g.stddev * inv_normal_cdf(u);
                    return std::exp(beta * w);
                });
            },
            [&](const TwoPoint& tp) {
                double wl = std::exp(beta * tp.v_low), wh = std::exp(beta * tp.v_high);
                evolve_impl(lattice, state, beta, lambda, [&](int32_t, uint64_t packed) {
                    uint64_t p = shifted ? add_lanes(packed, packed_off) : packed;
                    return site_uniform(seed, t, p) < tp.p_high ? wh : wl;
                });
            },
            [&](const auto&) {
                evolve_impl(lattice, state, beta, lambda, [&](int32_t, uint64_t packed) {
                    uint64_t p = shifted ? add_lanes(packed, packed_off) : packed;
                    double u = site_uniform(seed, t, p);
                    return std::exp(beta * sample_omega(spec, u));
                });
            },
        },
        spec.family);
}

LogValue total(const PartitionState& state) {
    double s = 0.0;
    for (double v : state.weights) s += v;
    return LogValue{state.log_scale, s};
}

std::vector<double> endpoint_measure(const PartitionState& state) {
    double s = 0.0;
    for (double v : state.weights) s += v;
    if (!(s > 0.0)) throw std::runtime_error("degenerate all-zero partition state");
    std::vector<double> alpha(state.weights);
    double inv = 1.0 / s;
    for (double& a : alpha) a *= inv;
    return alpha;
}

MartingaleTrace run_trace(const EnvironmentSpec& spec, double beta,
                          const ConeLattice& lattice, uint64_t seed) {
    MartingaleTrace trace;
    trace.beta = beta;
    trace.field_seed = seed;
    double lambda = log_mgf(spec, beta);
    PartitionState state = initial_state(lattice);
    trace.values.reserve(lattice.horizon() + 1);
    trace.values.push_back(LogValue::one());
    for (int t = 1; t <= lattice.horizon(); ++t) {
        evolve_keyed(lattice, state, spec, seed, beta, lambda);
        trace.values.push_back(total(state));
    }
    return trace;
}

std::optional<int> stopping_time(const MartingaleTrace& trace, double t) {
    if (!(t > 1.0)) throw std::invalid_argument("stopping threshold must be > 1");
    double log_t = std::log(t);
    for (std::size_t n = 1; n < trace.values.size(); ++n)
        if (trace.values[n].log() >= log_t) return static_cast<int>(n);
    return std::nullopt;
}

std::pair<LogValue, LogValue> decompose_at(const EnvironmentSpec& spec,
                                           const EnvField& field,
                                           const ConeLattice& lattice, int k, int n,
                                           double beta) {
    if (k < 0 || k > n || n > lattice.horizon())
        throw std::invalid_argument("need 0 <= k <= n <= horizon");
    if (lattice.capped())
        throw std::invalid_argument("decompose_at requires the exact full cone");
    double lambda = log_mgf(spec, beta);

    PartitionState state = initial_state(lattice);
    for (int t = 1; t <= k; ++t) evolve(lattice, state, field.values[t], beta, lambda);
    PartitionState at_k = state;
    for (int t = k + 1; t <= n; ++t)
        evolve(lattice, state, field.values[t], beta, lambda);
    LogValue lhs = total(state);

    // rhs: restart the DP from every endpoint x of the time-k cone on the
    // time-space shifted field
    const ConeLevel& lvk = lattice.level(k);
    ConeLattice sub(lattice.dim(), n - k);
    std::vector<double> log_terms;
    log_terms.reserve(lvk.n_sites);
    for (int32_t xi = 0; xi < lvk.n_sites; ++xi) {
        Coords x0 = lvk.site_coords(xi);
        PartitionState restarted = initial_state(sub);
        for (int j = 1; j <= n - k; ++j) {
            const ConeLevel& sub_lv = sub.level(j);
            std::vector<double> row(sub_lv.n_sites);
            for (int32_t zi = 0; zi < sub_lv.n_sites; ++zi) {
                Coords z = sub_lv.site_coords(zi);
                for (int c = 0; c < lattice.dim(); ++c) z[c] += x0[c];
                row[zi] = field.at(lattice, k + j, z);
            }
            evolve(sub, restarted, row, beta, lambda);
        }
        double log_pinned = at_k.log_scale + std::log(at_k.weights[xi]);
        log_terms.push_back(log_pinned + total(restarted).log());
    }
    LogValue rhs{log_sum_exp(log_terms), 1.0};
    return {lhs, rhs};
}

double srw_return_prob(int dim, int m) {
    if (m == 0) return 1.0;
    std::vector<double> lf(2 * m + 1);
    for (int i = 1; i <= 2 * m; ++i) lf[i] = lf[i - 1] + std::log(double(i));
    std::vector<double> terms;
    if (dim == 1) {
        terms.push_back(-2.0 * lf[m]);
    } else if (dim == 2) {
        for (int k = 0; k <= m; ++k) terms.push_back(-2.0 * (lf[k] + lf[m - k]));
    } else if (dim == 3) {
        for (int k1 = 0; k1 <= m; ++k1)
            for (int k2 = 0; k2 + k1 <= m; ++k2)
                terms.push_back(-2.0 * (lf[k1] + lf[k2] + lf[m - k1 - k2]));
    } else if (dim == 4) {
        for (int k1 = 0; k1 <= m; ++k1)
            for (int k2 = 0; k2 + k1 <= m; ++k2)
                for (int k3 = 0; k3 + k2 + k1 <= m; ++k3)
                    terms.push_back(-2.0 * (lf[k1] + lf[k2] + lf[k3] + lf[m - k1 - k2 - k3]));
    } else {
        throw std::invalid_argument("dim must be in 1..4");
    }
    double log_u = lf[2 * m] - 2.0 * m * std::log(2.0 * dim) + log_sum_exp(terms);
    return std::exp(log_u);
}

double second_moment_exact(const EnvironmentSpec& spec, double beta, int dim, int n) {
    if (2.0 * beta > spec.beta_max)
        throw std::invalid_argument("second moment needs 2*beta <= beta_max");
    double gamma = log_mgf(spec, 2.0 * beta) - 2.0 * log_mgf(spec, beta);
    double eg = std::exp(gamma);

    // collision probabilities of two independent walks: the difference walk
    // at time m is distributed as the SRW at time 2m
    std::vector<double> u(n + 1);
    u[0] = 1.0;
    for (int m = 1; m <= n; ++m) u[m] = srw_return_prob(dim, m);

    // first-return probabilities by deconvolution
    std::vector<double> f(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        double s = u[k];
        for (int j = 1; j < k; ++j) s -= f[j] * u[k - j];
        f[k] = s;
    }

    // renewal recursion for E[e^{gamma L_n}]
    std::vector<double> moment(n + 1, 1.0);
    double cum_f = 0.0;
    std::vector<double> cum(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        cum_f += f[k];
        cum[k] = cum_f;
    }
    for (int k = 1; k <= n; ++k) {
        double s = 1.0 - cum[k];
        for (int j = 1; j <= k; ++j) s += f[j] * eg * moment[k - j];
        moment[k] = s;
    }
    return moment[n];
}

}  // namespace polymerlab
