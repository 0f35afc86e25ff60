#include "polymerlab/overshoot_lab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "polymerlab/cone.hpp"
#include "polymerlab/parallel.hpp"
#include "polymerlab/polymer_core.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab {

namespace {

CiValue ci_from(const Accumulator& a) {
    CiValue v;
    v.estimate = a.mean();
    double h = a.ci_half_width();
    v.ci_lo = v.estimate - h;
    v.ci_hi = v.estimate + h;
    v.n = a.count;
    return v;
}

double kahan_sum(const std::vector<double>& xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

}  // namespace

YSampler y_sampler(const EnvironmentSpec& spec, double beta) {
    double lambda = log_mgf(spec, beta);
    return [spec, beta, lambda](double u) {
        return std::exp(beta * sample_omega(spec, u) - lambda);
    };
}

int count_exceedances(const std::vector<double>& weights,
                      const std::vector<double>& samples, double A) {
    if (weights.size() != samples.size())
        throw std::invalid_argument("weights and samples length mismatch");
    int n = 0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] * samples[i] > A) ++n;
    return n;
}

OvershootStats exceedance_moments(const YSampler& sample_y,
                                  const std::vector<double>& weights, double A,
                                  int64_t replicas, uint64_t seed) {
    if (!(A >= 1.0)) throw std::invalid_argument("exceedance level must be >= 1");
    OvershootStats st;
    st.A = A;
    st.replicas = replicas;
    st.seed = seed;
    Sequence rng(seed);
    Accumulator n_acc, nsq_acc, n_cond, nsq_cond;
    int64_t exceed_hits = 0;
    std::vector<double> ys(weights.size());
    for (int64_t r = 0; r < replicas; ++r) {
        for (double& y : ys) y = sample_y(rng.next_u01());
        int n = count_exceedances(weights, ys, A);
        double dn = double(n);
        n_acc.add(dn);
        nsq_acc.add(dn * dn);
        if (n >= 1) {
            ++exceed_hits;
            n_cond.add(dn);
            nsq_cond.add(dn * dn);
        }
    }
    st.n_mean = ci_from(n_acc);
    st.n_sq = ci_from(nsq_acc);
    st.n_mean_cond = ci_from(n_cond);
    st.n_sq_cond = ci_from(nsq_cond);
    auto wi = wilson_interval(exceed_hits, replicas);
    st.conditioning_prob = {double(exceed_hits) / double(replicas), wi.lo, wi.hi,
                            replicas};
    st.inconclusive = exceed_hits < 100;
    return st;
}

bool exceedance_bounds_hold(const OvershootStats& s, double ci_slack) {
    auto half = [](const CiValue& v) { return 0.5 * (v.ci_hi - v.ci_lo); };
    if (s.inconclusive) return false;
    if (s.n_mean.estimate > 1.0 / s.A + ci_slack * half(s.n_mean)) return false;
    if (s.n_sq.estimate > 1.0 / s.A + 1.0 / (s.A * s.A) + ci_slack * half(s.n_sq))
        return false;
    if (s.n_mean_cond.estimate > 2.0 + ci_slack * half(s.n_mean_cond)) return false;
    if (s.n_sq_cond.estimate > 5.0 + ci_slack * half(s.n_sq_cond)) return false;
    return true;
}

std::vector<OvershootStats> simulate_convex_overshoot(
    const YSampler& sample_y, const std::vector<double>& weights,
    const std::vector<double>& p_grid, const std::vector<double>& A_grid,
    int64_t replicas, uint64_t seed) {
    std::vector<OvershootStats> out;
    std::vector<double> ys(weights.size());
    for (double A : A_grid) {
        Sequence rng(hash_key(seed, 0x05e7, static_cast<uint64_t>(A * 4096.0)));
        std::vector<Accumulator> sp(p_grid.size());
        std::vector<double> sum_n0(p_grid.size(), 0.0);
        int64_t hits = 0, violations = 0;
        for (int64_t r = 0; r < replicas; ++r) {
            double S = 0.0;
            for (std::size_t i = 0; i < weights.size(); ++i) {
                ys[i] = sample_y(rng.next_u01());
                S += weights[i] * ys[i];
            }
            if (!(S > A)) continue;
            ++hits;
            int n_exc = count_exceedances(weights, ys, A);
            // first-passage truncation: sum of capped terms up to tau stays <= 2A
            double part = 0.0, trunc = 0.0;
            for (std::size_t i = 0; i < weights.size(); ++i) {
                double term = weights[i] * ys[i];
                if (term <= A) trunc += term;
                part += term;
                if (part > A) break;
            }
            if (trunc > 2.0 * A * (1.0 + 1e-12)) ++violations;
            for (std::size_t k = 0; k < p_grid.size(); ++k) {
                double v = std::pow(S, p_grid[k]);
                sp[k].add(v);
                if (n_exc == 0) sum_n0[k] += v;
            }
        }
        for (std::size_t k = 0; k < p_grid.size(); ++k) {
            OvershootStats st;
            st.A = A;
            st.p = p_grid[k];
            st.replicas = replicas;
            st.seed = seed;
            st.truncation_violations = violations;
            auto wi = wilson_interval(hits, replicas);
            st.conditioning_prob = {double(hits) / double(replicas), wi.lo, wi.hi,
                                    replicas};
            double ap = std::pow(A, p_grid[k]);
            CiValue ratio = ci_from(sp[k]);
            st.ratio = {ratio.estimate / ap, ratio.ci_lo / ap, ratio.ci_hi / ap,
                        ratio.n};
            st.split_n0 = hits > 0 ? sum_n0[k] / double(hits) / ap : 0.0;
            st.split_n1 = st.ratio.estimate - st.split_n0;
            st.inconclusive = hits < 100;
            out.push_back(st);
        }
    }
    return out;
}

namespace {

// Independent route to W_k / W_{k-1}: endpoint measure at k-1 composed with
// one SRW step against the fresh disorder row, resolved site by site through
// coordinate lookups rather than the DP kernel.
double one_step_ratio_indep(const ConeLattice& lattice, const PartitionState& prev,
                            const EnvironmentSpec& spec, uint64_t seed, double beta,
                            double lambda, int k) {
    const int d = lattice.dim();
    const ConeLevel& lvk = lattice.level(k);
    const ConeLevel& lvp = lattice.level(k - 1);
    double prev_sum = kahan_sum(prev.weights);
    double acc = 0.0, comp = 0.0;
    for (int32_t idx = 0; idx < lvk.n_sites; ++idx) {
        Coords x = lvk.site_coords(idx);
        double gather = 0.0;
        for (int j = 0; j < d; ++j) {
            for (int dir = -1; dir <= 1; dir += 2) {
                Coords y = x;
                y[j] += dir;
                int32_t yi = lvp.site_index(y);
                if (yi >= 0) gather += prev.weights[yi];
            }
        }
        double u = site_uniform(seed, k, pack_coords(x, d));
        double y_val = std::exp(beta * sample_omega(spec, u) - lambda);
        double term = gather * y_val;
        double yy = term - comp;
        double t = acc + yy;
        comp = (t - acc) - yy;
        acc = t;
    }
    return acc / (2.0 * d * prev_sum);
}

struct ReplicaEvents {
    struct Hit {
        int t_idx;
        int k;
        double log_w;  // log W_tau
    };
    std::vector<Hit> hits;
    double max_identity_error = 0.0;
};

}  // namespace

OvershootTable martingale_overshoot_experiment(
    const EnvironmentSpec& spec, double beta, int dim,
    const std::vector<double>& t_grid, const std::vector<double>& p_grid, int horizon,
    int64_t replicas, uint64_t seed, double A3, int workers, double radius_cap_a,
    int radius_cap_b) {
    for (double t : t_grid)
        if (!(t > 1.0)) throw std::invalid_argument("thresholds must be > 1");
    ConeLattice lattice(dim, horizon, radius_cap_a, radius_cap_b);
    double lambda = log_mgf(spec, beta);
    std::vector<double> log_t(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) log_t[i] = std::log(t_grid[i]);

    std::vector<ReplicaEvents> slots(replicas);
    parallel_for(replicas, workers, [&](int64_t r) {
        uint64_t rs = replica_seed(seed, static_cast<uint64_t>(r));
        PartitionState state = initial_state(lattice);
        PartitionState prev;
        std::vector<bool> resolved(t_grid.size(), false);
        std::size_t open = t_grid.size();
        ReplicaEvents ev;
        double prev_log = 0.0;
        for (int k = 1; k <= horizon && open > 0; ++k) {
            prev = state;
            evolve_keyed(lattice, state, spec, rs, beta, lambda);
            double log_w = total(state).log();
            bool crossed = false;
            for (std::size_t i = 0; i < t_grid.size(); ++i) {
                if (resolved[i] || log_w < log_t[i]) continue;
                resolved[i] = true;
                --open;
                ev.hits.push_back({static_cast<int>(i), k, log_w});
                crossed = true;
            }
            if (crossed) {
                double dp_ratio = std::exp(log_w - prev_log);
                double indep =
                    one_step_ratio_indep(lattice, prev, spec, rs, beta, lambda, k);
                double err = std::fabs(dp_ratio - indep) / dp_ratio;
                ev.max_identity_error = std::max(ev.max_identity_error, err);
            }
            prev_log = log_w;
        }
        slots[r] = std::move(ev);
    });

    // deterministic reduce in replica order
    OvershootTable table;
    table.replicas = replicas;
    table.A3 = A3;
    struct Cell {
        Accumulator acc;  // of (W_tau / t)^p
    };
    std::vector<std::map<int, Cell>> per_k(t_grid.size() * p_grid.size());
    std::vector<Accumulator> agg(t_grid.size() * p_grid.size());
    int64_t total_hits = 0, above = 0;
    for (const auto& ev : slots) {
        table.max_identity_error =
            std::max(table.max_identity_error, ev.max_identity_error);
        for (const auto& h : ev.hits) {
            ++total_hits;
            if (h.log_w > std::log(A3 * t_grid[h.t_idx])) ++above;
            for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
                double v = std::exp(p_grid[pi] * (h.log_w - log_t[h.t_idx]));
                std::size_t slot = h.t_idx * p_grid.size() + pi;
                per_k[slot][h.k].acc.add(v);
                agg[slot].add(v);
            }
        }
    }
    table.frac_above_A3t = total_hits > 0 ? double(above) / double(total_hits) : 0.0;
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
            std::size_t slot = ti * p_grid.size() + pi;
            for (const auto& [k, cell] : per_k[slot]) {
                CiValue c = ci_from(cell.acc);
                table.per_k.push_back({t_grid[ti], p_grid[pi], k, c.estimate, c.ci_lo,
                                       c.ci_hi, cell.acc.count});
            }
            CiValue c = ci_from(agg[slot]);
            OvershootRow row{t_grid[ti], p_grid[pi], -1, c.estimate, c.ci_lo, c.ci_hi,
                             agg[slot].count};
            if (agg[slot].count == 0 && pi == 0) ++table.inconclusive_t;
            table.aggregated.push_back(row);
        }
    }
    return table;
}

std::vector<MomentRow> moment_trace(const EnvironmentSpec& spec, double beta, int dim,
                                    const std::vector<double>& p_grid,
                                    const std::vector<int>& n_grid, int64_t replicas,
                                    uint64_t seed, int workers, double radius_cap_a,
                                    int radius_cap_b) {
    if (n_grid.empty()) return {};
    int horizon = *std::max_element(n_grid.begin(), n_grid.end());
    ConeLattice lattice(dim, horizon, radius_cap_a, radius_cap_b);
    double lambda = log_mgf(spec, beta);

    std::vector<std::vector<double>> log_w(replicas);  // per replica, per n-grid entry
    parallel_for(replicas, workers, [&](int64_t r) {
        uint64_t rs = replica_seed(seed, static_cast<uint64_t>(r));
        PartitionState state = initial_state(lattice);
        std::vector<double> vals;
        vals.reserve(n_grid.size());
        for (int t = 1; t <= horizon; ++t) {
            evolve_keyed(lattice, state, spec, rs, beta, lambda);
            if (std::find(n_grid.begin(), n_grid.end(), t) != n_grid.end())
                vals.push_back(total(state).log());
        }
        if (std::find(n_grid.begin(), n_grid.end(), 0) != n_grid.end())
            vals.insert(vals.begin(), 0.0);
        log_w[r] = std::move(vals);
    });

    std::vector<int> sorted_n = n_grid;
    std::sort(sorted_n.begin(), sorted_n.end());
    std::vector<MomentRow> rows;
    for (std::size_t ni = 0; ni < sorted_n.size(); ++ni) {
        for (double p : p_grid) {
            Accumulator acc;
            for (int64_t r = 0; r < replicas; ++r) acc.add(std::exp(p * log_w[r][ni]));
            MomentRow row;
            row.n = sorted_n[ni];
            row.p = p;
            row.estimate = acc.mean();
            row.ci_lo = acc.mean() - acc.ci_half_width();
            row.ci_hi = acc.mean() + acc.ci_half_width();
            if (std::fabs(p - 2.0) < 1e-12 && 2.0 * beta <= spec.beta_max)
                row.exact_if_p2 = second_moment_exact(spec, beta, dim, row.n);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace polymerlab
