// Acceptance gate: one check per release criterion, one verdict line each.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "polymerlab/condition_lab.hpp"
#include "polymerlab/cone.hpp"
#include "polymerlab/config.hpp"
#include "polymerlab/enumeration.hpp"
#include "polymerlab/env_model.hpp"
#include "polymerlab/overshoot_lab.hpp"
#include "polymerlab/polymer_core.hpp"
#include "polymerlab/rng.hpp"

using namespace polymerlab;
namespace fs = std::filesystem;

namespace {

const EnvironmentSpec kGauss(Gaussian{0.0, 1.0}, 4.0);
const EnvironmentSpec kTwoPoint(TwoPoint{-1.0, 1.0, 0.5}, 8.0);

struct Outcome {
    bool pass = false;
    bool inconclusive = false;
    std::string detail;
};

int failures = 0;

template <typename F>
void criterion(int id, const std::string& name, double budget_s, F&& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_budget = secs < budget_s;
    bool ok = o.pass && in_budget;
    const char* tag = ok ? "PASS" : (o.inconclusive ? "INCONCLUSIVE" : "FAIL");
    std::printf("[%2d] %-12s %-38s %s%s(%.1f s, budget %.0f s)\n", id, tag, name.c_str(),
                o.detail.c_str(), o.detail.empty() ? "" : " ", secs, budget_s);
    if (!in_budget && o.pass)
        std::printf("     note: content checks passed; wall time exceeded the budget\n");
    if (!ok) ++failures;
    std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double dp_vs_enumeration_err(const EnvironmentSpec& spec, double beta, int dim, int n_max,
                             uint64_t seed) {
    ConeLattice lattice(dim, n_max);
    PartitionState state = initial_state(lattice);
    double lambda = log_mgf(spec, beta);
    double err = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        evolve_keyed(lattice, state, spec, seed, beta, lambda);
        PathEnumeration oracle = enumerate_paths_keyed(spec, seed, beta, dim, n);
        err = std::max(err,
                       std::fabs(total(state).value() - oracle.w_n) / oracle.w_n);
        const ConeLevel& lv = lattice.level(n);
        double scale = std::exp(state.log_scale);
        std::vector<double> alpha = endpoint_measure(state);
        for (const auto& [x, wx] : oracle.w_nx) {
            int32_t i = lv.site_index(x);
            if (i < 0) return 1.0;
            err = std::max(err, std::fabs(state.weights[i] * scale - wx) / wx);
            err = std::max(err, std::fabs(alpha[i] - wx / oracle.w_n) / (wx / oracle.w_n));
        }
    }
    return err;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

int main() {
    criterion(1, "exact oracle equivalence", 10.0, [] {
        Outcome o;
        double err = 0.0;
        for (const EnvironmentSpec& spec : {kTwoPoint, kGauss})
            for (uint64_t seed = 1; seed <= 50; ++seed)
                err = std::max(err, dp_vs_enumeration_err(spec, 0.8, 1, 6, seed));
        o.pass = err <= 1e-12;
        o.detail = "max rel err " + fmt("%.2e", err);
        return o;
    });

    criterion(2, "martingale exactness", 10.0, [] {
        Outcome o;
        double beta = 0.8, lambda = log_mgf(kTwoPoint, beta);
        double worst = 0.0;
        for (int n = 1; n <= 4; ++n) {
            ConeLattice lattice(1, n);
            // several fixed prefixes; average the last row over all values
            for (int variant = 0; variant < 3; ++variant) {
                PartitionState base = initial_state(lattice);
                for (int t = 1; t < n; ++t) {
                    std::vector<double> row(t + 1);
                    for (int i = 0; i <= t; ++i)
                        row[i] = ((i + t * variant) % 3 == 0) ? 1.0 : -1.0;
                    evolve(lattice, base, row, beta, lambda);
                }
                double w_prev = total(base).value();
                int m = n + 1;
                double cond_mean = 0.0;
                for (int mask = 0; mask < (1 << m); ++mask) {
                    std::vector<double> last(m);
                    for (int i = 0; i < m; ++i) last[i] = (mask >> i) & 1 ? 1.0 : -1.0;
                    PartitionState s = base;
                    evolve(lattice, s, last, beta, lambda);
                    cond_mean += total(s).value() / double(1 << m);
                }
                worst = std::max(worst, std::fabs(cond_mean - w_prev) / w_prev);
            }
            // full enumeration of every row: E[W_n] = 1
            int sites = 0;
            for (int t = 1; t <= n; ++t) sites += t + 1;
            double mean = 0.0;
            for (int mask = 0; mask < (1 << sites); ++mask) {
                PartitionState s = initial_state(lattice);
                int bit = 0;
                for (int t = 1; t <= n; ++t) {
                    std::vector<double> row(t + 1);
                    for (int i = 0; i <= t; ++i, ++bit)
                        row[i] = (mask >> bit) & 1 ? 1.0 : -1.0;
                    evolve(lattice, s, row, beta, lambda);
                }
                mean += total(s).value() / double(1 << sites);
            }
            worst = std::max(worst, std::fabs(mean - 1.0));
        }
        o.pass = worst <= 1e-12;
        o.detail = "max deviation " + fmt("%.2e", worst);
        return o;
    });

    criterion(3, "Markov decomposition identity", 30.0, [] {
        Outcome o;
        double err = 0.0;
        for (int dim : {1, 2, 3}) {
            ConeLattice lattice(dim, 12);
            for (uint64_t seed = 1; seed <= 20; ++seed) {
                EnvField field = sample_field(kGauss, lattice, seed);
                for (int n = 0; n <= 12; ++n)
                    for (int k = 0; k <= n; ++k) {
                        auto [lhs, rhs] = decompose_at(kGauss, field, lattice, k, n, 0.5);
                        err = std::max(err, std::fabs(lhs.log() - rhs.log()));
                    }
            }
        }
        o.pass = err <= 1e-12;
        o.detail = "max |log lhs - log rhs| " + fmt("%.2e", err);
        return o;
    });

    criterion(4, "second-moment Monte Carlo oracle", 120.0, [] {
        Outcome o;
        double worst_z = 0.0;
        auto check = [&](double beta, int dim, std::vector<int> ns) {
            auto rows = moment_trace(kGauss, beta, dim, {2.0}, ns, 100000, 404, 1);
            for (const auto& r : rows) {
                double se = (r.ci_hi - r.estimate) / 2.5758293035489004;
                worst_z = std::max(worst_z, std::fabs(r.estimate - *r.exact_if_p2) / se);
            }
        };
        check(0.3, 3, {5, 10, 20});
        check(0.5, 1, {5, 10});
        o.pass = worst_z <= 4.0;
        o.detail = "worst |z| " + fmt("%.2f", worst_z);
        return o;
    });

    criterion(5, "tail condition battery", 60.0, [] {
        Outcome o;
        std::vector<double> grid;
        for (double A = 1.0; A <= 25.0; A += 1.0) grid.push_back(A);
        std::vector<double> sq_grid = {1.5, 2.5, 4, 6, 9, 12, 16, 20, 25, 30, 36};
        bool ok = true;
        std::string bad;
        for (double beta : {0.5, 1.0}) {
            for (const auto& [name, spec] :
                 std::map<std::string, EnvironmentSpec>{
                     {"gaussian", kGauss},
                     {"weibull", EnvironmentSpec(Weibull{1.0, 2.0, 1.0}, 4.0)},
                     {"poisson", EnvironmentSpec(Poisson{1.0}, 4.0)},
                     {"gumbelneg", EnvironmentSpec(GumbelNeg{0.0, 1.0}, 4.0)}}) {
                if (check_condition1(spec, beta, grid).verdict != Verdict::PASS) {
                    ok = false;
                    bad += name + " ";
                }
            }
            EnvironmentSpec sq(SquaresLattice{2.0}, 1.5);
            ConditionReport s = check_condition1(sq, beta, sq_grid);
            if (s.verdict != Verdict::FAIL) {
                ok = false;
                bad += "squares-verdict ";
            }
            for (int k = 2; k <= 5; ++k) {
                double witness = 0.0;
                for (const auto& [A, ratio] : s.evidence)
                    if (A == double(k) * k) witness = ratio;
                if (witness <= std::exp(beta * (2.0 * k + 1)) / 2) {
                    ok = false;
                    bad += "squares-witness-k" + std::to_string(k) + " ";
                }
            }
        }
        o.pass = ok;
        o.detail = ok ? "4x PASS + squares FAIL with witnesses" : bad;
        return o;
    });

    criterion(6, "sufficient tail criteria battery", 60.0, [] {
        Outcome o;
        auto lin = [](double a, double b, int n) {
            std::vector<double> g(n);
            for (int i = 0; i < n; ++i) g[i] = a + (b - a) * i / (n - 1);
            return g;
        };
        bool ok = true;
        std::string bad;
        auto want = [&](const char* name, const ConditionReport& r, Verdict v) {
            if (r.verdict != v) {
                ok = false;
                bad += std::string(name) + " ";
            }
        };
        want("poisson-i",
             check_prop_i(EnvironmentSpec(Poisson{1.0}, 4.0), 0.5, 1.0, 1.5,
                          lin(2, 26, 13), lin(1, 9, 9)),
             Verdict::PASS);
        want("gaussian-ii", check_prop_ii(kGauss, lin(0.5, 8, 16)), Verdict::PASS);
        want("weibull-ii",
             check_prop_ii(EnvironmentSpec(Weibull{1.0, 2.0, 1.0}, 4.0), lin(0.5, 8, 16)),
             Verdict::PASS);
        want("exp-ii",
             check_prop_ii(TailFn([](double x) { return std::exp(-x); }),
                           lin(0.5, 10, 20)),
             Verdict::FAIL);
        want("gumbel-iii",
             check_prop_iii(EnvironmentSpec(GumbelNeg{0.0, 1.0}, 4.0), 2.0,
                            lin(0.5, 3, 11), lin(0.5, 3, 11)),
             Verdict::PASS);
        want("expexp-iii",
             check_prop_iii(TailFn([](double x) { return std::exp(-std::exp(x)); }), 2.0,
                            lin(0.5, 3, 11), lin(0.5, 3, 11)),
             Verdict::PASS);
        o.pass = ok;
        o.detail = ok ? "" : bad;
        return o;
    });

    criterion(7, "exceedance-count moment bounds", 120.0, [] {
        Outcome o;
        std::vector<std::vector<double>> profiles;
        for (int m : {2, 8, 32}) profiles.emplace_back(m, 1.0 / m);
        for (double q : {0.3, 0.5, 0.7}) {
            for (int len : {8, 16}) {
                std::vector<double> g(len);
                double s = 0;
                for (int i = 0; i < len; ++i) s += (g[i] = std::pow(q, i));
                for (double& x : g) x /= s;
                profiles.push_back(g);
            }
        }
        for (int dim : {1, 2, 3}) {
            ConeLattice lattice(dim, 10);
            for (uint64_t seed : {1u, 2u, 3u, 4u}) {
                PartitionState st = initial_state(lattice);
                double lambda = log_mgf(kGauss, 0.6);
                for (int t = 0; t < 10; ++t)
                    evolve_keyed(lattice, st, kGauss, seed, 0.6, lambda);
                profiles.push_back(endpoint_measure(st));
            }
        }
        // one light-tailed and one heavy-atom Y so every level A gets hits
        std::vector<std::pair<std::string, YSampler>> samplers;
        samplers.emplace_back("gaussian", y_sampler(kGauss, 1.2));
        samplers.emplace_back(
            "atom", y_sampler(EnvironmentSpec(TwoPoint{0.0, std::log(4096.0), 1.0 / 4096},
                                              8.0),
                              1.0));
        int violations = 0;
        std::map<double, int> capable_A;
        std::map<std::size_t, int> capable_profile;
        uint64_t key = 0;
        for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
            for (double A : {1.0, 2.0, 4.0, 8.0}) {
                for (const auto& [name, y] : samplers) {
                    ++key;
                    OvershootStats st = exceedance_moments(y, profiles[pi], A, 100000, key);
                    if (st.inconclusive)
                        st = exceedance_moments(y, profiles[pi], A, 1000000, key);
                    auto half = [](const CiValue& v) { return v.ci_hi - v.estimate; };
                    if (st.n_mean.estimate > 1.0 / A + 3 * half(st.n_mean)) ++violations;
                    if (st.inconclusive) continue;  // no conditional claim without hits
                    ++capable_A[A];
                    ++capable_profile[pi];
                    if (st.n_mean_cond.estimate > 2.0 + 3 * half(st.n_mean_cond))
                        ++violations;
                    if (st.n_sq_cond.estimate > 5.0 + 3 * half(st.n_sq_cond)) ++violations;
                }
            }
        }
        bool covered = capable_A.size() == 4 && capable_profile.size() >= 20;
        o.pass = violations == 0 && covered;
        o.detail = std::to_string(violations) + " bound violations, " +
                   std::to_string(capable_profile.size()) + "/" +
                   std::to_string(profiles.size()) + " profiles conditioned-capable";
        return o;
    });

    criterion(8, "per-sample truncation bound", 60.0, [] {
        Outcome o;
        auto y = y_sampler(kGauss, 0.8);
        int64_t conditioned = 0, violations = 0;
        for (auto [m, reps] : std::vector<std::pair<int, int64_t>>{{2, 2500000},
                                                                   {8, 1000000}}) {
            std::vector<double> w(m, 1.0 / m);
            auto stats = simulate_convex_overshoot(y, w, {2.0}, {1.0, 2.0}, reps, 88 + m);
            for (const auto& st : stats) {
                conditioned += st.ratio.n;
                violations += st.truncation_violations;
            }
        }
        o.pass = violations == 0 && conditioned >= 1000000;
        o.detail = std::to_string(violations) + " violations over " +
                   std::to_string(conditioned) + " conditioned samples";
        return o;
    });

    criterion(9, "uniform stopping-time overshoot ratio", 300.0, [] {
        Outcome o;
        std::vector<double> t_grid = {2, 4, 8, 16};
        std::vector<double> p_grid = {1.0, 1.5, 2.0};
        OvershootTable table = martingale_overshoot_experiment(
            kGauss, 0.3, 3, t_grid, p_grid, 200, 10000, 909, 2.0, 1, 3.2, 6);
        bool bounded = true;
        double max_ratio = 0.0;
        for (double p : p_grid) {
            std::vector<double> ratios;
            for (const auto& r : table.aggregated)
                if (r.p == p && r.hits > 0) ratios.push_back(r.ratio);
            for (double x : ratios) max_ratio = std::max(max_ratio, x);
            if (ratios.size() >= 2 && stabilization_verdict(ratios) == Verdict::FAIL)
                bounded = false;
        }
        std::string hits;
        int starved = 0;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            int64_t h = 0;
            for (const auto& r : table.aggregated)
                if (r.t == t_grid[i] && r.p == 1.0) h = r.hits;
            hits += "t=" + fmt("%g", t_grid[i]) + ":" + std::to_string(h) + " ";
            if (h == 0) ++starved;
        }
        bool identity_ok = table.max_identity_error <= 1e-12;
        o.pass = bounded && identity_ok && starved == 0;
        o.inconclusive = bounded && identity_ok && starved > 0;
        o.detail = "max ratio " + fmt("%.3f", max_ratio) + ", identity err " +
                   fmt("%.1e", table.max_identity_error) + ", hits " + hits +
                   (starved ? "(" + std::to_string(starved) + " thresholds starved)" : "");
        return o;
    });

    criterion(10, "weak/strong disorder contrast", 60.0, [] {
        Outcome o;
        bool plateau = true;
        double prev = second_moment_exact(kGauss, 0.3, 3, 100);
        for (int n = 110; n <= 200; n += 10) {
            double cur = second_moment_exact(kGauss, 0.3, 3, n);
            if (cur > prev * 1.001) plateau = false;
            prev = cur;
        }
        double growth = second_moment_exact(kGauss, 0.3, 3, 200) /
                        second_moment_exact(kGauss, 0.3, 3, 100);
        bool bounded = growth < 1.01;
        double d1 = second_moment_exact(kGauss, 1.0, 1, 100) /
                    second_moment_exact(kGauss, 1.0, 1, 10);
        o.pass = plateau && bounded && d1 > 10.0;
        o.detail = "d=3 growth " + fmt("%.5f", growth) + ", d=1 ratio " + fmt("%.1f", d1);
        return o;
    });

    criterion(11, "determinism and parallel invariance", 60.0, [] {
        Outcome o;
        fs::path base = fs::temp_directory_path() / "polymerlab_acceptance";
        fs::remove_all(base);
        ExperimentConfig cfg;
        cfg.command = Command::simulate;
        cfg.beta = 0.4;
        cfg.dim = 2;
        cfg.horizon = 30;
        cfg.replicas = 64;
        cfg.seed = 5;
        bool ok = true;
        std::string first;
        for (auto [label, workers] : std::vector<std::pair<const char*, int>>{
                 {"w1-a", 1}, {"w1-b", 1}, {"w8", 8}}) {
            cfg.workers = workers;
            cfg.output_dir = (base / label).string();
            if (run(cfg) != 0) ok = false;
            std::string csv = slurp(base / label / "trace.csv");
            if (first.empty())
                first = csv;
            else if (csv != first)
                ok = false;
        }
        cfg.command = Command::overshoot;
        cfg.horizon = 30;
        cfg.grids["t"] = {1.3};
        cfg.grids["p"] = {1.0, 2.0};
        std::string over_first;
        for (auto [label, workers] : std::vector<std::pair<const char*, int>>{
                 {"o1", 1}, {"o8", 8}}) {
            cfg.workers = workers;
            cfg.output_dir = (base / label).string();
            int rc = run(cfg);
            if (rc == 1) ok = false;
            std::string csv = slurp(base / label / "overshoot.csv");
            if (over_first.empty())
                over_first = csv;
            else if (csv != over_first)
                ok = false;
        }
        fs::remove_all(base);
        o.pass = ok && !first.empty();
        o.detail = ok ? "identical artifacts across reruns and workers {1,8}" : "mismatch";
        return o;
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
