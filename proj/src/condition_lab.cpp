#include "polymerlab/condition_lab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "polymerlab/num.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/stats.hpp"

namespace polymerlab {

std::string to_string(ConditionId id) {
    switch (id) {
        case ConditionId::COND1: return "COND1";
        case ConditionId::COND2: return "COND2";
        case ConditionId::COND3: return "COND3";
        case ConditionId::PROP_I: return "PROP_I";
        case ConditionId::PROP_II: return "PROP_II";
        case ConditionId::PROP_III: return "PROP_III";
        case ConditionId::RV_Y: return "RV_Y";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::PASS: return "PASS";
        case Verdict::FAIL: return "FAIL";
        case Verdict::INCONCLUSIVE: return "INCONCLUSIVE";
    }
    return "?";
}

std::string ConditionReport::to_json() const {
    nlohmann::json j;
    j["condition_id"] = to_string(condition_id);
    j["verdict"] = to_string(verdict);
    j["constants"] = constants;
    j["tolerances"] = tolerances;
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : evidence) ev.push_back({e[0], e[1]});
    j["evidence"] = ev;
    if (!note.empty()) j["note"] = note;
    return j.dump(2);
}

Verdict stabilization_verdict(const std::vector<double>& ratios, double slack,
                              double* growth_rate) {
    if (growth_rate) *growth_rate = 0.0;
    const int n = static_cast<int>(ratios.size());
    if (n < 4) return Verdict::INCONCLUSIVE;
    double q[4];
    for (int quart = 0; quart < 4; ++quart) {
        int lo = quart * n / 4, hi = (quart + 1) * n / 4;
        double m = -1e300;
        for (int i = lo; i < hi; ++i) m = std::max(m, ratios[i]);
        q[quart] = m;
    }
    double head = std::max({q[0], q[1], q[2]});
    if (growth_rate && q[2] > 0.0 && q[3] > 0.0) *growth_rate = std::log(q[3] / q[2]);
    if (q[3] <= slack * head) return Verdict::PASS;
    bool growing = q[3] >= q[2] && q[2] >= q[1];
    if (growing && q[3] > 2.0 * head) return Verdict::FAIL;
    return Verdict::INCONCLUSIVE;
}

ConditionReport check_condition1(const EnvironmentSpec& spec, double beta,
                                 const std::vector<double>& A_grid) {
    ConditionReport rep;
    rep.condition_id = ConditionId::COND1;
    rep.tolerances["stabilization_slack"] = 1.05;
    std::vector<double> ratios;
    for (double A : A_grid) {
        double tail = tail_prob(spec, A);
        if (!(tail > 1e-300)) {
            rep.note = "tail underflow before stabilization";
            break;
        }
        double r = conditional_exp_moment(spec, beta, A) * std::exp(-beta * A);
        rep.evidence.push_back({A, r});
        ratios.push_back(r);
    }
    double growth = 0.0;
    rep.verdict = stabilization_verdict(ratios, 1.05, &growth);
    if (!ratios.empty()) {
        rep.constants["c1"] = *std::max_element(ratios.begin(), ratios.end());
        rep.constants["A1"] = A_grid.front();
    }
    rep.constants["growth_rate"] = growth;
    return rep;
}

Condition2Constants derive_condition2_constants(double A1_at_2beta, double c1_at_2beta,
                                                double beta, double lambda) {
    if (!(A1_at_2beta > 1.0) || !(c1_at_2beta > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("derive_condition2_constants: bad inputs");
    Condition2Constants out;
    out.c1_at_2beta = c1_at_2beta;
    out.A2 = std::exp(beta * A1_at_2beta - lambda);
    // following the proof lines: conditioning at omega = (log A + lambda)/beta
    // gives c1(2b) e^{2b (log A + lambda)/b} e^{-2 lambda} = c1(2b) A^2, i.e.
    // the lambda factors cancel exactly
    out.amplification = std::exp(2.0 * lambda) * std::exp(-2.0 * lambda);
    out.c2 = c1_at_2beta * out.amplification;
    return out;
}

double sample_Y(const EnvironmentSpec& spec, double beta, double lambda, double u) {
    return std::exp(beta * sample_omega(spec, u) - lambda);
}

double tail_prob_Y(const EnvironmentSpec& spec, double beta, double lambda, double y) {
    if (y <= 0.0) return 1.0;
    return tail_prob(spec, (std::log(y) + lambda) / beta);
}

ConditionReport check_condition2(const EnvironmentSpec& spec, double beta,
                                 const std::vector<double>& p_grid,
                                 const std::vector<double>& A_grid) {
    if (2.0 * beta > spec.beta_max)
        throw std::invalid_argument("Condition 2 needs lambda(2 beta) finite");
    ConditionReport rep;
    rep.condition_id = ConditionId::COND2;
    rep.tolerances["stabilization_slack"] = 1.05;
    double lambda = log_mgf(spec, beta);
    std::vector<double> ratios;
    for (double A : A_grid) {
        double omega_A = (std::log(A) + lambda) / beta;
        double tail = tail_prob(spec, omega_A);
        if (!(tail > 1e-300)) {
            rep.note = "tail underflow before stabilization";
            break;
        }
        double worst = 0.0;
        for (double p : p_grid) {
            // E[Y^p | Y > A] = e^{-p lambda} E[e^{p beta w} | w > omega_A]
            double m = std::exp(-p * lambda) *
                       conditional_exp_moment(spec, p * beta, omega_A);
            worst = std::max(worst, m / std::pow(A, p));
        }
        rep.evidence.push_back({A, worst});
        ratios.push_back(worst);
    }
    double growth = 0.0;
    rep.verdict = stabilization_verdict(ratios, 1.05, &growth);
    if (!ratios.empty()) {
        rep.constants["c2"] = *std::max_element(ratios.begin(), ratios.end());
        rep.constants["A2"] = A_grid.front();
    }
    rep.constants["growth_rate"] = growth;
    return rep;
}

ConditionReport check_condition3(const EnvironmentSpec& spec, double beta,
                                 const std::vector<std::vector<double>>& weight_profiles,
                                 const std::vector<double>& p_grid,
                                 const std::vector<double>& A_grid, int64_t replicas,
                                 uint64_t seed, double c3_candidate) {
    ConditionReport rep;
    rep.condition_id = ConditionId::COND3;
    rep.tolerances["stabilization_slack"] = 1.05;
    rep.tolerances["min_conditioned_samples"] = 100;
    double lambda = log_mgf(spec, beta);
    for (const auto& prof : weight_profiles) {
        double s = 0.0;
        for (double a : prof) s += a;
        if (std::fabs(s - 1.0) > 1e-12)
            throw std::invalid_argument("weight profile does not sum to 1");
    }

    bool starved = false;
    double worst_profile = -1.0, worst_value = -1.0;
    std::vector<double> ratios;
    for (double A : A_grid) {
        double worst = 0.0;
        for (std::size_t pi = 0; pi < weight_profiles.size(); ++pi) {
            const auto& prof = weight_profiles[pi];
            Sequence rng(hash_key(seed, 0xc0d3, pi));
            std::vector<Accumulator> acc(p_grid.size());
            int64_t hits = 0;
            for (int64_t r = 0; r < replicas; ++r) {
                double S = 0.0;
                for (double a : prof) S += a * sample_Y(spec, beta, lambda, rng.next_u01());
                if (S > A) {
                    ++hits;
                    for (std::size_t k = 0; k < p_grid.size(); ++k)
                        acc[k].add(std::pow(S, p_grid[k]));
                }
            }
            if (hits < 100) {
                starved = true;
                continue;
            }
            for (std::size_t k = 0; k < p_grid.size(); ++k) {
                double ub = (acc[k].mean() + acc[k].ci_half_width()) /
                            std::pow(A, p_grid[k]);
                if (ub > worst) {
                    worst = ub;
                    worst_value = ub;
                    worst_profile = double(pi);
                }
            }
        }
        rep.evidence.push_back({A, worst});
        ratios.push_back(worst);
    }
    rep.constants["worst_profile"] = worst_profile;
    rep.constants["worst_upper_bound"] = worst_value;
    if (starved) {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.note = "fewer than 100 conditioned samples at some grid point";
        return rep;
    }
    if (c3_candidate > 0.0) {
        rep.constants["c3"] = c3_candidate;
        rep.verdict = Verdict::PASS;
        for (double r : ratios)
            if (r > c3_candidate) rep.verdict = Verdict::FAIL;
    } else {
        double growth = 0.0;
        rep.verdict = stabilization_verdict(ratios, 1.05, &growth);
        rep.constants["growth_rate"] = growth;
        if (!ratios.empty())
            rep.constants["c3"] = *std::max_element(ratios.begin(), ratios.end());
    }
    return rep;
}

ConditionReport check_prop_i(const EnvironmentSpec& spec, double beta, double K, double M,
                             const std::vector<double>& x_grid,
                             const std::vector<double>& y_grid) {
    if (!(M > 2.0 * beta)) throw std::invalid_argument("need M > 2 beta");
    ConditionReport rep;
    rep.condition_id = ConditionId::PROP_I;
    rep.constants["K"] = K;
    rep.constants["M"] = M;
    rep.tolerances["stabilization_slack"] = 1.05;
    std::vector<double> ratios;
    bool underflow = false;
    for (double x : x_grid) {
        double tx = tail_prob(spec, x);
        if (!(tx > 1e-300)) {
            underflow = true;
            break;
        }
        double rho = 0.0;
        for (double y : y_grid) {
            if (y < K) continue;
            double t2 = tail_prob(spec, x + y);
            rho = std::max(rho, t2 * std::exp(M * y) / tx);
        }
        rep.evidence.push_back({x, rho});
        ratios.push_back(rho);
    }
    double growth = 0.0;
    Verdict v = stabilization_verdict(ratios, 1.05, &growth);
    rep.constants["growth_rate"] = growth;
    if (underflow && v == Verdict::PASS) {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.note = "tail underflow before stabilization";
    } else {
        rep.verdict = v;
    }
    if (!ratios.empty())
        rep.constants["bound"] = *std::max_element(ratios.begin(), ratios.end());
    return rep;
}

ConditionReport check_prop_ii(const TailFn& tail, const std::vector<double>& x_grid) {
    ConditionReport rep;
    rep.condition_id = ConditionId::PROP_II;
    rep.tolerances["convexity_tol"] = 1e-8;
    rep.tolerances["superlinearity_tol"] = 1e-9;
    const int n = static_cast<int>(x_grid.size());
    if (n < 4) {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.note = "grid too small";
        return rep;
    }
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) {
        double p = tail(x_grid[i]);
        if (!(p > 1e-300)) {
            rep.verdict = Verdict::INCONCLUSIVE;
            rep.note = "tail underflow";
            return rep;
        }
        f[i] = -std::log(p);
        rep.evidence.push_back({x_grid[i], f[i] / std::max(x_grid[i], 1e-12)});
    }
    bool convex = true;
    for (int i = 1; i + 1 < n; ++i) {
        double d1 = (f[i] - f[i - 1]) / (x_grid[i] - x_grid[i - 1]);
        double d2 = (f[i + 1] - f[i]) / (x_grid[i + 1] - x_grid[i]);
        if (d2 - d1 < -1e-8) {
            convex = false;
            rep.constants["convexity_witness_x"] = x_grid[i];
        }
    }
    bool superlinear = true;
    for (int i = n / 2; i + 1 < n; ++i) {
        double s0 = f[i] / x_grid[i], s1 = f[i + 1] / x_grid[i + 1];
        if (s1 <= s0 + 1e-9) {
            superlinear = false;
            rep.constants["superlinearity_witness_x"] = x_grid[i + 1];
        }
    }
    rep.constants["slope_end"] = f[n - 1] / x_grid[n - 1];
    rep.verdict = (convex && superlinear) ? Verdict::PASS : Verdict::FAIL;
    return rep;
}

ConditionReport check_prop_ii(const EnvironmentSpec& spec,
                              const std::vector<double>& x_grid) {
    return check_prop_ii([&](double x) { return tail_prob(spec, x); }, x_grid);
}

ConditionReport check_prop_iii(const TailFn& tail, double c_candidate,
                               const std::vector<double>& x_grid,
                               const std::vector<double>& y_grid) {
    if (!(c_candidate >= 1.0))
        throw std::invalid_argument("envelope constant must be >= 1");
    ConditionReport rep;
    rep.condition_id = ConditionId::PROP_III;
    rep.constants["c"] = c_candidate;
    rep.tolerances["supermultiplicativity_tol"] = 1e-9;
    const double c = c_candidate;
    // envelope c^{-1} e^{-c f} <= P <= c e^{-f/c} brackets f; normalize by the
    // geometric mean of the two bounds
    auto fhat = [&](double x, bool& ok) {
        double p = tail(x);
        if (!(p > 1e-300) || p >= 1.0) {
            ok = false;
            return 0.0;
        }
        double f_hi = -c * std::log(p / c);          // from the upper envelope
        double f_lo = -(std::log(p) + std::log(c)) / c;  // from the lower envelope
        if (!(f_lo > 0.0) || !(f_hi > 0.0)) {
            ok = false;
            return 0.0;
        }
        ok = true;
        return std::sqrt(f_lo * f_hi);
    };
    bool all_ok = true, monotone = true, supermult = true;
    double prev = -1.0;
    for (double x : x_grid) {
        bool ok = false;
        double fx = fhat(x, ok);
        if (!ok) {
            all_ok = false;
            continue;
        }
        rep.evidence.push_back({x, fx});
        if (prev >= 0.0 && fx <= prev) monotone = false;
        prev = fx;
    }
    for (double x : x_grid) {
        for (double y : y_grid) {
            bool ok1 = false, ok2 = false, ok3 = false;
            double fx = fhat(x, ok1), fy = fhat(y, ok2), fxy = fhat(x + y, ok3);
            if (!ok1 || !ok2 || !ok3) {
                all_ok = false;
                continue;
            }
            if (fxy < fx * fy * (1.0 - 1e-9)) {
                supermult = false;
                rep.constants["witness_x"] = x;
                rep.constants["witness_y"] = y;
                rep.constants["witness_deficit"] = fx * fy - fxy;
            }
        }
    }
    if (!all_ok && monotone && supermult) {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.note = "envelope not resolvable on part of the grid";
    } else {
        rep.verdict = (monotone && supermult) ? Verdict::PASS : Verdict::FAIL;
    }
    return rep;
}

ConditionReport check_prop_iii(const EnvironmentSpec& spec, double c_candidate,
                               const std::vector<double>& x_grid,
                               const std::vector<double>& y_grid) {
    return check_prop_iii([&](double x) { return tail_prob(spec, x); }, c_candidate,
                          x_grid, y_grid);
}

ConditionReport check_rv_Y(const EnvironmentSpec& spec, double beta, double K, double M,
                           const std::vector<double>& lambda_grid,
                           const std::vector<double>& y_grid) {
    if (!(K > 1.0) || !(M > 2.0)) throw std::invalid_argument("need K > 1 and M > 2");
    ConditionReport rep;
    rep.condition_id = ConditionId::RV_Y;
    rep.constants["K"] = K;
    rep.constants["M"] = M;
    rep.tolerances["stabilization_slack"] = 1.05;
    double lam = log_mgf(spec, beta);
    std::vector<double> ratios;
    bool underflow = false;
    for (double y : y_grid) {
        double ty = tail_prob_Y(spec, beta, lam, y);
        if (!(ty > 1e-300)) {
            underflow = true;
            break;
        }
        std::vector<double> lams = lambda_grid;
        for (double l = K; l * l <= y && lams.size() < 200; l *= 2.0) lams.push_back(l);
        double r = 0.0;
        for (double l : lams) {
            if (l < K) continue;
            double t2 = tail_prob_Y(spec, beta, lam, l * y);
            r = std::max(r, std::pow(l, M) * t2 / ty);
        }
        rep.evidence.push_back({y, r});
        ratios.push_back(r);
    }
    double growth = 0.0;
    Verdict v = stabilization_verdict(ratios, 1.05, &growth);
    rep.constants["growth_rate"] = growth;
    if (underflow && v != Verdict::FAIL) {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.note = "tail underflow before stabilization";
    } else {
        rep.verdict = v;
    }
    if (!ratios.empty())
        rep.constants["bound"] = *std::max_element(ratios.begin(), ratios.end());
    return rep;
}

}  // namespace polymerlab
