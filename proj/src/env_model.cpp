#include "polymerlab/env_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "polymerlab/num.hpp"
#include "polymerlab/quadrature.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double squares_norm(double rate) {
    double z = 0.0;
    for (int k = 1;; ++k) {
        double term = std::exp(-rate * double(k) * double(k));
        z += term;
        if (term < 1e-15 * z || term < 1e-300) break;
    }
    return z;
}

// E[e^{beta w}; w > A] for tail-specified continuous families, by parts:
// e^{beta A} tail(A) + beta * int_A^inf e^{beta x} tail(x) dx.
template <typename Tail>
double exp_moment_above_by_tail(const Tail& tail, double beta, double A) {
    auto f = [&](double x) { return std::exp(beta * x) * tail(x); };
    double rough = integrate_tail(f, A, 1.0, 1e-10);
    double scale = std::max(1.0, std::fabs(rough));
    double integral = integrate_tail(f, A, 1.0, 1e-13 * scale);
    return std::exp(beta * A) * tail(A) + beta * integral;
}

double weibull_tail(const Weibull& w, double x) {
    if (x <= 0.0) return 1.0;
    return std::min(1.0, w.c * std::exp(-w.c_prime * std::pow(x, w.alpha)));
}

double gumbel_tail(const GumbelNeg& g, double x) {
    return std::exp(-std::exp((x - g.loc) / g.scale));
}

double poisson_pmf0(double mean) { return std::exp(-mean); }

}  // namespace

EnvironmentSpec::EnvironmentSpec(FamilyParams f, double beta_max_)
    : family(std::move(f)), beta_max(beta_max_) {
    if (!(beta_max > 0.0)) throw std::invalid_argument("beta_max must be > 0");
    std::visit(overloaded{
                   [](const Gaussian& g) {
                       if (!(g.stddev > 0.0)) throw std::invalid_argument("stddev must be > 0");
                   },
                   [](const TwoPoint& t) {
                       if (!(t.v_low < t.v_high))
                           throw std::invalid_argument("need v_low < v_high");
                       if (!(t.p_high > 0.0 && t.p_high < 1.0))
                           throw std::invalid_argument("need 0 < p_high < 1");
                   },
                   [](const Poisson& p) {
                       if (!(p.mean > 0.0)) throw std::invalid_argument("mean must be > 0");
                   },
                   [](const Weibull& w) {
                       if (!(w.alpha > 1.0)) throw std::invalid_argument("shape must be > 1");
                       if (!(w.c_prime > 0.0)) throw std::invalid_argument("scale must be > 0");
                       if (!(w.c > 0.0)) throw std::invalid_argument("prefactor must be > 0");
                   },
                   [](const GumbelNeg& g) {
                       if (!(g.scale > 0.0)) throw std::invalid_argument("scale must be > 0");
                   },
                   [this](const SquaresLattice& s) {
                       if (!(s.rate > 0.0)) throw std::invalid_argument("rate must be > 0");
                       if (!(beta_max < s.rate))
                           throw std::invalid_argument(
                               "SquaresLattice needs beta_max < rate for finite lambda");
                   },
               },
               family);
    if (auto* s = std::get_if<SquaresLattice>(&family)) s->norm = squares_norm(s->rate);
}

std::string EnvironmentSpec::family_name() const {
    return std::visit(overloaded{[](const Gaussian&) { return std::string("gaussian"); },
                                 [](const TwoPoint&) { return std::string("twopoint"); },
                                 [](const Poisson&) { return std::string("poisson"); },
                                 [](const Weibull&) { return std::string("weibull"); },
                                 [](const GumbelNeg&) { return std::string("gumbelneg"); },
                                 [](const SquaresLattice&) {
                                     return std::string("squareslattice");
                                 }},
                      family);
}

double log_mgf(const EnvironmentSpec& spec, double beta) {
    if (beta < 0.0 || beta > spec.beta_max)
        throw std::invalid_argument("beta outside [0, beta_max]");
    if (beta == 0.0) return 0.0;
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                return g.mean * beta + 0.5 * g.stddev * g.stddev * beta * beta;
            },
            [&](const TwoPoint& t) {
                double a = beta * t.v_low, b = beta * t.v_high;
                double m = std::max(a, b);
                return m + std::log((1.0 - t.p_high) * std::exp(a - m) +
                                    t.p_high * std::exp(b - m));
            },
            [&](const Poisson& p) { return p.mean * std::expm1(beta); },
            [&](const Weibull& w) {
                auto tail = [&](double x) { return weibull_tail(w, x); };
                return std::log(exp_moment_above_by_tail(tail, beta, 0.0));
            },
            [&](const GumbelNeg& g) {
                auto tail = [&](double x) { return gumbel_tail(g, x); };
                auto f = [&](double x) { return std::exp(beta * x) * tail(x); };
                double upper = exp_moment_above_by_tail(tail, beta, g.loc);
                double lower = beta * integrate_lower_tail(f, g.loc, 1.0, 1e-13) -
                               std::exp(beta * g.loc) * tail(g.loc);
                // by parts over (-inf, loc]: int e^{bx} dF = e^{b loc}F(loc) ... folded
                // into: E[e^{bw}] = beta * int_R e^{bx} tail(x) dx
                return std::log(upper + lower);
            },
            [&](const SquaresLattice& s) {
                double sum = 0.0;
                for (int k = 1;; ++k) {
                    double kk = double(k) * double(k);
                    double term = std::exp((beta - s.rate) * kk);
                    sum += term;
                    if (term < 1e-18 * sum || term < 1e-300) break;
                    if (k > 100000)
                        throw std::runtime_error("squares series failed to converge");
                }
                return std::log(sum / s.norm);
            },
        },
        spec.family);
}

double tail_prob(const EnvironmentSpec& spec, double x) {
    return std::visit(
        overloaded{
            [&](const Gaussian& g) { return normal_upper_tail((x - g.mean) / g.stddev); },
            [&](const TwoPoint& t) {
                if (x >= t.v_high) return 0.0;
                if (x >= t.v_low) return t.p_high;
                return 1.0;
            },
            [&](const Poisson& p) {
                if (x < 0.0) return 1.0;
                int kmin = static_cast<int>(std::floor(x)) + 1;
                if (kmin <= p.mean) {
                    double term = poisson_pmf0(p.mean), lower = 0.0;
                    for (int k = 0; k < kmin; ++k) {
                        lower += term;
                        term *= p.mean / double(k + 1);
                    }
                    return 1.0 - lower;
                }
                double term = std::exp(-p.mean + kmin * std::log(p.mean) -
                                       std::lgamma(double(kmin) + 1.0));
                double sum = 0.0;
                for (int k = kmin;; ++k) {
                    sum += term;
                    term *= p.mean / double(k + 1);
                    if (term < 1e-18 * sum || term < 1e-300) break;
                }
                return sum;
            },
            [&](const Weibull& w) { return weibull_tail(w, x); },
            [&](const GumbelNeg& g) { return gumbel_tail(g, x); },
            [&](const SquaresLattice& s) {
                if (x < 1.0) return 1.0;
                int k0 = static_cast<int>(std::floor(std::sqrt(x))) + 1;
                while (double(k0 - 1) * double(k0 - 1) > x) --k0;  // guard fp rounding
                double sum = 0.0;
                for (int k = k0;; ++k) {
                    double term = std::exp(-s.rate * double(k) * double(k));
                    sum += term;
                    if (term < 1e-18 * sum || term < 1e-300) break;
                }
                return sum / s.norm;
            },
        },
        spec.family);
}

double conditional_exp_moment(const EnvironmentSpec& spec, double beta, double A) {
    if (beta < 0.0 || beta > spec.beta_max)
        throw std::invalid_argument("beta outside [0, beta_max]");
    double tail = tail_prob(spec, A);
    if (!(tail > 0.0)) throw std::invalid_argument("conditioning probability is zero");
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                double above =
                    std::exp(g.mean * beta + 0.5 * g.stddev * g.stddev * beta * beta) *
                    normal_upper_tail((A - g.mean - g.stddev * g.stddev * beta) / g.stddev);
                return above / tail;
            },
            [&](const TwoPoint& t) {
                double num = 0.0;
                if (t.v_low > A) num += (1.0 - t.p_high) * std::exp(beta * t.v_low);
                if (t.v_high > A) num += t.p_high * std::exp(beta * t.v_high);
                return num / tail;
            },
            [&](const Poisson& p) {
                int kmin = std::max(0, static_cast<int>(std::floor(A)) + 1);
                double log_term =
                    -p.mean + kmin * std::log(p.mean) - std::lgamma(double(kmin) + 1.0);
                double peak = p.mean * std::exp(beta);  // term ratio < 1 beyond here
                double sum = 0.0;
                for (int k = kmin;; ++k) {
                    sum += std::exp(log_term + beta * k);
                    log_term += std::log(p.mean) - std::log(double(k + 1));
                    double term = std::exp(log_term + beta * (k + 1));
                    if (k > peak && (term < 1e-18 * sum || term < 1e-300)) break;
                }
                return sum / tail;
            },
            [&](const Weibull& w) {
                auto t = [&](double x) { return weibull_tail(w, x); };
                return exp_moment_above_by_tail(t, beta, std::max(A, 0.0)) / tail;
            },
            [&](const GumbelNeg& g) {
                auto t = [&](double x) { return gumbel_tail(g, x); };
                return exp_moment_above_by_tail(t, beta, A) / tail;
            },
            [&](const SquaresLattice& s) {
                int k0 = std::max(1, static_cast<int>(std::floor(std::sqrt(std::max(A, 0.0)))) + 1);
                while (double(k0 - 1) * double(k0 - 1) > A && k0 > 1) --k0;
                while (double(k0) * double(k0) <= A) ++k0;
                double sum = 0.0;
                for (int k = k0;; ++k) {
                    double kk = double(k) * double(k);
                    double term = std::exp((beta - s.rate) * kk);
                    sum += term;
                    if (term < 1e-18 * sum || term < 1e-300) break;
                }
                return sum / s.norm / tail;
            },
        },
        spec.family);
}

double sample_omega(const EnvironmentSpec& spec, double u) {
    return std::visit(
        overloaded{
            [&](const Gaussian& g) { return g.mean + g.stddev * inv_normal_cdf(u); },
            [&](const TwoPoint& t) { return u < t.p_high ? t.v_high : t.v_low; },
            [&](const Poisson& p) {
                double term = poisson_pmf0(p.mean), cum = term;
                int k = 0;
                while (u > cum && k < 100000) {
                    ++k;
                    term *= p.mean / double(k);
                    cum += term;
                }
                return double(k);
            },
            [&](const Weibull& w) {
                if (u >= std::min(1.0, w.c)) return 0.0;
                return std::pow(std::log(w.c / u) / w.c_prime, 1.0 / w.alpha);
            },
            [&](const GumbelNeg& g) { return g.loc + g.scale * std::log(-std::log(u)); },
            [&](const SquaresLattice& s) {
                double cum = 0.0;
                for (int k = 1; k < 100000; ++k) {
                    cum += std::exp(-s.rate * double(k) * double(k)) / s.norm;
                    if (u <= cum) return double(k) * double(k);
                }
                return 1e10;  // unreachable for u < 1
            },
        },
        spec.family);
}

double EnvField::at(const ConeLattice& lattice, int t, const Coords& x) const {
    int32_t idx = lattice.level(t).site_index(x);
    if (idx < 0) throw std::out_of_range("site outside the reachable cone");
    return values[t][idx];
}

EnvField sample_field(const EnvironmentSpec& spec, const ConeLattice& lattice,
                      uint64_t seed, int64_t site_budget) {
    if (lattice.total_sites() > site_budget)
        throw std::runtime_error("cone size exceeds the memory budget");
    EnvField field;
    field.dim = lattice.dim();
    field.horizon = lattice.horizon();
    field.seed = seed;
    field.values.resize(lattice.horizon() + 1);
    for (int t = 1; t <= lattice.horizon(); ++t) {
        const ConeLevel& lv = lattice.level(t);
        std::vector<double>& row = field.values[t];
        row.resize(lv.n_sites);
        for (int64_t cell : lv.nonempty_cells) {
            const ConeLevel::Row& r = lv.rows[cell];
            Coords x{};
            int64_t rem = cell;
            for (int j = 0; j + 1 < lv.dim; ++j) {
                x[j] = static_cast<int>(rem % (2 * lv.extent + 1)) - lv.extent;
                rem /= 2 * lv.extent + 1;
            }
            for (int xd = r.lo; xd <= r.hi; xd += 2) {
                x[lv.dim - 1] = xd;
                double u = site_uniform(seed, t, pack_coords(x, lv.dim));
                row[r.start + (xd - r.lo) / 2] = sample_omega(spec, u);
            }
        }
    }
    return field;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::map<std::string, std::string> environment_to_config(const EnvironmentSpec& spec) {
    std::map<std::string, std::string> kv;
    kv["family"] = spec.family_name();
    kv["beta_max"] = format_double(spec.beta_max);
    std::visit(overloaded{
                   [&](const Gaussian& g) {
                       kv["mean"] = format_double(g.mean);
                       kv["stddev"] = format_double(g.stddev);
                   },
                   [&](const TwoPoint& t) {
                       kv["v_low"] = format_double(t.v_low);
                       kv["v_high"] = format_double(t.v_high);
                       kv["p_high"] = format_double(t.p_high);
                   },
                   [&](const Poisson& p) { kv["mean"] = format_double(p.mean); },
                   [&](const Weibull& w) {
                       kv["scale"] = format_double(w.c_prime);
                       kv["shape"] = format_double(w.alpha);
                       kv["prefactor"] = format_double(w.c);
                   },
                   [&](const GumbelNeg& g) {
                       kv["loc"] = format_double(g.loc);
                       kv["scale"] = format_double(g.scale);
                   },
                   [&](const SquaresLattice& s) { kv["rate"] = format_double(s.rate); },
               },
               spec.family);
    return kv;
}

namespace {

double want(const std::map<std::string, std::string>& kv, const std::string& key,
            std::vector<std::string>& seen) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("missing environment key: " + key);
    seen.push_back(key);
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric value for " + key + ": " + it->second);
    }
}

double want_or(const std::map<std::string, std::string>& kv, const std::string& key,
               double fallback, std::vector<std::string>& seen) {
    if (kv.find(key) == kv.end()) return fallback;
    return want(kv, key, seen);
}

}  // namespace

EnvironmentSpec environment_from_config(const std::map<std::string, std::string>& kv) {
    auto fam_it = kv.find("family");
    if (fam_it == kv.end()) throw std::invalid_argument("missing environment key: family");
    const std::string& fam = fam_it->second;
    std::vector<std::string> seen{"family", "beta_max"};
    FamilyParams params;
    if (fam == "gaussian")
        params = Gaussian{want_or(kv, "mean", 0.0, seen), want_or(kv, "stddev", 1.0, seen)};
    else if (fam == "twopoint")
        params = TwoPoint{want(kv, "v_low", seen), want(kv, "v_high", seen),
                          want(kv, "p_high", seen)};
    else if (fam == "poisson")
        params = Poisson{want(kv, "mean", seen)};
    else if (fam == "weibull")
        params = Weibull{want(kv, "scale", seen), want(kv, "shape", seen),
                         want_or(kv, "prefactor", 1.0, seen)};
    else if (fam == "gumbelneg")
        params = GumbelNeg{want_or(kv, "loc", 0.0, seen), want_or(kv, "scale", 1.0, seen)};
    else if (fam == "squareslattice")
        params = SquaresLattice{want(kv, "rate", seen)};
    else
        throw std::invalid_argument("unknown environment family: " + fam);
    double beta_max = want_or(kv, "beta_max", 4.0, seen);
    for (const auto& [key, val] : kv)
        if (std::find(seen.begin(), seen.end(), key) == seen.end())
            throw std::invalid_argument("unknown environment key: " + key);
    return EnvironmentSpec(params, beta_max);
}

}  // namespace polymerlab
