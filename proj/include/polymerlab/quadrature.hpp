#ifndef POLYMERLAB_QUADRATURE_HPP
#define POLYMERLAB_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

namespace polymerlab {

// Adaptive Gauss-Kronrod (G7/K15) on a finite interval, bisecting until the
// local K15-G7 discrepancy is below the tolerance share.
namespace detail {

// K15 abscissae/weights on [-1,1]; odd-index nodes form the embedded G7 rule.
inline constexpr double kron_x[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double kron_w[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double gauss_w[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870};

template <typename F>
void gk15(const F& f, double a, double b, double& kron, double& err) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 15; ++i) {
        double v = f(c + h * kron_x[i]);
        k += kron_w[i] * v;
        if (i % 2 == 1) g += gauss_w[i / 2] * v;
    }
    kron = k * h;
    err = std::fabs((k - g) * h);
}

template <typename F>
double adaptive(const F& f, double a, double b, double abs_tol, int depth) {
    double kron, err;
    gk15(f, a, b, kron, err);
    if (err <= abs_tol || depth >= 48) {
        if (depth >= 48 && err > 1e3 * abs_tol)
            throw std::runtime_error("quadrature failed to converge");
        return kron;
    }
    double m = 0.5 * (a + b);
    return adaptive(f, a, m, 0.5 * abs_tol, depth + 1) +
           adaptive(f, m, b, 0.5 * abs_tol, depth + 1);
}

}  // namespace detail

template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12) {
    if (!(b > a)) return 0.0;
    return detail::adaptive(f, a, b, abs_tol, 0);
}

// Integral over [a, inf): spans [a, a+s], [a+s, a+3s], ... with the span
// doubled until the latest contribution is below 1e-12 of the running total.
template <typename F>
double integrate_tail(const F& f, double a, double span0 = 1.0, double abs_tol = 1e-12) {
    double total = 0.0, lo = a, span = span0;
    for (int iter = 0; iter < 200; ++iter) {
        double piece = integrate(f, lo, lo + span, abs_tol);
        total += piece;
        if (iter > 2 && std::fabs(piece) < 1e-12 * std::max(std::fabs(total), 1e-300))
            return total;
        lo += span;
        span *= 2.0;
    }
    throw std::runtime_error("tail quadrature failed to converge");
}

// Integral over (-inf, b], mirrored version of integrate_tail.
template <typename F>
double integrate_lower_tail(const F& f, double b, double span0 = 1.0, double abs_tol = 1e-12) {
    auto g = [&](double x) { return f(2.0 * b - x); };
    return integrate_tail(g, b, span0, abs_tol);
}

}  // namespace polymerlab

#endif
