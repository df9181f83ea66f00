#pragma once

// Small numeric kernels shared by the risk and negotiation code: log-space
// binomial probabilities, deterministic quadrature, and root bracketing.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oatf {

// log C(n, k) via lgamma; exact enough for n in the hundreds.
inline double log_choose(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("log_choose: k outside [0,n]");
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// P(X = k) for X ~ Binomial(n, p), computed in log space so that extreme
// tails never underflow prematurely.
inline double binomial_pmf(int n, int k, double p) {
    if (n < 0) throw std::invalid_argument("binomial_pmf: n must be non-negative");
    if (k < 0 || k > n) return 0.0;
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial_pmf: p outside [0,1]");
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    const double lp = log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
    return std::exp(lp);
}

// Full pmf table for m = 0..n.  Risk evaluation sums deterministic functions
// of the attendee count against this table.
inline std::vector<double> binomial_pmf_table(int n, double p) {
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) pmf[static_cast<std::size_t>(k)] = binomial_pmf(n, k, p);
    return pmf;
}

// P(X >= k0), summed from the smaller side of the tail for accuracy.
inline double binomial_tail_geq(int n, int k0, double p) {
    if (k0 <= 0) return 1.0;
    if (k0 > n) return 0.0;
    double acc = 0.0;
    if (k0 > n / 2) {
        for (int k = n; k >= k0; --k) acc += binomial_pmf(n, k, p);
    } else {
        for (int k = 0; k < k0; ++k) acc += binomial_pmf(n, k, p);
        acc = 1.0 - acc;
        if (acc < 0.0) acc = 0.0;
    }
    return acc;
}

// Composite Simpson rule on [a, b].  The integrands here (utility as a
// function of channel gain) are smooth, so a fixed panel count is plenty.
inline double integrate_simpson(const std::function<double(double)>& f, double a, double b,
                                int panels = 512) {
    if (panels < 2 || panels % 2 != 0) throw std::invalid_argument("integrate_simpson: panels must be even and >= 2");
    if (a == b) return 0.0;
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) {
        acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

// Mean of f over a uniform variable on [lo, hi]; collapses to f(lo) when the
// interval is a point.
inline double uniform_mean(const std::function<double(double)>& f, double lo, double hi) {
    if (lo == hi) return f(lo);
    return integrate_simpson(f, lo, hi) / (hi - lo);
}

// Smallest x in [lo, hi] with f(x) >= 0 for non-decreasing f, by bisection.
// Callers must check the bracket: f(lo) <= 0 <= f(hi).
inline double bisect_nondecreasing_root(const std::function<double(double)>& f, double lo, double hi,
                                        int iterations = 200) {
    double a = lo, b = hi;
    for (int i = 0; i < iterations && a < b; ++i) {
        const double mid = 0.5 * (a + b);
        if (f(mid) < 0.0) a = mid; else b = mid;
    }
    return 0.5 * (a + b);
}

} // namespace oatf
