#include "eubrl/special.hpp"

#include <cmath>
#include <stdexcept>

namespace eubrl {

double digamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("digamma: argument must be positive");
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    // Asymptotic series with Bernoulli coefficients.
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = std::log(x) - 0.5 * inv;
    series -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
              inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    return result + series;
}

double lambert_w_m1(double x) {
    const double min_x = -std::exp(-1.0);
    if (x < min_x - 1e-15 || x >= 0.0)
        throw std::invalid_argument("lambert_w_m1: argument must lie in [-1/e, 0)");
    if (x <= min_x) return -1.0;
    // f(w) = w*exp(w) is strictly decreasing on (-inf, -1]; bracket the root.
    double lo = -1.0;
    double hi = -1.0;
    while (hi * std::exp(hi) < x) hi *= 2.0;  // hi walks left until f(hi) >= x
    std::swap(lo, hi);                        // now f(lo) >= x >= f(hi), lo < hi <= -1
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid * std::exp(mid) > x)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14) break;
    }
    double w = 0.5 * (lo + hi);
    // Newton polish on g(w) = w*exp(w) - x, g'(w) = (1+w)exp(w).
    for (int i = 0; i < 8; ++i) {
        const double ew = std::exp(w);
        const double g = w * ew - x;
        const double gp = (1.0 + w) * ew;
        if (gp == 0.0) break;
        const double step = g / gp;
        w -= step;
        if (std::abs(step) < 1e-13) break;
    }
    return w;
}

}  // namespace eubrl
