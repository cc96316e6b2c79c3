#pragma once

namespace eubrl {

/// Digamma function, accurate to ~1e-13 for arguments >= 1e-3
/// (recurrence lift below 10, asymptotic series above).
double digamma(double x);

/// Lower branch W_{-1} of the Lambert W function on [-1/e, 0):
/// the solution w <= -1 of w*exp(w) = x. Bisection plus Newton polish,
/// absolute tolerance 1e-12.
double lambert_w_m1(double x);

}  // namespace eubrl
