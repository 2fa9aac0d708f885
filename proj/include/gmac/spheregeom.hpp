#pragma once

#include <vector>

#include "gmac/errors.hpp"
#include "gmac/rng.hpp"

namespace gmac {

/// Shannon's sandwich on the normalized surface area of a polar cap of
/// half-angle phi on the R^n-sphere: lower = upper * (1 - tan^2(phi)/n),
/// floored at 0; upper is clamped at 1.
struct CapBounds {
    int n = 2;
    double phi = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Uniform point on the centered R^n-sphere of the given radius
/// (Gaussian draw, normalized; the norm is exact by construction).
std::vector<double> sample_sphere(int n, double radius, CounterRng& rng);

/// Cap-area ratio bounds C_n(phi)/C_n(pi). phi = pi/2 is rejected: both
/// bounds blow up with 1/cos(phi).
CapBounds cap_ratio_bounds(int n, double phi);

/// Gamma(x + 1/2)/Gamma(x). Uses the asymptotic series for large x and
/// exact log-gamma evaluation below the switch point.
double gamma_half_ratio(double x);

/// The five-term asymptotic series on its own (valid to ~1e-6 relative
/// for x >= 5) and the log-gamma reference, exposed for verification.
double gamma_half_ratio_series(double x);
double gamma_half_ratio_exact(double x);

/// log of P[cos angle(u, e) >= t] for u uniform on the R^n-sphere and a
/// fixed direction e, t in [-1, 1]. Evaluated through the regularized
/// incomplete beta function in log space, so tails around e^{-10^5} are
/// still meaningful.
double log_cap_fraction(int n, double t);

/// log of the regularized incomplete beta function I_x(a, b).
double log_beta_reg(double a, double b, double x);

}  // namespace gmac
