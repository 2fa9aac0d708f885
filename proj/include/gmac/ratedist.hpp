#pragma once

#include <utility>

#include "gmac/model.hpp"

namespace gmac {

/// The three cases of the bivariate Gaussian rate-distortion function.
/// Region1: the larger distortion is reachable for free through the
/// correlation, so only the smaller one costs rate. Region2: both
/// components are described independently after decorrelation. Region3:
/// the coupled boundary case in between.
enum class RdRegion { Region1, Region2, Region3 };

/// Intermediates of the scale-decorrelate-waterfill construction:
/// eigenvalues of cov(S1, c*S2), the eigenvector weight a1^2, and the
/// per-branch reverse-waterfilling distortions.
struct WaterfillState {
    double c = 1.0;
    double lambda1 = 0.0;  // smaller eigenvalue
    double lambda2 = 0.0;
    double a1_sq = 0.0;  // in [0, 1]
    double delta1 = 0.0;
    double delta2 = 0.0;
    double rate = 0.0;  // bits
};

/// Classify a distortion pair into its rate-distortion region.
/// Distortions above sigma2 are clamped to sigma2 first; boundary
/// points resolve with precedence Region1 > Region2 > Region3 (the rate
/// formulas agree on shared boundaries).
RdRegion classify_region(const DistortionPair& d, const SourceParams& src);

/// Bivariate rate-distortion function in bits per source symbol pair.
/// With allow_zero_limit, a zero distortion request returns +infinity
/// instead of throwing.
double rd_rate(const DistortionPair& d, const SourceParams& src, bool allow_zero_limit = false);

/// Single-component Gaussian rate-distortion function, (1/2)log2+(s2/d).
double marginal_rd(double d, double sigma2);

/// Forward map of the reverse-waterfilling construction: scale S2 by c,
/// decorrelate, spend `rate` bits by reverse waterfilling over the two
/// eigenvalues, and map the component distortions back to (D1, D2).
std::pair<DistortionPair, WaterfillState> waterfill_forward(double c, double rate,
                                                            const SourceParams& src);

/// Invert waterfill_forward numerically: find the rate at which some
/// scaling c reproduces the target pair to within tol componentwise.
/// Outer bisection runs on log10(c) against the achieved D2, inner
/// bisection on the rate against D1; both maps are monotone. Throws
/// NoConvergence for pairs on the flat Region1 boundary, which the
/// construction cannot reach.
double waterfill_oracle_rate(const DistortionPair& d, const SourceParams& src, double tol = 1e-9);

}  // namespace gmac
