#pragma once

#include <utility>
#include <vector>

#include "gmac/errors.hpp"

namespace gmac {

/// Memoryless bivariate Gaussian source after normalization: both
/// components share the variance sigma2 and the correlation coefficient
/// is nonnegative. rho = 1 is rejected throughout; every scheme formula
/// divides by 1 - rho^2 (or its rate-dependent analogue) and degenerates
/// there.
struct SourceParams {
    double sigma2 = 1.0;  // common component variance, > 0
    double rho = 0.0;     // correlation coefficient in [0, 1)
};

/// Record of the variance scaling and correlation sign flip applied by
/// normalize_source, so distortions can be mapped back to the original
/// source coordinates.
struct ScaleBack {
    double alpha1 = 1.0;  // variance ratio applied to component 1
    double alpha2 = 1.0;  // variance ratio applied to component 2
    int rho_sign = +1;    // sign of the raw correlation coefficient
};

/// Two-user Gaussian MAC: Y = X1 + X2 + Z with E[X_i^2] <= p_i and
/// Z ~ N(0, noise).
struct MacChannel {
    double p1 = 1.0;
    double p2 = 1.0;
    double noise = 1.0;
};

struct DistortionPair {
    double d1 = 0.0;
    double d2 = 0.0;
};

struct RatePair {
    double r1 = 0.0;  // bits per source symbol
    double r2 = 0.0;
};

void check_source(const SourceParams& src);
void check_channel(const MacChannel& ch);

/// Reduce a general bivariate Gaussian source (sigma1_sq, sigma2_sq,
/// rho_raw) to the equal-variance, nonnegative-correlation form used by
/// all closed-form results. The common variance is kept equal to
/// sigma1_sq (it is not forced to 1). |rho_raw| = 1 is rejected.
std::pair<SourceParams, ScaleBack> normalize_source(double sigma1_sq, double sigma2_sq,
                                                    double rho_raw);

/// Map distortions computed for the normalized source back to the
/// original coordinates. The sign flip does not affect squared error.
DistortionPair denormalize_distortions(const DistortionPair& d, const ScaleBack& sb);

/// Convex combination of two operating points sharing the same noise
/// variance: distortions and powers mix componentwise with weight
/// lambda on the first point.
std::pair<DistortionPair, MacChannel> timeshare(const DistortionPair& da, const MacChannel& cha,
                                                const DistortionPair& db, const MacChannel& chb,
                                                double lambda);

}  // namespace gmac
