#include "gmac/model.hpp"

#include <cmath>

namespace gmac {

void check_source(const SourceParams& src) {
    if (!(src.sigma2 > 0.0) || !std::isfinite(src.sigma2)) {
        throw NonPositiveVariance("source variance must be positive and finite");
    }
    if (!(src.rho >= 0.0) || !(src.rho < 1.0)) {
        throw DegenerateCorrelation("normalized correlation must lie in [0, 1)");
    }
}

void check_channel(const MacChannel& ch) {
    if (!(ch.p1 > 0.0) || !(ch.p2 > 0.0) || !(ch.noise > 0.0) || !std::isfinite(ch.p1) ||
        !std::isfinite(ch.p2) || !std::isfinite(ch.noise)) {
        throw OutOfDomain("channel powers and noise variance must be positive and finite");
    }
}

std::pair<SourceParams, ScaleBack> normalize_source(double sigma1_sq, double sigma2_sq,
                                                    double rho_raw) {
    if (!(sigma1_sq > 0.0) || !(sigma2_sq > 0.0) || !std::isfinite(sigma1_sq) ||
        !std::isfinite(sigma2_sq)) {
        throw NonPositiveVariance("source variances must be positive and finite");
    }
    if (!(std::fabs(rho_raw) < 1.0)) {
        throw DegenerateCorrelation("|rho| must be < 1");
    }
    SourceParams src;
    src.sigma2 = sigma1_sq;
    src.rho = std::fabs(rho_raw);
    ScaleBack sb;
    sb.alpha1 = 1.0;
    sb.alpha2 = sigma1_sq / sigma2_sq;  // scales sigma2_sq onto sigma1_sq
    sb.rho_sign = (rho_raw < 0.0) ? -1 : +1;
    return {src, sb};
}

DistortionPair denormalize_distortions(const DistortionPair& d, const ScaleBack& sb) {
    return DistortionPair{d.d1 / sb.alpha1, d.d2 / sb.alpha2};
}

std::pair<DistortionPair, MacChannel> timeshare(const DistortionPair& da, const MacChannel& cha,
                                                const DistortionPair& db, const MacChannel& chb,
                                                double lambda) {
    if (cha.noise != chb.noise) {
        throw MismatchedNoise("time-sharing requires both points to share the noise variance");
    }
    if (!(lambda >= 0.0) || !(lambda <= 1.0)) {
        throw OutOfDomain("lambda must lie in [0, 1]");
    }
    const double lb = 1.0 - lambda;
    DistortionPair d{lambda * da.d1 + lb * db.d1, lambda * da.d2 + lb * db.d2};
    MacChannel ch{lambda * cha.p1 + lb * chb.p1, lambda * cha.p2 + lb * chb.p2, cha.noise};
    return {d, ch};
}

}  // namespace gmac
