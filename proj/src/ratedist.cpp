#include "gmac/ratedist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gmac {

namespace {

double log2_pos(double x) { return std::max(0.0, std::log2(x)); }

DistortionPair clamped(const DistortionPair& d, double sigma2) {
    return DistortionPair{std::min(d.d1, sigma2), std::min(d.d2, sigma2)};
}

void check_positive(const DistortionPair& d) {
    if (!(d.d1 > 0.0) || !(d.d2 > 0.0) || !std::isfinite(d.d1) || !std::isfinite(d.d2)) {
        throw OutOfDomain("distortions must be positive and finite");
    }
}

}  // namespace

RdRegion classify_region(const DistortionPair& d_in, const SourceParams& src) {
    check_source(src);
    check_positive(d_in);
    const double s2 = src.sigma2;
    const double r2 = src.rho * src.rho;
    const DistortionPair d = clamped(d_in, s2);

    // Region1 is symmetric in (d1, d2): one coordinate sits at or above
    // the free line s2(1-rho^2) + rho^2 * other.
    if (d.d2 >= s2 * (1.0 - r2) + r2 * d.d1 || d.d1 >= s2 * (1.0 - r2) + r2 * d.d2) {
        return RdRegion::Region1;
    }
    if (d.d1 <= s2 * (1.0 - r2)) {
        const double bound = (s2 * (1.0 - r2) - d.d1) * s2 / (s2 - d.d1);
        if (d.d2 <= bound) return RdRegion::Region2;
    }
    return RdRegion::Region3;
}

double rd_rate(const DistortionPair& d_in, const SourceParams& src, bool allow_zero_limit) {
    check_source(src);
    if (allow_zero_limit && (d_in.d1 == 0.0 || d_in.d2 == 0.0)) {
        if (!(d_in.d1 >= 0.0) || !(d_in.d2 >= 0.0)) throw OutOfDomain("negative distortion");
        return std::numeric_limits<double>::infinity();
    }
    check_positive(d_in);
    const double s2 = src.sigma2;
    const double r2 = src.rho * src.rho;
    const DistortionPair d = clamped(d_in, s2);

    switch (classify_region(d, src)) {
        case RdRegion::Region1:
            return 0.5 * log2_pos(s2 / std::min(d.d1, d.d2));
        case RdRegion::Region2:
            return 0.5 * log2_pos(s2 * s2 * (1.0 - r2) / (d.d1 * d.d2));
        case RdRegion::Region3: {
            const double cross = src.rho * s2 - std::sqrt((s2 - d.d1) * (s2 - d.d2));
            const double denom = d.d1 * d.d2 - cross * cross;
            return 0.5 * log2_pos(s2 * s2 * (1.0 - r2) / denom);
        }
    }
    return 0.0;  // unreachable
}

double marginal_rd(double d, double sigma2) {
    if (!(d > 0.0) || !(sigma2 > 0.0)) throw OutOfDomain("marginal_rd needs d > 0, sigma2 > 0");
    return 0.5 * log2_pos(sigma2 / d);
}

std::pair<DistortionPair, WaterfillState> waterfill_forward(double c, double rate,
                                                            const SourceParams& src) {
    check_source(src);
    if (!(c > 0.0) || !std::isfinite(c)) throw OutOfDomain("scaling c must be positive");
    if (!(rate >= 0.0)) throw OutOfDomain("rate must be nonnegative");

    const double s2 = src.sigma2;
    const double rho = src.rho;
    const double c2 = c * c;
    // (1 - c^2)^2 + 4 rho^2 c^2 is the stable form of the discriminant.
    const double q = std::sqrt((1.0 - c2) * (1.0 - c2) + 4.0 * rho * rho * c2);

    WaterfillState st;
    st.c = c;
    st.rate = rate;
    st.lambda1 = 0.5 * s2 * (1.0 + c2 - q);
    st.lambda2 = 0.5 * s2 * (1.0 + c2 + q);
    // a1^2 = (q + c^2 - 1) / (2q); degenerate only at rho = 0, c = 1
    // where the eigenvalues coincide and the split is immaterial.
    st.a1_sq = (q > 0.0) ? std::clamp((q + c2 - 1.0) / (2.0 * q), 0.0, 1.0) : 0.5;

    // Reverse waterfilling of `rate` bits over (lambda1, lambda2).
    const double both = std::sqrt(st.lambda1 * st.lambda2) * std::exp2(-rate);
    if (both <= st.lambda1) {
        st.delta1 = both;
        st.delta2 = both;
    } else {
        st.delta1 = st.lambda1;
        st.delta2 = st.lambda2 * std::exp2(-2.0 * rate);
    }

    const double a1s = st.a1_sq;
    const double a2s = 1.0 - st.a1_sq;
    DistortionPair d;
    d.d1 = a1s * st.delta1 + a2s * st.delta2;
    d.d2 = (a2s * st.delta1 + a1s * st.delta2) / c2;
    return {d, st};
}

double waterfill_oracle_rate(const DistortionPair& d, const SourceParams& src, double tol) {
    check_source(src);
    check_positive(d);
    if (!(tol > 0.0)) throw OutOfDomain("tol must be positive");
    if (!(d.d1 <= src.sigma2) || !(d.d2 <= src.sigma2)) {
        throw OutOfDomain("oracle targets must lie in (0, sigma2]^2");
    }

    constexpr int kMaxIter = 200;
    constexpr double kLogCMin = -6.0, kLogCMax = 6.0;
    constexpr double kRateMax = 60.0;

    // Inner solve: rate at which D1(c, rate) meets the target. D1 is
    // strictly decreasing in rate, from sigma2 at rate 0.
    const auto rate_for_d1 = [&](double c) {
        double lo = 0.0, hi = kRateMax;
        double mid = 0.0;
        for (int i = 0; i < kMaxIter; ++i) {
            mid = 0.5 * (lo + hi);
            const double d1 = waterfill_forward(c, mid, src).first.d1;
            if (d1 > d.d1) {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo < 1e-15) break;
        }
        return 0.5 * (lo + hi);
    };
    // Residual in D2 once D1 is matched; decreasing in c.
    const auto d2_residual = [&](double logc) {
        const double c = std::pow(10.0, logc);
        const double rate = rate_for_d1(c);
        return waterfill_forward(c, rate, src).first.d2 - d.d2;
    };

    double lo = kLogCMin, hi = kLogCMax;
    double flo = d2_residual(lo), fhi = d2_residual(hi);
    if (!(flo >= 0.0 && fhi <= 0.0)) {
        // Bracket by scan in case the endpoints do not straddle zero.
        constexpr int kScan = 64;
        bool found = false;
        double prev_x = lo, prev_f = flo;
        for (int i = 1; i <= kScan; ++i) {
            const double x = kLogCMin + (kLogCMax - kLogCMin) * i / kScan;
            const double f = d2_residual(x);
            if (prev_f >= 0.0 && f <= 0.0) {
                lo = prev_x;
                hi = x;
                found = true;
                break;
            }
            prev_x = x;
            prev_f = f;
        }
        if (!found) {
            throw NoConvergence(
                "no scaling c balances the target pair; point lies on a flat Region1 boundary");
        }
    }

    double rate = 0.0;
    for (int i = 0; i < kMaxIter; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double f = d2_residual(mid);
        if (f >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-14) break;
    }
    const double c = std::pow(10.0, 0.5 * (lo + hi));
    rate = rate_for_d1(c);
    const DistortionPair got = waterfill_forward(c, rate, src).first;
    if (std::fabs(got.d1 - d.d1) > tol || std::fabs(got.d2 - d.d2) > tol) {
        throw NoConvergence("waterfill oracle did not reach the target within tol");
    }
    return rate;
}

}  // namespace gmac
