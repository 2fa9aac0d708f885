#include "gmac/schemes.hpp"

#include <cmath>
#include <limits>

namespace gmac {

namespace {

void check_rates(const RatePair& r) {
    if (!(r.r1 >= 0.0) || !(r.r2 >= 0.0) || !std::isfinite(r.r1) || !std::isfinite(r.r2)) {
        throw OutOfDomain("rates must be nonnegative and finite");
    }
}

// Solve the symmetric 3x3 system K x = c by Gaussian elimination with
// partial pivoting. Returns the max-abs residual of the solution.
double solve3(const double k[3][3], const std::array<double, 3>& c, std::array<double, 3>& x) {
    double m[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m[i][j] = k[i][j];
        m[i][3] = c[i];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row) {
            if (std::fabs(m[row][col]) > std::fabs(m[piv][col])) piv = row;
        }
        if (m[piv][col] == 0.0) throw SingularK("K matrix is singular");
        if (piv != col) {
            for (int j = col; j < 4; ++j) std::swap(m[piv][j], m[col][j]);
        }
        for (int row = col + 1; row < 3; ++row) {
            const double f = m[row][col] / m[col][col];
            for (int j = col; j < 4; ++j) m[row][j] -= f * m[col][j];
        }
    }
    for (int i = 2; i >= 0; --i) {
        double s = m[i][3];
        for (int j = i + 1; j < 3; ++j) s -= m[i][j] * x[j];
        x[i] = s / m[i][i];
    }
    double res = 0.0;
    for (int i = 0; i < 3; ++i) {
        double s = -c[i];
        for (int j = 0; j < 3; ++j) s += k[i][j] * x[j];
        res = std::max(res, std::fabs(s));
    }
    return res;
}

}  // namespace

DistortionPair pt2pt_uncoded(double alpha, double beta, const SourceParams& src, double p,
                             double noise) {
    check_source(src);
    if (!(p > 0.0) || !(noise > 0.0)) throw OutOfDomain("power and noise must be positive");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw OutOfDomain("alpha, beta must be nonnegative");
    if (alpha == 0.0 && beta == 0.0) throw ZeroInput("(alpha, beta) = (0, 0) transmits nothing");

    const double s2 = src.sigma2;
    const double rho = src.rho;
    const double r2 = rho * rho;
    const double mix = alpha * alpha + 2.0 * rho * alpha * beta + beta * beta;
    const double pn2 = (p + noise) * (p + noise);
    DistortionPair d;
    d.d1 = s2 *
           (p * p * beta * beta * (1.0 - r2) +
            p * noise * (alpha * alpha + 2.0 * rho * alpha * beta + beta * beta * (2.0 - r2)) +
            noise * noise * mix) /
           (pn2 * mix);
    d.d2 = s2 *
           (p * p * alpha * alpha * (1.0 - r2) +
            p * noise * (beta * beta + 2.0 * rho * alpha * beta + alpha * alpha * (2.0 - r2)) +
            noise * noise * mix) /
           (pn2 * mix);
    return d;
}

double pt2pt_threshold_gamma(double d1, const SourceParams& src) {
    check_source(src);
    if (!(d1 > 0.0)) throw OutOfDomain("d1 must be positive");
    const double s2 = src.sigma2;
    const double r2 = src.rho * src.rho;
    const double edge = s2 * (1.0 - r2);
    if (d1 >= edge) return std::numeric_limits<double>::infinity();
    return (s2 * s2 * (1.0 - r2) - 2.0 * d1 * s2 * (1.0 - r2) + d1 * d1) / (d1 * (edge - d1));
}

DistortionPair mac_uncoded(const SourceParams& src, const MacChannel& ch) {
    check_source(src);
    check_channel(ch);
    const double s2 = src.sigma2;
    const double r2 = src.rho * src.rho;
    const double denom = ch.p1 + ch.p2 + 2.0 * src.rho * std::sqrt(ch.p1 * ch.p2) + ch.noise;
    return DistortionPair{s2 * ((1.0 - r2) * ch.p2 + ch.noise) / denom,
                          s2 * ((1.0 - r2) * ch.p1 + ch.noise) / denom};
}

OptimalityCheck mac_uncoded_is_optimal(const SourceParams& src, const MacChannel& ch) {
    check_source(src);
    check_channel(ch);
    const double r2 = src.rho * src.rho;
    const double one_m = 1.0 - r2;
    const double lhs = ch.p2 * one_m * one_m * (ch.p1 + 2.0 * src.rho * std::sqrt(ch.p1 * ch.p2));
    const double rhs = ch.noise * r2 * (2.0 * ch.p2 * one_m + ch.noise);
    return OptimalityCheck{lhs <= rhs, rhs - lhs};
}

double rho_tilde(const RatePair& r, double rho) {
    check_rates(r);
    return rho * std::sqrt((1.0 - std::exp2(-2.0 * r.r1)) * (1.0 - std::exp2(-2.0 * r.r2)));
}

DistortionPair vq_distortions(const RatePair& r, const SourceParams& src) {
    check_source(src);
    check_rates(r);
    const double s2 = src.sigma2;
    const double r2 = src.rho * src.rho;
    const double t1 = std::exp2(-2.0 * r.r1);
    const double t2 = std::exp2(-2.0 * r.r2);
    const double rt = rho_tilde(r, src.rho);
    const double denom = 1.0 - rt * rt;
    return DistortionPair{s2 * t1 * (1.0 - r2 * (1.0 - t2)) / denom,
                          s2 * t2 * (1.0 - r2 * (1.0 - t1)) / denom};
}

RateFeasibility vq_rate_feasible(const RatePair& r, const SourceParams& src,
                                 const MacChannel& ch) {
    check_source(src);
    check_channel(ch);
    check_rates(r);
    const double rt = rho_tilde(r, src.rho);
    const double one_m = 1.0 - rt * rt;
    const double n = ch.noise;
    RateFeasibility out;
    out.slacks[0] = 0.5 * std::log2((ch.p1 * one_m + n) / (n * one_m)) - r.r1;
    out.slacks[1] = 0.5 * std::log2((ch.p2 * one_m + n) / (n * one_m)) - r.r2;
    out.slacks[2] =
        0.5 * std::log2((ch.p1 + ch.p2 + 2.0 * rt * std::sqrt(ch.p1 * ch.p2) + n) / (n * one_m)) -
        (r.r1 + r.r2);
    out.feasible = out.slacks[0] > 0.0 && out.slacks[1] > 0.0 && out.slacks[2] > 0.0;
    return out;
}

VqDerived vq_estimator_coeffs(const RatePair& r, double rho) {
    check_rates(r);
    if (!(rho >= 0.0) || !(rho < 1.0)) throw DegenerateCorrelation("rho must lie in [0, 1)");
    const double t1 = std::exp2(-2.0 * r.r1);
    const double t2 = std::exp2(-2.0 * r.r2);
    VqDerived v;
    v.rho_tilde = rho * std::sqrt((1.0 - t1) * (1.0 - t2));
    const double denom = 1.0 - v.rho_tilde * v.rho_tilde;
    v.gamma11 = (1.0 - rho * rho * (1.0 - t2)) / denom;
    v.gamma12 = rho * t1;
    v.gamma21 = (1.0 - rho * rho * (1.0 - t1)) / denom;
    v.gamma22 = rho * t2;
    return v;
}

VqDerived vq_derived(const RatePair& r, const SourceParams& src, const MacChannel& ch) {
    check_source(src);
    check_channel(ch);
    VqDerived v = vq_estimator_coeffs(r, src.rho);
    const double e1 = 1.0 - std::exp2(-2.0 * r.r1);
    const double e2 = 1.0 - std::exp2(-2.0 * r.r2);
    v.alpha1 = (e1 > 0.0) ? std::sqrt(ch.p1 / (src.sigma2 * e1)) : 0.0;
    v.alpha2 = (e2 > 0.0) ? std::sqrt(ch.p2 / (src.sigma2 * e2)) : 0.0;
    return v;
}

SuperpositionDerived sp_derive(const SuperpositionConfig& cfg, const SourceParams& src,
                               const MacChannel& ch) {
    check_source(src);
    check_channel(ch);
    check_rates(cfg.rates);
    if (cfg.rates.r1 < kSuperpositionRateMin || cfg.rates.r2 < kSuperpositionRateMin) {
        throw SingularK("rates below the superposition minimum make K singular");
    }
    const double s2 = src.sigma2;
    const double rho = src.rho;
    const double t1 = std::exp2(-2.0 * cfg.rates.r1);
    const double t2 = std::exp2(-2.0 * cfg.rates.r2);
    const double e1 = 1.0 - t1;
    const double e2 = 1.0 - t2;

    if (!(cfg.alpha1 >= 0.0) || !(cfg.alpha2 >= 0.0) ||
        cfg.alpha1 * cfg.alpha1 * s2 > ch.p1 * (1.0 + 1e-12) ||
        cfg.alpha2 * cfg.alpha2 * s2 > ch.p2 * (1.0 + 1e-12)) {
        throw InfeasibleAlpha("alpha_i must lie in [0, sqrt(P_i/sigma2)]");
    }

    SuperpositionDerived d;
    d.rates = cfg.rates;
    d.rho_tilde = rho * std::sqrt(e1 * e2);
    const double rt = d.rho_tilde;
    const double rt2 = rt * rt;

    const double a1 = cfg.alpha1, a2 = cfg.alpha2;
    // beta_i from the power constraint; the alpha check above keeps the
    // radicand nonnegative.
    d.beta1 = std::sqrt(std::max(0.0, ch.p1 - a1 * a1 * s2 * t1) / (s2 * e1)) - a1;
    d.beta2 = std::sqrt(std::max(0.0, ch.p2 - a2 * a2 * s2 * t2) / (s2 * e2)) - a2;
    const double b1 = d.beta1, b2 = d.beta2;

    // Regression weights of S_i on the codeword pair, as the theorem
    // states them.
    d.a1 = rho * t1 * e2 / (e2 - 2.0 * rt2 * std::sqrt(e1 * e2) + rt2 * e1);
    d.a2 = rho * t2 * e1 / (e1 - 2.0 * rt2 * std::sqrt(e1 * e2) + rt2 * e2);

    d.beta1p = a1 * (1.0 - d.a1 * rt) + b1 + a2 * d.a2;
    d.beta2p = a2 * (1.0 - d.a2 * rt) + b2 + a1 * d.a1;

    const double k11 = s2 * e1;
    const double k22 = s2 * e2;
    const double k12 = s2 * rho * e1 * e2;
    d.nu1 = s2 - (1.0 - d.a1 * rt) * (1.0 - d.a1 * rt) * k11 -
            2.0 * (1.0 - d.a1 * rt) * d.a1 * k12 - d.a1 * d.a1 * k22;
    d.nu2 = s2 - (1.0 - d.a2 * rt) * (1.0 - d.a2 * rt) * k22 -
            2.0 * (1.0 - d.a2 * rt) * d.a2 * k12 - d.a2 * d.a2 * k11;
    d.nu3 = rho * s2 - ((1.0 - d.a1 * rt) * (1.0 - d.a2 * rt) + d.a1 * d.a2) * k12 -
            (1.0 - d.a1 * rt) * d.a2 * k11 - (1.0 - d.a2 * rt) * d.a1 * k22;
    d.n_prime = a1 * a1 * d.nu1 + a2 * a2 * d.nu2 + 2.0 * a1 * a2 * d.nu3 + ch.noise;

    d.k11 = k11;
    d.k12 = k12;
    d.k22 = k22;
    d.k13 = (a1 + b1 + a2 * rho) * k11 + b2 * k12;
    d.k23 = (a2 + b2 + a1 * rho) * k22 + b1 * k12;
    d.k33 = a1 * a1 * s2 + 2.0 * a1 * b1 * k11 + 2.0 * a1 * a2 * rho * s2 +
            2.0 * a1 * b2 * rho * k22 + b1 * b1 * k11 + 2.0 * b1 * a2 * rho * k11 +
            2.0 * b1 * b2 * k12 + 2.0 * a2 * b2 * k22 + a2 * a2 * s2 + b2 * b2 * k22 + ch.noise;

    d.c1 = {k11, rho * k22, (a1 + a2 * rho) * s2 + b1 * k11 + b2 * rho * k22};
    d.c2 = {rho * k11, k22, (a2 + a1 * rho) * s2 + b1 * rho * k11 + b2 * k22};

    const double K[3][3] = {{d.k11, d.k12, d.k13}, {d.k12, d.k22, d.k23}, {d.k13, d.k23, d.k33}};
    d.residual1 = solve3(K, d.c1, d.gamma1);
    d.residual2 = solve3(K, d.c2, d.gamma2);
    return d;
}

DistortionPair sp_distortions(const SuperpositionDerived& derived, const SourceParams& src) {
    check_source(src);
    const auto dot = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    };
    return DistortionPair{src.sigma2 - dot(derived.gamma1, derived.c1),
                          src.sigma2 - dot(derived.gamma2, derived.c2)};
}

RateFeasibility sp_rate_feasible(const SuperpositionDerived& derived, const SourceParams& src) {
    check_source(src);
    const double rt = derived.rho_tilde;
    const double one_m = 1.0 - rt * rt;
    const double np = derived.n_prime;
    const double g1 = derived.beta1p * derived.beta1p * derived.k11;
    const double g2 = derived.beta2p * derived.beta2p * derived.k22;
    RateFeasibility out;
    out.slacks[0] = 0.5 * std::log2((g1 * one_m + np) / (np * one_m)) - derived.rates.r1;
    out.slacks[1] = 0.5 * std::log2((g2 * one_m + np) / (np * one_m)) - derived.rates.r2;
    out.slacks[2] = 0.5 * std::log2((g1 + g2 +
                                     2.0 * rt * derived.beta1p * derived.beta2p *
                                         std::sqrt(derived.k11 * derived.k22) +
                                     np) /
                                    (np * one_m)) -
                    (derived.rates.r1 + derived.rates.r2);
    out.feasible = out.slacks[0] > 0.0 && out.slacks[1] > 0.0 && out.slacks[2] > 0.0;
    return out;
}

}  // namespace gmac
