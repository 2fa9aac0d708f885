#pragma once

#include <array>

#include "gmac/model.hpp"

namespace gmac {

/// Result of a yes/no condition together with its numeric slack
/// (right-hand side minus left-hand side; positive means satisfied with
/// margin).
struct OptimalityCheck {
    bool optimal = false;
    double slack = 0.0;
};

/// Three-constraint rate feasibility answer. slacks[i] is the
/// constraint's right-hand side minus the rate expression, in bits; all
/// must be strictly positive.
struct RateFeasibility {
    bool feasible = false;
    std::array<double, 3> slacks{};  // r1, r2, sum
};

/// Derived quantities of the vector-quantizer scheme: the asymptotic
/// channel-input correlation rho_tilde, the per-encoder channel
/// scalings, and the linear estimator weights of the reconstruction
/// step. gamma_i1 weighs the own decoded codeword, gamma_i2 the other.
struct VqDerived {
    double rho_tilde = 0.0;
    double alpha1 = 0.0;  // sqrt(P1 / (sigma2 (1 - 2^{-2R1})))
    double alpha2 = 0.0;
    double gamma11 = 0.0, gamma12 = 0.0;
    double gamma21 = 0.0, gamma22 = 0.0;
};

/// Input knobs of the superposition scheme: rates of the two quantizers
/// and the direct-path gains alpha_i. The codeword gains beta_i follow
/// from the power constraint and are computed in sp_derive.
struct SuperpositionConfig {
    RatePair rates;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
};

/// Everything the superposition formulas produce: beta_i from the power
/// constraint, the source-on-codeword regression weights a_i, effective
/// codeword gains beta_i', residual covariances nu_1..nu_3, effective
/// noise n_prime, the 3x3 covariance K of (U1, U2, Y), the
/// cross-covariance vectors c_i = E[S_i (U1, U2, Y)], and the estimator
/// weights gamma_i solving K gamma_i = c_i (in (U1, U2, Y) order).
struct SuperpositionDerived {
    RatePair rates;
    double rho_tilde = 0.0;
    double beta1 = 0.0, beta2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
    double beta1p = 0.0, beta2p = 0.0;
    double nu1 = 0.0, nu2 = 0.0, nu3 = 0.0;
    double n_prime = 0.0;
    double k11 = 0.0, k12 = 0.0, k13 = 0.0, k22 = 0.0, k23 = 0.0, k33 = 0.0;
    std::array<double, 3> c1{}, c2{};
    std::array<double, 3> gamma1{}, gamma2{};
    double residual1 = 0.0, residual2 = 0.0;  // ||K gamma_i - c_i||
};

/// Point-to-point uncoded scheme over the AWGN channel: transmit the
/// normalized combination alpha S1 + beta S2, estimate each component
/// by scalar MMSE.
DistortionPair pt2pt_uncoded(double alpha, double beta, const SourceParams& src, double p,
                             double noise);

/// SNR threshold below which the point-to-point uncoded scheme is
/// optimal for a target d1. Returns +infinity for d1 >= sigma2(1-rho^2).
double pt2pt_threshold_gamma(double d1, const SourceParams& src);

/// Distortions of the MAC uncoded scheme (each encoder scales its own
/// component to full power).
DistortionPair mac_uncoded(const SourceParams& src, const MacChannel& ch);

/// Whether the MAC uncoded pair lies on the distortion-region boundary.
OptimalityCheck mac_uncoded_is_optimal(const SourceParams& src, const MacChannel& ch);

/// Asymptotic correlation between the two scaled codewords,
/// rho * sqrt((1 - 2^{-2R1})(1 - 2^{-2R2})).
double rho_tilde(const RatePair& r, double rho);

/// Infimum distortions of the vector-quantizer scheme at a rate pair.
DistortionPair vq_distortions(const RatePair& r, const SourceParams& src);

/// The three strict rate constraints of the vector-quantizer scheme.
RateFeasibility vq_rate_feasible(const RatePair& r, const SourceParams& src,
                                 const MacChannel& ch);

/// Estimator weights and rho_tilde only (channel scalings left zero).
VqDerived vq_estimator_coeffs(const RatePair& r, double rho);

/// Full VqDerived including the channel scalings for a concrete
/// source/channel pair.
VqDerived vq_derived(const RatePair& r, const SourceParams& src, const MacChannel& ch);

/// Smallest rate accepted by the superposition formulas; K(R1, R2) is
/// singular at zero rate.
constexpr double kSuperpositionRateMin = 1e-6;

/// Evaluate all superposition intermediates. Throws InfeasibleAlpha
/// when alpha_i falls outside [0, sqrt(P_i/sigma2)] (beta_i would be
/// negative or complex) and SingularK below kSuperpositionRateMin.
SuperpositionDerived sp_derive(const SuperpositionConfig& cfg, const SourceParams& src,
                               const MacChannel& ch);

/// Infimum distortions sigma2 - gamma_i . c_i of the superposition
/// scheme.
DistortionPair sp_distortions(const SuperpositionDerived& derived, const SourceParams& src);

/// The three strict rate constraints of the superposition scheme.
RateFeasibility sp_rate_feasible(const SuperpositionDerived& derived, const SourceParams& src);

}  // namespace gmac
