#pragma once

#include <array>
#include <optional>
#include <utility>

#include "gmac/model.hpp"
#include "gmac/schemes.hpp"

namespace gmac {

/// Rate thresholds of the Gaussian two-terminal source-coding region
/// (unit-variance convention; divide distortions by sigma2 before the
/// call). beta_d is the coefficient entering the sum-rate bound.
struct OohamaCheck {
    double beta_d = 2.0;
    double r1_min = 0.0;
    double r2_min = 0.0;
    double rsum_min = 0.0;
};

/// Outcome of the separation feasibility search. When feasible, witness
/// is a rate pair inside both the MAC capacity region and the
/// source-coding region; slacks are its three source-coding margins.
struct FeasibilityReport {
    bool feasible = false;
    std::optional<RatePair> witness;
    std::array<double, 3> slacks{};
};

struct VqSymOpt {
    double distortion = 0.0;
    double r_star = 0.0;
};

struct SpSymOpt {
    double distortion = 0.0;
    double r_star = 0.0;
    double alpha_star = 0.0;
};

/// Converse: achievability requires the joint rate-distortion function
/// not to exceed the cooperative-MAC capacity. Returns the truth value
/// and the slack in bits.
std::pair<bool, double> necessary_condition(const DistortionPair& d, const SourceParams& src,
                                            const MacChannel& ch);

/// Symmetric-case converse on D*(sigma2, rho, P, N); two regimes split
/// at P/N = rho/(1 - rho^2).
double lower_bound_sym(const SourceParams& src, double p, double noise);

/// Minimum rates of the two-terminal source-coding region for a
/// unit-variance source at the given rate pair.
OohamaCheck oohama_check(const RatePair& r, const DistortionPair& d_normalized, double rho);

/// Is (d1, d2) reachable by source-channel separation? Sweeps the MAC
/// dominant face (2048 points plus bisection refinement near flips) and
/// tests the source-coding constraints at each candidate.
FeasibilityReport separation_feasible(const DistortionPair& d, const SourceParams& src,
                                      const MacChannel& ch);

/// Symmetric-case separation boundary sigma2 sqrt(N(N+2P(1-rho^2)))/(2P+N).
double separation_sym(const SourceParams& src, double p, double noise);

/// Symmetric uncoded distortion and whether it is exactly optimal
/// (P/N <= rho/(1-rho^2)).
std::pair<double, bool> uncoded_sym_dstar(const SourceParams& src, double p, double noise);

/// Optimal symmetric vector-quantizer point: the largest rate satisfying
/// the fixed-point constraint, found by bisection, and its distortion.
VqSymOpt vq_sym_opt(const SourceParams& src, double p, double noise);

/// Optimal symmetric superposition point: minimize the achievable
/// distortion over (rate, alpha) subject to the rate constraint.
/// Reported as a closed infimum: constraint boundaries and the
/// rate -> 0 closure point (the uncoded scheme) are admitted.
SpSymOpt sp_sym_opt(const SourceParams& src, double p, double noise);

/// High-SNR law sigma2 sqrt((1-rho)/2) sqrt(N/P).
double high_snr_asymptote_sym(const SourceParams& src, double p, double noise);

/// Diagnostic ratio ((P1+P2+2 rho sqrt(P1 P2))/N) D1 D2 / (sigma4 (1-rho^2));
/// tends to 1 along optimal-boundary pairs as N -> 0.
double high_snr_product_check(const SourceParams& src, const MacChannel& ch,
                              const DistortionPair& d);

}  // namespace gmac
