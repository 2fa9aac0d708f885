#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gmac/model.hpp"
#include "gmac/rng.hpp"
#include "gmac/schemes.hpp"

namespace gmac {

/// FullJoint runs the actual pair decoder over explicit codebooks and
/// is exponential in n(R1+R2); Genie hands the decoder the transmitted
/// codewords and scales to large blocklengths.
enum class DecoderMode { Genie, FullJoint };

struct SimConfig {
    int n = 2;                 // blocklength
    long trials = 1;           // independent trials, fresh codebooks each
    double epsilon = 0.05;     // typicality window, in (0, 0.3)
    std::uint64_t seed = 1;    // substreams derive from (seed, trial, role)
    DecoderMode mode = DecoderMode::Genie;
};

/// Random spherical codebook: 2^ceil(n*rate) words drawn uniformly on
/// the radius sqrt(n sigma2 (1 - 2^{-2 rate})) sphere, stored row-major.
struct Codebook {
    int n = 0;
    double rate = 0.0;
    double radius = 0.0;
    std::size_t count = 0;
    std::vector<double> words;  // count * n, row-major

    const double* word(std::size_t i) const { return words.data() + i * static_cast<std::size_t>(n); }
};

/// Aggregated Monte Carlo outputs. The standard errors are over the
/// independent averaging units (symbols for the scalar schemes, trials
/// for the block schemes). decode_error_rate is the fraction of
/// decoder runs that missed the transmitted pair, counted over trials
/// where both encoders produced a codeword (encoding failures are
/// tracked separately and contribute the all-zero word to distortion).
struct SchemeEmpirics {
    double d1_hat = 0.0;
    double d2_hat = 0.0;
    double d1_se = 0.0;
    double d2_se = 0.0;
    double decode_error_rate = 0.0;
    double encode_failure_rate = 0.0;
    double power1_used = 0.0;
    double power2_used = 0.0;
    long trials_run = 0;
};

struct VqEncodeResult {
    bool failed = false;       // empty typicality window; codeword is all-zero
    std::size_t index = 0;
    double cosine = 0.0;       // cos angle(source, chosen word)
};

struct JointDecodeResult {
    bool found = false;        // false: no pair passed the correlation test
    std::size_t index1 = 0;
    std::size_t index2 = 0;
};

/// One block of the bivariate source: S1 = sigma Z1,
/// S2 = sigma (rho Z1 + sqrt(1-rho^2) Z2).
std::pair<std::vector<double>, std::vector<double>> gen_source(const SourceParams& src, int n,
                                                               CounterRng& rng);

/// Uncoded MAC scheme, simulated per symbol with the scalar MMSE
/// receiver. decode_error_rate is 0 by definition. When per_trial is
/// given it receives one SchemeEmpirics per trial, in trial order.
SchemeEmpirics sim_uncoded_mac(const SimConfig& cfg, const SourceParams& src,
                               const MacChannel& ch,
                               std::vector<SchemeEmpirics>* per_trial = nullptr);

/// Point-to-point uncoded scheme over the AWGN channel.
SchemeEmpirics sim_pt2pt_uncoded(const SimConfig& cfg, double alpha, double beta,
                                 const SourceParams& src, double p, double noise,
                                 std::vector<SchemeEmpirics>* per_trial = nullptr);

/// Draw an explicit codebook. Throws BudgetExceeded when n*rate exceeds
/// 30 bits (or the word storage would be unreasonably large).
Codebook build_codebook(int n, double rate, double sigma2, CounterRng& rng);

/// Quantize s against an explicit codebook: among the words whose
/// cosine to s falls inside the epsilon window around sqrt(1-2^{-2R}),
/// take the one closest to the center; ties break to the lowest index.
VqEncodeResult vq_encode(const std::vector<double>& s, const Codebook& cb, double epsilon);

/// Joint typicality decoder: over all codeword pairs whose mutual
/// cosine is within 7 epsilon of rho_tilde, minimize
/// ||y - (alpha1 u1 + alpha2 u2)||^2. Lexicographic tie-break.
JointDecodeResult vq_joint_decode(const std::vector<double>& y, const Codebook& cb1,
                                  const Codebook& cb2, double alpha1, double alpha2,
                                  double rho_tilde, double epsilon);

/// Vector-quantizer scheme. Genie mode samples the quantizer output
/// from its ensemble law directly (no codebook enumeration) and applies
/// the closed-form estimator to the true codewords; FullJoint builds
/// explicit codebooks and runs the pair decoder, gated to
/// n(R1+R2) <= 24 bits.
SchemeEmpirics sim_vq(const SimConfig& cfg, const SourceParams& src, const MacChannel& ch,
                      const RatePair& r, std::vector<SchemeEmpirics>* per_trial = nullptr);

/// Superposition scheme X_i = alpha_i S_i + beta_i U_i*; estimates use
/// the gamma weights from sp_derive on (U1, U2, Y).
SchemeEmpirics sim_superposition(const SimConfig& cfg, const SourceParams& src,
                                 const MacChannel& ch, const SuperpositionConfig& sp,
                                 std::vector<SchemeEmpirics>* per_trial = nullptr);

namespace detail {

/// Ensemble draw of the quantizer output for one source block: the
/// selected cosine follows the law of the in-window word nearest the
/// window center among 2^ceil(n*rate) uniform words (Poissonized), and
/// the tangential direction is uniform. Used by the genie path where
/// codebooks are too large to enumerate.
struct QuantizerDraw {
    bool failed = false;
    double cosine = 0.0;
    std::vector<double> u;  // all-zero when failed
};

QuantizerDraw draw_quantizer_output(const std::vector<double>& s, double rate, double sigma2,
                                    double epsilon, CounterRng& rng);

}  // namespace detail

}  // namespace gmac
