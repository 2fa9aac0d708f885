#include "gmac/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "gmac/spheregeom.hpp"

namespace gmac {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm_sq(const std::vector<double>& a) { return dot(a, a); }

void check_sim_config(const SimConfig& cfg) {
    if (cfg.n < 2) throw OutOfDomain("blocklength must be >= 2");
    if (cfg.trials < 1) throw OutOfDomain("trials must be >= 1");
    if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 0.3)) {
        throw OutOfDomain("epsilon must lie in (0, 0.3)");
    }
}

std::size_t codeword_count_log2(int n, double rate) {
    const double bits = n * rate;
    // n*rate is usually an exact small integer; keep it that way.
    const double rounded = std::round(bits);
    const double eff = (std::fabs(bits - rounded) < 1e-9) ? rounded : std::ceil(bits);
    return static_cast<std::size_t>(eff);
}

// Per-trial accumulation. `units` is the number of independent samples
// the distortion mean is taken over (symbols for scalar schemes, one
// per trial for block schemes).
struct TrialStats {
    double sum1 = 0.0, sumsq1 = 0.0;
    double sum2 = 0.0, sumsq2 = 0.0;
    double pow1 = 0.0, pow2 = 0.0;
    long units = 0;
    int encode_failures = 0;
    int encode_ops = 0;
    int decode_errors = 0;
    int decode_ops = 0;
};

SchemeEmpirics trial_empirics(const TrialStats& t) {
    SchemeEmpirics e;
    const double m = static_cast<double>(t.units);
    e.d1_hat = t.sum1 / m;
    e.d2_hat = t.sum2 / m;
    if (t.units > 1) {
        e.d1_se = std::sqrt(std::max(0.0, t.sumsq1 / m - e.d1_hat * e.d1_hat) / m);
        e.d2_se = std::sqrt(std::max(0.0, t.sumsq2 / m - e.d2_hat * e.d2_hat) / m);
    }
    e.power1_used = t.pow1;
    e.power2_used = t.pow2;
    e.encode_failure_rate =
        (t.encode_ops > 0) ? static_cast<double>(t.encode_failures) / t.encode_ops : 0.0;
    e.decode_error_rate =
        (t.decode_ops > 0) ? static_cast<double>(t.decode_errors) / t.decode_ops : 0.0;
    e.trials_run = 1;
    return e;
}

void fill_per_trial(const std::vector<TrialStats>& stats, std::vector<SchemeEmpirics>* out) {
    if (!out) return;
    out->clear();
    out->reserve(stats.size());
    for (const auto& t : stats) out->push_back(trial_empirics(t));
}

SchemeEmpirics reduce(const std::vector<TrialStats>& stats) {
    TrialStats tot;
    for (const auto& t : stats) {
        tot.sum1 += t.sum1;
        tot.sumsq1 += t.sumsq1;
        tot.sum2 += t.sum2;
        tot.sumsq2 += t.sumsq2;
        tot.pow1 += t.pow1;
        tot.pow2 += t.pow2;
        tot.units += t.units;
        tot.encode_failures += t.encode_failures;
        tot.encode_ops += t.encode_ops;
        tot.decode_errors += t.decode_errors;
        tot.decode_ops += t.decode_ops;
    }
    SchemeEmpirics e;
    const double m = static_cast<double>(tot.units);
    e.d1_hat = tot.sum1 / m;
    e.d2_hat = tot.sum2 / m;
    if (tot.units > 1) {
        e.d1_se = std::sqrt(std::max(0.0, tot.sumsq1 / m - e.d1_hat * e.d1_hat) / m);
        e.d2_se = std::sqrt(std::max(0.0, tot.sumsq2 / m - e.d2_hat * e.d2_hat) / m);
    }
    e.power1_used = tot.pow1 / static_cast<double>(stats.size());
    e.power2_used = tot.pow2 / static_cast<double>(stats.size());
    e.encode_failure_rate =
        (tot.encode_ops > 0) ? static_cast<double>(tot.encode_failures) / tot.encode_ops : 0.0;
    e.decode_error_rate =
        (tot.decode_ops > 0) ? static_cast<double>(tot.decode_errors) / tot.decode_ops : 0.0;
    e.trials_run = static_cast<long>(stats.size());
    return e;
}

// Run one function per trial, possibly on several threads; the results
// vector is indexed by trial so the reduction order is fixed.
template <typename Fn>
std::vector<TrialStats> run_trials(long trials, Fn&& fn) {
    std::vector<TrialStats> stats(static_cast<std::size_t>(trials));
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const long workers = std::min<long>(hw, trials);
    if (workers <= 1 || trials < 4) {
        for (long t = 0; t < trials; ++t) stats[static_cast<std::size_t>(t)] = fn(t);
        return stats;
    }
    std::vector<std::future<void>> futures;
    futures.reserve(static_cast<std::size_t>(workers));
    for (long w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w] {
            for (long t = w; t < trials; t += workers) {
                stats[static_cast<std::size_t>(t)] = fn(t);
            }
        }));
    }
    for (auto& f : futures) f.get();
    return stats;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> gen_source(const SourceParams& src, int n,
                                                               CounterRng& rng) {
    check_source(src);
    if (n < 1) throw OutOfDomain("blocklength must be >= 1");
    const double sigma = std::sqrt(src.sigma2);
    const double cross = std::sqrt(1.0 - src.rho * src.rho);
    std::vector<double> s1(static_cast<std::size_t>(n)), s2(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double z1 = rng.gaussian();
        const double z2 = rng.gaussian();
        s1[static_cast<std::size_t>(k)] = sigma * z1;
        s2[static_cast<std::size_t>(k)] = sigma * (src.rho * z1 + cross * z2);
    }
    return {std::move(s1), std::move(s2)};
}

SchemeEmpirics sim_uncoded_mac(const SimConfig& cfg, const SourceParams& src,
                               const MacChannel& ch, std::vector<SchemeEmpirics>* per_trial) {
    check_sim_config(cfg);
    check_source(src);
    check_channel(ch);
    const double s2 = src.sigma2;
    const double g1 = std::sqrt(ch.p1 / s2);
    const double g2 = std::sqrt(ch.p2 / s2);
    const double ey2 = ch.p1 + ch.p2 + 2.0 * src.rho * std::sqrt(ch.p1 * ch.p2) + ch.noise;
    const double c1 = (std::sqrt(ch.p1 * s2) + src.rho * std::sqrt(ch.p2 * s2)) / ey2;
    const double c2 = (std::sqrt(ch.p2 * s2) + src.rho * std::sqrt(ch.p1 * s2)) / ey2;
    const double sigma_n = std::sqrt(ch.noise);

    auto stats = run_trials(cfg.trials, [&](long trial) {
        auto rng_src = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                             StreamRole::Source);
        auto rng_noise = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                               StreamRole::Noise);
        auto [sa, sb] = gen_source(src, cfg.n, rng_src);
        TrialStats t;
        double psum1 = 0.0, psum2 = 0.0;
        for (int k = 0; k < cfg.n; ++k) {
            const std::size_t i = static_cast<std::size_t>(k);
            const double x1 = g1 * sa[i];
            const double x2 = g2 * sb[i];
            const double y = x1 + x2 + sigma_n * rng_noise.gaussian();
            const double e1 = sa[i] - c1 * y;
            const double e2 = sb[i] - c2 * y;
            t.sum1 += e1 * e1;
            t.sumsq1 += e1 * e1 * e1 * e1;
            t.sum2 += e2 * e2;
            t.sumsq2 += e2 * e2 * e2 * e2;
            psum1 += x1 * x1;
            psum2 += x2 * x2;
        }
        t.units = cfg.n;
        t.pow1 = psum1 / cfg.n;
        t.pow2 = psum2 / cfg.n;
        return t;
    });
    fill_per_trial(stats, per_trial);
    return reduce(stats);
}

SchemeEmpirics sim_pt2pt_uncoded(const SimConfig& cfg, double alpha, double beta,
                                 const SourceParams& src, double p, double noise,
                                 std::vector<SchemeEmpirics>* per_trial) {
    check_sim_config(cfg);
    check_source(src);
    if (!(p > 0.0) || !(noise > 0.0)) throw OutOfDomain("power and noise must be positive");
    if (alpha == 0.0 && beta == 0.0) throw ZeroInput("(alpha, beta) = (0, 0)");
    const double s2 = src.sigma2;
    const double mix = alpha * alpha + 2.0 * src.rho * alpha * beta + beta * beta;
    const double g = std::sqrt(p / (s2 * mix));
    const double ey2 = p + noise;
    const double c1 = g * (alpha * s2 + beta * src.rho * s2) / ey2;
    const double c2 = g * (beta * s2 + alpha * src.rho * s2) / ey2;
    const double sigma_n = std::sqrt(noise);

    auto stats = run_trials(cfg.trials, [&](long trial) {
        auto rng_src = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                             StreamRole::Source);
        auto rng_noise = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                               StreamRole::Noise);
        auto [sa, sb] = gen_source(src, cfg.n, rng_src);
        TrialStats t;
        double psum = 0.0;
        for (int k = 0; k < cfg.n; ++k) {
            const std::size_t i = static_cast<std::size_t>(k);
            const double x = g * (alpha * sa[i] + beta * sb[i]);
            const double y = x + sigma_n * rng_noise.gaussian();
            const double e1 = sa[i] - c1 * y;
            const double e2 = sb[i] - c2 * y;
            t.sum1 += e1 * e1;
            t.sumsq1 += e1 * e1 * e1 * e1;
            t.sum2 += e2 * e2;
            t.sumsq2 += e2 * e2 * e2 * e2;
            psum += x * x;
        }
        t.units = cfg.n;
        t.pow1 = psum / cfg.n;
        t.pow2 = t.pow1;
        return t;
    });
    fill_per_trial(stats, per_trial);
    return reduce(stats);
}

Codebook build_codebook(int n, double rate, double sigma2, CounterRng& rng) {
    if (n < 2) throw OutOfDomain("blocklength must be >= 2");
    if (!(rate >= 0.0)) throw OutOfDomain("rate must be nonnegative");
    if (!(sigma2 > 0.0)) throw OutOfDomain("sigma2 must be positive");
    if (n * rate > 30.0) throw BudgetExceeded("codebook budget n*rate <= 30 bits exceeded");
    Codebook cb;
    cb.n = n;
    cb.rate = rate;
    cb.count = std::size_t{1} << codeword_count_log2(n, rate);
    cb.radius = std::sqrt(n * sigma2 * (1.0 - std::exp2(-2.0 * rate)));
    if (cb.count * static_cast<std::size_t>(n) > (std::size_t{1} << 27)) {
        throw BudgetExceeded("codebook storage would exceed the in-memory cap");
    }
    cb.words.resize(cb.count * static_cast<std::size_t>(n), 0.0);
    if (cb.radius > 0.0) {
        for (std::size_t w = 0; w < cb.count; ++w) {
            const auto v = sample_sphere(n, cb.radius, rng);
            std::copy(v.begin(), v.end(), cb.words.begin() + w * static_cast<std::size_t>(n));
        }
    }
    return cb;
}

VqEncodeResult vq_encode(const std::vector<double>& s, const Codebook& cb, double epsilon) {
    if (static_cast<int>(s.size()) != cb.n) throw OutOfDomain("dimension mismatch");
    VqEncodeResult out;
    if (cb.radius == 0.0) {
        // Zero rate: the single codeword is the origin.
        out.index = 0;
        out.cosine = 0.0;
        return out;
    }
    const double g = std::sqrt(1.0 - std::exp2(-2.0 * cb.rate));
    const double lo = g * (1.0 - epsilon);
    const double hi = g * (1.0 + epsilon);
    const double snorm = std::sqrt(norm_sq(s));
    if (snorm == 0.0) {
        out.failed = true;
        return out;
    }
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t w = 0; w < cb.count; ++w) {
        const double cosine = dot(s.data(), cb.word(w), cb.n) / (snorm * cb.radius);
        if (cosine < lo || cosine > hi) continue;
        const double dist = std::fabs(cosine - g);
        if (dist < best) {
            best = dist;
            found = true;
            out.index = w;
            out.cosine = cosine;
        }
    }
    out.failed = !found;
    return out;
}

JointDecodeResult vq_joint_decode(const std::vector<double>& y, const Codebook& cb1,
                                  const Codebook& cb2, double alpha1, double alpha2,
                                  double rho_tilde, double epsilon) {
    if (static_cast<int>(y.size()) != cb1.n || cb1.n != cb2.n) {
        throw OutOfDomain("dimension mismatch");
    }
    const int n = cb1.n;
    const double window = 7.0 * epsilon;
    std::vector<double> y_u1(cb1.count), y_u2(cb2.count);
    for (std::size_t i = 0; i < cb1.count; ++i) y_u1[i] = dot(y.data(), cb1.word(i), n);
    for (std::size_t j = 0; j < cb2.count; ++j) y_u2[j] = dot(y.data(), cb2.word(j), n);
    const double r1sq = cb1.radius * cb1.radius;
    const double r2sq = cb2.radius * cb2.radius;
    const double denom = cb1.radius * cb2.radius;

    JointDecodeResult out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cb1.count; ++i) {
        const double base_i = -2.0 * alpha1 * y_u1[i] + alpha1 * alpha1 * r1sq;
        for (std::size_t j = 0; j < cb2.count; ++j) {
            const double u1u2 = dot(cb1.word(i), cb2.word(j), n);
            if (denom > 0.0 && std::fabs(rho_tilde - u1u2 / denom) > window) continue;
            const double metric = base_i - 2.0 * alpha2 * y_u2[j] + alpha2 * alpha2 * r2sq +
                                  2.0 * alpha1 * alpha2 * u1u2;
            if (metric < best) {
                best = metric;
                out.found = true;
                out.index1 = i;
                out.index2 = j;
            }
        }
    }
    return out;
}

namespace detail {

QuantizerDraw draw_quantizer_output(const std::vector<double>& s, double rate, double sigma2,
                                    double epsilon, CounterRng& rng) {
    const int n = static_cast<int>(s.size());
    QuantizerDraw out;
    out.u.assign(s.size(), 0.0);
    const double e = 1.0 - std::exp2(-2.0 * rate);
    if (!(e > 0.0)) return out;  // zero rate: single zero codeword
    const double radius = std::sqrt(n * sigma2 * e);
    const double g = std::sqrt(e);
    const double lo = g * (1.0 - epsilon);
    const double hi = std::min(g * (1.0 + epsilon), 1.0 - 1e-14);
    if (lo >= hi) {
        out.failed = true;
        return out;
    }

    const double mbits = static_cast<double>(codeword_count_log2(n, rate));
    // log expected number of codewords with cosine >= t.
    const auto ltail = [&](double t) { return mbits * kLn2 + log_cap_fraction(n, t); };
    const double lt_lo = ltail(lo);
    const double lt_hi = ltail(hi);
    // log Lambda(window) via stable log-difference.
    const double log_lambda_win = lt_lo + std::log1p(-std::exp(lt_hi - lt_lo));

    const double tau = -std::log(rng.uniform01());  // Exp(1)
    if (tau > 0.0 && std::log(tau) > log_lambda_win) {
        out.failed = true;
        return out;
    }

    // Nearest in-window codeword to the center g: the Poissonized count
    // within distance d of g is Lambda(d); solve Lambda(d) = tau.
    const double d_max = std::max(g - lo, hi - g);
    const auto log_lambda = [&](double d) {
        const double left = std::max(lo, g - d);
        const double right = std::min(hi, g + d);
        if (left >= right) return -std::numeric_limits<double>::infinity();
        const double lt_l = ltail(left);
        const double lt_r = ltail(right);
        return lt_l + std::log1p(-std::exp(lt_r - lt_l));
    };
    const double log_tau = std::log(std::max(tau, 1e-300));
    double dlo = 0.0, dhi = d_max;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (dlo + dhi);
        if (log_lambda(mid) < log_tau) {
            dlo = mid;
        } else {
            dhi = mid;
        }
    }
    const double d = 0.5 * (dlo + dhi);

    // Side of the center, weighted by the local cosine density
    // (1 - t^2)^{(n-3)/2}; the boundary clips force one side.
    double t_star;
    const bool left_ok = g - d >= lo;
    const bool right_ok = g + d <= hi;
    if (left_ok && right_ok) {
        const double lf_l = 0.5 * (n - 3) * std::log1p(-(g - d) * (g - d));
        const double lf_r = 0.5 * (n - 3) * std::log1p(-(g + d) * (g + d));
        const double p_left = 1.0 / (1.0 + std::exp(lf_r - lf_l));
        t_star = (rng.uniform01() <= p_left) ? g - d : g + d;
    } else if (left_ok) {
        t_star = g - d;
    } else {
        t_star = g + d;
    }
    t_star = std::clamp(t_star, lo, hi);
    out.cosine = t_star;

    // Compose the word: radial part along s, tangential part uniform.
    const double snorm = std::sqrt(norm_sq(s));
    std::vector<double> shat(s.size(), 0.0);
    if (snorm > 0.0) {
        for (std::size_t i = 0; i < s.size(); ++i) shat[i] = s[i] / snorm;
    } else {
        shat[0] = 1.0;
    }
    std::vector<double> w(s.size());
    for (auto& x : w) x = rng.gaussian();
    const double proj = dot(w, shat);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= proj * shat[i];
    const double wnorm = std::sqrt(norm_sq(w));
    const double tang = std::sqrt(std::max(0.0, 1.0 - t_star * t_star));
    for (std::size_t i = 0; i < out.u.size(); ++i) {
        out.u[i] = t_star * shat[i] + tang * w[i] / wnorm;
    }
    const double unorm = std::sqrt(norm_sq(out.u));
    for (auto& x : out.u) x *= radius / unorm;
    return out;
}

}  // namespace detail

namespace {

struct EncodedBlock {
    std::vector<double> u;       // codeword (all-zero on failure)
    bool failed = false;
    std::size_t index = 0;       // explicit-codebook index, SIZE_MAX on failure
};

EncodedBlock encode_block(const std::vector<double>& s, double rate, double sigma2,
                          double epsilon, CounterRng& rng, const Codebook* cb) {
    EncodedBlock out;
    if (cb != nullptr) {
        const VqEncodeResult enc = vq_encode(s, *cb, epsilon);
        out.failed = enc.failed;
        out.index = enc.failed ? std::numeric_limits<std::size_t>::max() : enc.index;
        if (enc.failed) {
            out.u.assign(s.size(), 0.0);
        } else {
            out.u.assign(cb->word(enc.index), cb->word(enc.index) + cb->n);
        }
        return out;
    }
    detail::QuantizerDraw draw = detail::draw_quantizer_output(s, rate, sigma2, epsilon, rng);
    out.failed = draw.failed;
    out.index = draw.failed ? std::numeric_limits<std::size_t>::max() : 0;
    out.u = std::move(draw.u);
    return out;
}

}  // namespace

SchemeEmpirics sim_vq(const SimConfig& cfg, const SourceParams& src, const MacChannel& ch,
                      const RatePair& r, std::vector<SchemeEmpirics>* per_trial) {
    check_sim_config(cfg);
    check_source(src);
    check_channel(ch);
    if (!(r.r1 >= 0.0) || !(r.r2 >= 0.0)) throw OutOfDomain("rates must be nonnegative");
    const bool full = cfg.mode == DecoderMode::FullJoint;
    if (full && cfg.n * (r.r1 + r.r2) > 24.0) {
        throw BudgetExceeded("FullJoint requires n(R1+R2) <= 24 bits");
    }
    const double s2 = src.sigma2;
    const double e1 = 1.0 - std::exp2(-2.0 * r.r1);
    const double e2 = 1.0 - std::exp2(-2.0 * r.r2);
    const double a1 = (e1 > 0.0) ? std::sqrt(ch.p1 / (s2 * e1)) : 0.0;
    const double a2 = (e2 > 0.0) ? std::sqrt(ch.p2 / (s2 * e2)) : 0.0;
    const VqDerived vd = vq_estimator_coeffs(r, src.rho);
    const double sigma_n = std::sqrt(ch.noise);

    auto stats = run_trials(cfg.trials, [&](long trial) {
        auto rng_src = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                             StreamRole::Source);
        auto rng_cb1 = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                             StreamRole::Codebook1);
        auto rng_cb2 = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                             StreamRole::Codebook2);
        auto rng_noise = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                               StreamRole::Noise);
        auto [sa, sb] = gen_source(src, cfg.n, rng_src);

        Codebook cb1, cb2;
        const Codebook* pcb1 = nullptr;
        const Codebook* pcb2 = nullptr;
        if (full) {
            cb1 = build_codebook(cfg.n, r.r1, s2, rng_cb1);
            cb2 = build_codebook(cfg.n, r.r2, s2, rng_cb2);
            pcb1 = &cb1;
            pcb2 = &cb2;
        }
        const EncodedBlock b1 = encode_block(sa, r.r1, s2, cfg.epsilon, rng_cb1, pcb1);
        const EncodedBlock b2 = encode_block(sb, r.r2, s2, cfg.epsilon, rng_cb2, pcb2);

        TrialStats t;
        t.units = 1;
        t.encode_ops = 2;
        t.encode_failures = (b1.failed ? 1 : 0) + (b2.failed ? 1 : 0);
        double pow1 = 0.0, pow2 = 0.0;
        for (std::size_t i = 0; i < sa.size(); ++i) {
            pow1 += a1 * b1.u[i] * a1 * b1.u[i];
            pow2 += a2 * b2.u[i] * a2 * b2.u[i];
        }
        t.pow1 = pow1 / cfg.n;
        t.pow2 = pow2 / cfg.n;

        const std::vector<double>* u1hat = &b1.u;
        const std::vector<double>* u2hat = &b2.u;
        std::vector<double> dec1, dec2;
        if (full) {
            std::vector<double> y(sa.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                y[i] = a1 * b1.u[i] + a2 * b2.u[i] + sigma_n * rng_noise.gaussian();
            }
            const JointDecodeResult dec =
                vq_joint_decode(y, cb1, cb2, a1, a2, vd.rho_tilde, cfg.epsilon);
            if (!b1.failed && !b2.failed) {
                t.decode_ops = 1;
                if (!dec.found || dec.index1 != b1.index || dec.index2 != b2.index) {
                    t.decode_errors = 1;
                }
            }
            if (dec.found) {
                dec1.assign(cb1.word(dec.index1), cb1.word(dec.index1) + cb1.n);
                dec2.assign(cb2.word(dec.index2), cb2.word(dec.index2) + cb2.n);
            } else {
                dec1.assign(sa.size(), 0.0);
                dec2.assign(sb.size(), 0.0);
            }
            u1hat = &dec1;
            u2hat = &dec2;
        }

        double se1 = 0.0, se2 = 0.0;
        for (std::size_t i = 0; i < sa.size(); ++i) {
            const double r1hat = vd.gamma11 * (*u1hat)[i] + vd.gamma12 * (*u2hat)[i];
            const double r2hat = vd.gamma21 * (*u2hat)[i] + vd.gamma22 * (*u1hat)[i];
            se1 += (sa[i] - r1hat) * (sa[i] - r1hat);
            se2 += (sb[i] - r2hat) * (sb[i] - r2hat);
        }
        t.sum1 = se1 / cfg.n;
        t.sumsq1 = t.sum1 * t.sum1;
        t.sum2 = se2 / cfg.n;
        t.sumsq2 = t.sum2 * t.sum2;
        return t;
    });
    fill_per_trial(stats, per_trial);
    return reduce(stats);
}

SchemeEmpirics sim_superposition(const SimConfig& cfg, const SourceParams& src,
                                 const MacChannel& ch, const SuperpositionConfig& sp,
                                 std::vector<SchemeEmpirics>* per_trial) {
    check_sim_config(cfg);
    const SuperpositionDerived der = sp_derive(sp, src, ch);
    const bool full = cfg.mode == DecoderMode::FullJoint;
    if (full && cfg.n * (sp.rates.r1 + sp.rates.r2) > 24.0) {
        throw BudgetExceeded("FullJoint requires n(R1+R2) <= 24 bits");
    }
    const double s2 = src.sigma2;
    const double sigma_n = std::sqrt(ch.noise);

    auto stats = run_trials(cfg.trials, [&](long trial) {
        auto rng_src = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                             StreamRole::Source);
        auto rng_cb1 = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                             StreamRole::Codebook1);
        auto rng_cb2 = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                             StreamRole::Codebook2);
        auto rng_noise = CounterRng::substream(cfg.seed, static_cast<std::uint64_t>(trial),
                                               StreamRole::Noise);
        auto [sa, sb] = gen_source(src, cfg.n, rng_src);

        Codebook cb1, cb2;
        const Codebook* pcb1 = nullptr;
        const Codebook* pcb2 = nullptr;
        if (full) {
            cb1 = build_codebook(cfg.n, sp.rates.r1, s2, rng_cb1);
            cb2 = build_codebook(cfg.n, sp.rates.r2, s2, rng_cb2);
            pcb1 = &cb1;
            pcb2 = &cb2;
        }
        const EncodedBlock b1 = encode_block(sa, sp.rates.r1, s2, cfg.epsilon, rng_cb1, pcb1);
        const EncodedBlock b2 = encode_block(sb, sp.rates.r2, s2, cfg.epsilon, rng_cb2, pcb2);

        std::vector<double> x1(sa.size()), x2(sb.size()), y(sa.size());
        for (std::size_t i = 0; i < sa.size(); ++i) {
            x1[i] = sp.alpha1 * sa[i] + der.beta1 * b1.u[i];
            x2[i] = sp.alpha2 * sb[i] + der.beta2 * b2.u[i];
            y[i] = x1[i] + x2[i] + sigma_n * rng_noise.gaussian();
        }

        TrialStats t;
        t.units = 1;
        t.encode_ops = 2;
        t.encode_failures = (b1.failed ? 1 : 0) + (b2.failed ? 1 : 0);
        t.pow1 = norm_sq(x1) / cfg.n;
        t.pow2 = norm_sq(x2) / cfg.n;

        const std::vector<double>* u1hat = &b1.u;
        const std::vector<double>* u2hat = &b2.u;
        std::vector<double> dec1, dec2;
        if (full) {
            // Mismatched pair decoder against the effective codeword
            // gains beta_i'; the source-direct parts act as extra noise.
            const JointDecodeResult dec =
                vq_joint_decode(y, cb1, cb2, der.beta1p, der.beta2p, der.rho_tilde, cfg.epsilon);
            if (!b1.failed && !b2.failed) {
                t.decode_ops = 1;
                if (!dec.found || dec.index1 != b1.index || dec.index2 != b2.index) {
                    t.decode_errors = 1;
                }
            }
            if (dec.found) {
                dec1.assign(cb1.word(dec.index1), cb1.word(dec.index1) + cb1.n);
                dec2.assign(cb2.word(dec.index2), cb2.word(dec.index2) + cb2.n);
            } else {
                dec1.assign(sa.size(), 0.0);
                dec2.assign(sb.size(), 0.0);
            }
            u1hat = &dec1;
            u2hat = &dec2;
        }

        double se1 = 0.0, se2 = 0.0;
        for (std::size_t i = 0; i < sa.size(); ++i) {
            const double r1hat =
                der.gamma1[0] * (*u1hat)[i] + der.gamma1[1] * (*u2hat)[i] + der.gamma1[2] * y[i];
            const double r2hat =
                der.gamma2[0] * (*u1hat)[i] + der.gamma2[1] * (*u2hat)[i] + der.gamma2[2] * y[i];
            se1 += (sa[i] - r1hat) * (sa[i] - r1hat);
            se2 += (sb[i] - r2hat) * (sb[i] - r2hat);
        }
        t.sum1 = se1 / cfg.n;
        t.sumsq1 = t.sum1 * t.sum1;
        t.sum2 = se2 / cfg.n;
        t.sumsq2 = t.sum2 * t.sum2;
        return t;
    });
    fill_per_trial(stats, per_trial);
    return reduce(stats);
}

}  // namespace gmac
