#include "gmac/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gmac/ratedist.hpp"

namespace gmac {

namespace {

double log2_pos(double x) { return std::max(0.0, std::log2(x)); }

double total_snr(const SourceParams& src, const MacChannel& ch) {
    return (ch.p1 + ch.p2 + 2.0 * src.rho * std::sqrt(ch.p1 * ch.p2)) / ch.noise;
}

// Symmetric VQ rate-constraint residual h(R) = RHS(R) - R.
double vq_fixed_point_residual(double r, double rho, double p, double noise) {
    const double e = 1.0 - std::exp2(-2.0 * r);
    const double rt2 = rho * rho * e * e;
    return 0.25 * std::log2((2.0 * p * (1.0 + rho * e) + noise) / (noise * (1.0 - rt2))) - r;
}

double vq_sym_distortion(double r, const SourceParams& src) {
    const double t = std::exp2(-2.0 * r);
    const double e = 1.0 - t;
    const double r2 = src.rho * src.rho;
    return src.sigma2 * t * (1.0 - r2 * e) / (1.0 - r2 * e * e);
}

}  // namespace

std::pair<bool, double> necessary_condition(const DistortionPair& d, const SourceParams& src,
                                            const MacChannel& ch) {
    check_source(src);
    check_channel(ch);
    const double capacity = 0.5 * std::log2(1.0 + total_snr(src, ch));
    const double rate = rd_rate(d, src);
    const double slack = capacity - rate;
    return {slack >= 0.0, slack};
}

double lower_bound_sym(const SourceParams& src, double p, double noise) {
    check_source(src);
    if (!(p > 0.0) || !(noise > 0.0)) throw OutOfDomain("power and noise must be positive");
    const double s2 = src.sigma2;
    const double rho = src.rho;
    const double r2 = rho * rho;
    if (p / noise <= rho / (1.0 - r2)) {
        return s2 * (p * (1.0 - r2) + noise) / (2.0 * p * (1.0 + rho) + noise);
    }
    return s2 * std::sqrt((1.0 - r2) * noise / (2.0 * p * (1.0 + rho) + noise));
}

OohamaCheck oohama_check(const RatePair& r, const DistortionPair& d, double rho) {
    if (!(rho >= 0.0) || !(rho < 1.0)) throw OutOfDomain("rho must lie in [0, 1)");
    if (!(d.d1 > 0.0) || !(d.d2 > 0.0)) throw OutOfDomain("distortions must be positive");
    if (!(r.r1 >= 0.0) || !(r.r2 >= 0.0)) throw OutOfDomain("rates must be nonnegative");
    const double r2 = rho * rho;
    const double one_m = 1.0 - r2;
    OohamaCheck out;
    out.beta_d = 1.0 + std::sqrt(1.0 + 4.0 * r2 * d.d1 * d.d2 / (one_m * one_m));
    out.r1_min = 0.5 * log2_pos((1.0 - r2 * (1.0 - std::exp2(-2.0 * r.r2))) / d.d1);
    out.r2_min = 0.5 * log2_pos((1.0 - r2 * (1.0 - std::exp2(-2.0 * r.r1))) / d.d2);
    out.rsum_min = 0.5 * log2_pos(one_m * out.beta_d / (2.0 * d.d1 * d.d2));
    return out;
}

FeasibilityReport separation_feasible(const DistortionPair& d, const SourceParams& src,
                                      const MacChannel& ch) {
    check_source(src);
    check_channel(ch);
    if (!(d.d1 > 0.0) || !(d.d2 > 0.0)) throw OutOfDomain("distortions must be positive");
    const DistortionPair dn{d.d1 / src.sigma2, d.d2 / src.sigma2};
    const double c1 = 0.5 * std::log2(1.0 + ch.p1 / ch.noise);
    const double c2 = 0.5 * std::log2(1.0 + ch.p2 / ch.noise);
    const double csum = 0.5 * std::log2(1.0 + (ch.p1 + ch.p2) / ch.noise);

    // Minimum slack of the three source-coding constraints when R2 sits
    // on the MAC dominant face for the given R1.
    const auto min_slack = [&](double r1, std::array<double, 3>* slacks_out = nullptr) {
        const double r2 = std::min(c2, csum - r1);
        const OohamaCheck oc = oohama_check(RatePair{r1, r2}, dn, src.rho);
        const std::array<double, 3> s{r1 - oc.r1_min, r2 - oc.r2_min, r1 + r2 - oc.rsum_min};
        if (slacks_out) *slacks_out = s;
        return std::min({s[0], s[1], s[2]});
    };

    constexpr int kSweep = 2048;
    double best_r1 = 0.0;
    double best = -1e300;
    double first_feasible = -1.0;
    double prev = min_slack(0.0);
    if (prev > best) {
        best = prev;
        best_r1 = 0.0;
    }
    if (prev >= 0.0) first_feasible = 0.0;
    for (int i = 1; i <= kSweep; ++i) {
        const double r1 = c1 * i / kSweep;
        const double cur = min_slack(r1);
        if (cur > best) {
            best = cur;
            best_r1 = r1;
        }
        if ((prev < 0.0) != (cur < 0.0)) {
            // Bisect the flip to tighten the feasibility boundary.
            double lo = c1 * (i - 1) / kSweep, hi = r1;
            bool lo_infeasible = prev < 0.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double f = min_slack(mid);
                if (f > best) {
                    best = f;
                    best_r1 = mid;
                }
                if ((f < 0.0) == lo_infeasible) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            const double edge = lo_infeasible ? hi : lo;
            if (min_slack(edge) >= 0.0 && (first_feasible < 0.0 || edge < first_feasible)) {
                first_feasible = edge;
            }
        }
        if (cur >= 0.0 && first_feasible < 0.0) first_feasible = r1;
        prev = cur;
    }

    FeasibilityReport out;
    out.feasible = best >= 0.0;
    if (out.feasible) {
        // Witness at the smallest feasible R1, with R2 shrunk to its
        // minimal value; (sigma2, sigma2) then maps to (0, 0).
        const double r1 = (first_feasible >= 0.0) ? first_feasible : best_r1;
        const double r2_face = std::min(c2, csum - r1);
        const OohamaCheck oc_face = oohama_check(RatePair{r1, r2_face}, dn, src.rho);
        double r2 = std::max({oc_face.r2_min, oc_face.rsum_min - r1, 0.0});
        const OohamaCheck oc = oohama_check(RatePair{r1, r2}, dn, src.rho);
        if (r1 < oc.r1_min || r2 > r2_face) r2 = r2_face;
        out.witness = RatePair{r1, r2};
        const OohamaCheck ocw = oohama_check(*out.witness, dn, src.rho);
        out.slacks = {r1 - ocw.r1_min, r2 - ocw.r2_min, r1 + r2 - ocw.rsum_min};
    } else {
        min_slack(best_r1, &out.slacks);
    }
    return out;
}

double separation_sym(const SourceParams& src, double p, double noise) {
    check_source(src);
    if (!(p > 0.0) || !(noise > 0.0)) throw OutOfDomain("power and noise must be positive");
    const double r2 = src.rho * src.rho;
    return src.sigma2 * std::sqrt(noise * (noise + 2.0 * p * (1.0 - r2))) / (2.0 * p + noise);
}

std::pair<double, bool> uncoded_sym_dstar(const SourceParams& src, double p, double noise) {
    check_source(src);
    if (!(p > 0.0) || !(noise > 0.0)) throw OutOfDomain("power and noise must be positive");
    const double r2 = src.rho * src.rho;
    const double value =
        src.sigma2 * (p * (1.0 - r2) + noise) / (2.0 * p * (1.0 + src.rho) + noise);
    return {value, p / noise <= src.rho / (1.0 - r2)};
}

VqSymOpt vq_sym_opt(const SourceParams& src, double p, double noise) {
    check_source(src);
    if (!(p > 0.0) || !(noise > 0.0)) throw OutOfDomain("power and noise must be positive");
    const double cap = 0.5 * std::log2(1.0 + 2.0 * p / noise) + 2.0;
    const auto h = [&](double r) { return vq_fixed_point_residual(r, src.rho, p, noise); };
    if (!(h(0.0) > 0.0)) throw NoSignChange("h(0) must be positive");
    if (!(h(cap) < 0.0)) throw NoSignChange("h(cap) must be negative");

    // Scan for crossings; with multiple roots keep the largest (its
    // distortion is the smallest since D decreases in R).
    constexpr int kScan = 64;
    double best_root = -1.0;
    double prev_r = 0.0, prev_h = h(0.0);
    for (int i = 1; i <= kScan; ++i) {
        const double r = cap * i / kScan;
        const double cur = h(r);
        if ((prev_h > 0.0) && (cur <= 0.0)) {
            double lo = prev_r, hi = r;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (h(mid) > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            best_root = std::max(best_root, 0.5 * (lo + hi));
        }
        prev_r = r;
        prev_h = cur;
    }
    if (best_root < 0.0) throw NoSignChange("no fixed point found");
    return VqSymOpt{vq_sym_distortion(best_root, src), best_root};
}

SpSymOpt sp_sym_opt(const SourceParams& src, double p, double noise) {
    check_source(src);
    if (!(p > 0.0) || !(noise > 0.0)) throw OutOfDomain("power and noise must be positive");
    const MacChannel ch{p, p, noise};
    const double alpha_max = std::sqrt(p / src.sigma2);
    const double r_cap = 0.5 * std::log2(1.0 + 2.0 * p / noise) + 2.0;
    constexpr double kSlackTol = -1e-12;  // admit the constraint boundary

    const auto eval = [&](double r, double alpha) -> double {
        if (r < kSuperpositionRateMin || r > r_cap || alpha < 0.0 || alpha > alpha_max) {
            return 1e300;
        }
        SuperpositionConfig cfg{RatePair{r, r}, alpha, alpha};
        try {
            const SuperpositionDerived der = sp_derive(cfg, src, ch);
            const RateFeasibility feas = sp_rate_feasible(der, src);
            if (std::min({feas.slacks[0], feas.slacks[1], feas.slacks[2]}) < kSlackTol) {
                return 1e300;
            }
            const DistortionPair d = sp_distortions(der, src);
            return std::max(d.d1, d.d2);
        } catch (const Error&) {
            return 1e300;
        }
    };

    // Coordinate-wise golden-section refinement around a start point;
    // shrinking trust windows around the running best.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    const auto refine = [&](double r0, double a0, double span_r0, double span_a0, double v0,
                            double* r_out, double* a_out) {
        double best = v0, best_r = r0, best_alpha = a0;
        double span_r = span_r0, span_a = span_a0;
        for (int round = 0; round < 40; ++round) {
            for (int coord = 0; coord < 2; ++coord) {
                double lo = (coord == 0) ? std::max(kSuperpositionRateMin, best_r - span_r)
                                         : std::max(0.0, best_alpha - span_a);
                double hi = (coord == 0) ? std::min(r_cap, best_r + span_r)
                                         : std::min(alpha_max, best_alpha + span_a);
                double x1 = hi - gr * (hi - lo);
                double x2 = lo + gr * (hi - lo);
                double f1 = (coord == 0) ? eval(x1, best_alpha) : eval(best_r, x1);
                double f2 = (coord == 0) ? eval(x2, best_alpha) : eval(best_r, x2);
                for (int it = 0; it < 50; ++it) {
                    if (f1 <= f2) {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - gr * (hi - lo);
                        f1 = (coord == 0) ? eval(x1, best_alpha) : eval(best_r, x1);
                    } else {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + gr * (hi - lo);
                        f2 = (coord == 0) ? eval(x2, best_alpha) : eval(best_r, x2);
                    }
                }
                const double x = (f1 <= f2) ? x1 : x2;
                const double f = std::min(f1, f2);
                if (f < best) {
                    best = f;
                    if (coord == 0) {
                        best_r = x;
                    } else {
                        best_alpha = x;
                    }
                }
            }
            span_r *= 0.5;
            span_a *= 0.5;
            if (span_r < 1e-12 && span_a < 1e-12) break;
        }
        *r_out = best_r;
        *a_out = best_alpha;
        return best;
    };

    // Coarse grid, keeping the best point of each macro cell as a
    // refinement start: the feasibility boundary carves ridges into the
    // surface and a single local search can settle on the wrong one.
    constexpr int kGrid = 96;
    constexpr int kMacro = 12;
    struct Candidate {
        double v = 1e300, r = 0.0, a = 0.0;
    };
    Candidate cells[kMacro][kMacro];
    for (int i = 0; i <= kGrid; ++i) {
        const double r = kSuperpositionRateMin + (r_cap - kSuperpositionRateMin) * i / kGrid;
        for (int j = 0; j <= kGrid; ++j) {
            const double a = alpha_max * j / kGrid;
            const double v = eval(r, a);
            Candidate& cell = cells[std::min(kMacro - 1, i * kMacro / (kGrid + 1))]
                                   [std::min(kMacro - 1, j * kMacro / (kGrid + 1))];
            if (v < cell.v) cell = Candidate{v, r, a};
        }
    }
    std::vector<Candidate> starts;
    for (auto& row : cells) {
        for (auto& cell : row) {
            if (cell.v < 1e300) starts.push_back(cell);
        }
    }
    std::sort(starts.begin(), starts.end(),
              [](const Candidate& x, const Candidate& y) { return x.v < y.v; });
    if (starts.size() > 16) starts.resize(16);
    // Extra starts towards the uncoded corner (alpha near the cap, rate
    // near zero), where the optimum hides at low SNR, and the VQ point
    // on the alpha = 0 edge so the ordering against vq_sym_opt is exact.
    for (int i = 1; i <= 8; ++i) {
        const double r = kSuperpositionRateMin *
                         std::pow(r_cap / kSuperpositionRateMin, static_cast<double>(i) / 8.0);
        for (int j = 1; j <= 8; ++j) {
            const double a = alpha_max * (1.0 - std::pow(10.0, -0.75 * j));
            starts.push_back(Candidate{eval(r, a), r, a});
        }
    }
    try {
        const double rvq = vq_sym_opt(src, p, noise).r_star;
        starts.push_back(Candidate{eval(rvq, 0.0), rvq, 0.0});
    } catch (const NoSignChange&) {
    }

    double best = 1e300, best_r = 0.0, best_alpha = 0.0;
    const double span_r0 = (r_cap - kSuperpositionRateMin) / kGrid;
    const double span_a0 = alpha_max / kGrid;
    for (const Candidate& s : starts) {
        if (s.v >= 1e300) continue;
        double r_ref = s.r, a_ref = s.a;
        const double v = refine(s.r, s.a, 2.0 * span_r0, 2.0 * span_a0, s.v, &r_ref, &a_ref);
        if (v < best) {
            best = v;
            best_r = r_ref;
            best_alpha = a_ref;
        }
    }
    if (best >= 1e300) throw EmptyFeasible("no feasible superposition point found");

    // The rate -> 0 closure of the family is the uncoded scheme: along
    // alpha(r) -> alpha_max the constraints stay satisfiable while the
    // distortion tends to the uncoded value, which positive rates cannot
    // quite reach. Report that limit point when it wins.
    const double uncoded = mac_uncoded(src, ch).d1;
    if (uncoded < best) {
        return SpSymOpt{uncoded, 0.0, alpha_max};
    }
    return SpSymOpt{best, best_r, best_alpha};
}

double high_snr_asymptote_sym(const SourceParams& src, double p, double noise) {
    check_source(src);
    if (!(p > 0.0) || !(noise > 0.0)) throw OutOfDomain("power and noise must be positive");
    return src.sigma2 * std::sqrt(0.5 * (1.0 - src.rho)) * std::sqrt(noise / p);
}

double high_snr_product_check(const SourceParams& src, const MacChannel& ch,
                              const DistortionPair& d) {
    check_source(src);
    check_channel(ch);
    const double s2 = src.sigma2;
    return total_snr(src, ch) * d.d1 * d.d2 / (s2 * s2 * (1.0 - src.rho * src.rho));
}

}  // namespace gmac
