#include "gmac/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <sstream>
#include <thread>

#include "gmac/bounds.hpp"
#include "gmac/ratedist.hpp"
#include "gmac/spheregeom.hpp"

namespace gmac {

namespace {

bool wants(const SweepSpec& spec, SweepScheme s) {
    if (spec.schemes.empty()) return true;
    for (auto x : spec.schemes) {
        if (x == s) return true;
    }
    return false;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': cannot parse number from '" + value + "'");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': cannot parse integer from '" + value + "'");
    }
}

}  // namespace

std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" +
                              line + "'");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);
        if (key.empty() || value.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        }
        if (kv.count(key)) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        kv[key] = value;
    }
    return kv;
}

SimulateSpec make_simulate_spec(const std::map<std::string, std::string>& kv) {
    SimulateSpec spec;
    for (const auto& [key, value] : kv) {
        if (key == "sigma2") {
            spec.sigma2 = parse_double(key, value);
        } else if (key == "rho") {
            spec.rho = parse_double(key, value);
        } else if (key == "p1") {
            spec.p1 = parse_double(key, value);
        } else if (key == "p2") {
            spec.p2 = parse_double(key, value);
        } else if (key == "noise") {
            spec.noise = parse_double(key, value);
        } else if (key == "n") {
            spec.sim.n = static_cast<int>(parse_long(key, value));
        } else if (key == "trials") {
            spec.sim.trials = parse_long(key, value);
        } else if (key == "epsilon") {
            spec.sim.epsilon = parse_double(key, value);
        } else if (key == "seed") {
            spec.sim.seed = static_cast<std::uint64_t>(parse_long(key, value));
        } else if (key == "rate1") {
            spec.rates.r1 = parse_double(key, value);
        } else if (key == "rate2") {
            spec.rates.r2 = parse_double(key, value);
        } else if (key == "alpha1") {
            spec.alpha1 = parse_double(key, value);
        } else if (key == "alpha2") {
            spec.alpha2 = parse_double(key, value);
        } else if (key == "mode") {
            if (value == "genie") {
                spec.sim.mode = DecoderMode::Genie;
            } else if (value == "full") {
                spec.sim.mode = DecoderMode::FullJoint;
            } else {
                throw ConfigError("field 'mode': expected genie|full, got '" + value + "'");
            }
        } else if (key == "scheme") {
            if (value == "uncoded") {
                spec.scheme = SimScheme::Uncoded;
            } else if (value == "vq") {
                spec.scheme = SimScheme::Vq;
            } else if (value == "superposition") {
                spec.scheme = SimScheme::Superposition;
            } else {
                throw ConfigError("field 'scheme': expected uncoded|vq|superposition, got '" +
                                  value + "'");
            }
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    if (const char* env = std::getenv("GAUSSMAC_SEED")) {
        spec.sim.seed = static_cast<std::uint64_t>(parse_long("GAUSSMAC_SEED", env));
    }
    return spec;
}

std::string run_sweep(const SweepSpec& spec) {
    if (!(spec.snr_min > 0.0) || !(spec.snr_max >= spec.snr_min)) {
        throw ConfigError("sweep needs 0 < snr_min <= snr_max");
    }
    if (spec.points < 2) throw ConfigError("sweep needs points >= 2");
    const SourceParams src{spec.sigma2, spec.rho};
    check_source(src);

    std::vector<double> snrs(static_cast<std::size_t>(spec.points));
    for (int i = 0; i < spec.points; ++i) {
        const double f = static_cast<double>(i) / (spec.points - 1);
        snrs[static_cast<std::size_t>(i)] =
            (spec.scale == SweepScale::Log)
                ? spec.snr_min * std::pow(spec.snr_max / spec.snr_min, f)
                : spec.snr_min + (spec.snr_max - spec.snr_min) * f;
    }

    struct Row {
        double snr;
        double vals[6];
        bool have[6];
    };
    std::vector<Row> rows(snrs.size());
    const auto compute_row = [&](std::size_t i) {
        const double snr = snrs[i];
        const double noise = 1.0;
        const double p = snr;
        Row row{};
        row.snr = snr;
        const SweepScheme order[6] = {SweepScheme::Lower,         SweepScheme::Separation,
                                      SweepScheme::Uncoded,       SweepScheme::Vq,
                                      SweepScheme::Superposition, SweepScheme::Asymptote};
        for (int c = 0; c < 6; ++c) {
            row.have[c] = wants(spec, order[c]);
            if (!row.have[c]) continue;
            double v = 0.0;
            switch (order[c]) {
                case SweepScheme::Lower:
                    v = lower_bound_sym(src, p, noise);
                    break;
                case SweepScheme::Separation:
                    v = separation_sym(src, p, noise);
                    break;
                case SweepScheme::Uncoded:
                    v = uncoded_sym_dstar(src, p, noise).first;
                    break;
                case SweepScheme::Vq:
                    v = vq_sym_opt(src, p, noise).distortion;
                    break;
                case SweepScheme::Superposition:
                    v = sp_sym_opt(src, p, noise).distortion;
                    break;
                case SweepScheme::Asymptote:
                    v = high_snr_asymptote_sym(src, p, noise);
                    break;
            }
            row.vals[c] = v / spec.sigma2;
        }
        rows[i] = row;
    };

    // Rows are independent; parallelize but emit in order.
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, rows.size());
    if (workers > 1) {
        std::vector<std::future<void>> futures;
        for (std::size_t w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < rows.size(); i += workers) compute_row(i);
            }));
        }
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t i = 0; i < rows.size(); ++i) compute_row(i);
    }

    std::string out = "snr,d_lower,d_sep,d_uncoded,d_vq,d_sup,d_asym\n";
    for (const auto& row : rows) {
        out += format_value(row.snr);
        for (int c = 0; c < 6; ++c) {
            out += ',';
            if (row.have[c]) out += format_value(row.vals[c]);
        }
        out += '\n';
    }
    return out;
}

std::string run_simulate(const SimulateSpec& spec) {
    const SourceParams src{spec.sigma2, spec.rho};
    const MacChannel ch{spec.p1, spec.p2, spec.noise};
    check_source(src);
    check_channel(ch);

    SchemeEmpirics agg;
    std::vector<SchemeEmpirics> per_trial;
    DistortionPair ref;
    switch (spec.scheme) {
        case SimScheme::Uncoded:
            agg = sim_uncoded_mac(spec.sim, src, ch, &per_trial);
            ref = mac_uncoded(src, ch);
            break;
        case SimScheme::Vq:
            agg = sim_vq(spec.sim, src, ch, spec.rates, &per_trial);
            ref = vq_distortions(spec.rates, src);
            break;
        case SimScheme::Superposition: {
            const SuperpositionConfig cfg{spec.rates, spec.alpha1, spec.alpha2};
            agg = sim_superposition(spec.sim, src, ch, cfg, &per_trial);
            ref = sp_distortions(sp_derive(cfg, src, ch), src);
            break;
        }
    }

    std::string out = "row,d1,d2,decode_error_rate,encode_failure_rate,power1,power2\n";
    for (std::size_t t = 0; t < per_trial.size(); ++t) {
        const SchemeEmpirics& e = per_trial[t];
        out += std::to_string(t) + "," + format_value(e.d1_hat) + "," + format_value(e.d2_hat) +
               "," + format_value(e.decode_error_rate) + "," +
               format_value(e.encode_failure_rate) + "," + format_value(e.power1_used) + "," +
               format_value(e.power2_used) + "\n";
    }
    out += "aggregate," + format_value(agg.d1_hat) + "," + format_value(agg.d2_hat) + "," +
           format_value(agg.decode_error_rate) + "," + format_value(agg.encode_failure_rate) +
           "," + format_value(agg.power1_used) + "," + format_value(agg.power2_used) + "\n";
    out += "reference," + format_value(ref.d1) + "," + format_value(ref.d2) + ",,,,\n";
    const double z1 = (agg.d1_se > 0.0) ? (agg.d1_hat - ref.d1) / agg.d1_se : 0.0;
    const double z2 = (agg.d2_se > 0.0) ? (agg.d2_hat - ref.d2) / agg.d2_se : 0.0;
    out += "zscore," + format_value(z1) + "," + format_value(z2) + ",,,,\n";
    return out;
}

VerifyReport run_verify() {
    VerifyReport report;

    // Closed-form rate-distortion function against the waterfilling
    // oracle on a grid, three correlation values.
    {
        VerifyCheck c{"rd-vs-waterfill", true, 0.0, ""};
        const int grid = 40;
        for (double rho : {0.1, 0.5, 0.9}) {
            const SourceParams src{1.0, rho};
            for (int i = 1; i <= grid; ++i) {
                for (int j = 1; j <= grid; ++j) {
                    const DistortionPair d{0.01 + 0.99 * i / grid, 0.01 + 0.99 * j / grid};
                    if (classify_region(d, src) == RdRegion::Region1) continue;
                    const double closed = rd_rate(d, src);
                    const double oracle = waterfill_oracle_rate(d, src, 1e-9);
                    c.max_error = std::max(c.max_error, std::fabs(closed - oracle));
                }
            }
        }
        c.pass = c.max_error <= 1e-6;
        report.checks.push_back(c);
    }

    // Continuity of rd_rate across the region boundaries.
    {
        VerifyCheck c{"rd-boundary-continuity", true, 0.0, ""};
        const SourceParams src{1.0, 0.5};
        CounterRng rng(7);
        for (int k = 0; k < 200; ++k) {
            const double d1 = 0.05 + 0.69 * rng.uniform01();
            // D2/D3 boundary for this d1.
            const double b23 = (0.75 - d1) / (1.0 - d1);
            const double b31 = 0.75 + 0.25 * d1;
            for (double b : {b23, b31}) {
                if (!(b > 1e-6) || b >= 1.0) continue;
                const double lo = rd_rate(DistortionPair{d1, b * (1.0 - 1e-9)}, src);
                const double hi = rd_rate(DistortionPair{d1, b * (1.0 + 1e-9)}, src);
                c.max_error = std::max(c.max_error, std::fabs(lo - hi));
            }
        }
        c.pass = c.max_error <= 1e-6;
        report.checks.push_back(c);
    }

    // Uncoded scheme meets the converse with equality exactly when the
    // optimality condition holds.
    {
        VerifyCheck c{"uncoded-converse-equality", true, 0.0, ""};
        CounterRng rng(11);
        for (int k = 0; k < 200; ++k) {
            const SourceParams src{1.0, 0.05 + 0.9 * rng.uniform01()};
            const MacChannel ch{0.1 + 3.0 * rng.uniform01(), 0.1 + 3.0 * rng.uniform01(),
                                0.1 + 3.0 * rng.uniform01()};
            const auto opt = mac_uncoded_is_optimal(src, ch);
            const auto [ok, slack] = necessary_condition(mac_uncoded(src, ch), src, ch);
            (void)ok;
            if (opt.optimal) {
                c.max_error = std::max(c.max_error, std::fabs(slack));
            } else if (slack <= 1e-9) {
                c.max_error = std::max(c.max_error, 1.0);  // should have a positive gap
            }
        }
        c.pass = c.max_error <= 1e-9;
        report.checks.push_back(c);
    }

    // Superposition with alpha = 0 reduces to the vector quantizer.
    {
        VerifyCheck c{"superposition-alpha0-reduction", true, 0.0, ""};
        const SourceParams src{1.0, 0.5};
        for (int i = 1; i <= 10; ++i) {
            for (int j = 1; j <= 10; ++j) {
                const double r = 0.1 + 0.2 * i;
                const double snr = 0.25 * std::pow(2.0, j - 1);
                const MacChannel ch{snr, snr, 1.0};
                const RatePair rp{r, r};
                const auto der = sp_derive(SuperpositionConfig{rp, 0.0, 0.0}, src, ch);
                const auto dsp = sp_distortions(der, src);
                const auto dvq = vq_distortions(rp, src);
                c.max_error = std::max({c.max_error, std::fabs(dsp.d1 - dvq.d1),
                                        std::fabs(dsp.d2 - dvq.d2), der.residual1,
                                        der.residual2});
                const auto fsp = sp_rate_feasible(der, src);
                const auto fvq = vq_rate_feasible(rp, src, ch);
                if (fsp.feasible != fvq.feasible) c.max_error = std::max(c.max_error, 1.0);
            }
        }
        c.pass = c.max_error <= 1e-9;
        report.checks.push_back(c);
    }

    // Cap-area bounds sandwich a Monte Carlo estimate.
    {
        VerifyCheck c{"cap-bound-sandwich", true, 0.0, ""};
        CounterRng rng(13);
        const int samples = 200000;
        for (int n : {10, 20, 50}) {
            for (double deg : {30.0, 45.0, 60.0}) {
                const double phi = deg * 3.14159265358979323846 / 180.0;
                const CapBounds cb = cap_ratio_bounds(n, phi);
                const double cphi = std::cos(phi);
                long hits = 0;
                for (int s = 0; s < samples; ++s) {
                    const auto v = sample_sphere(n, 1.0, rng);
                    if (v[0] >= cphi) ++hits;
                }
                const double frac = static_cast<double>(hits) / samples;
                const double se =
                    4.0 * std::sqrt(std::max(frac, cb.upper) / samples) + 4.0 / samples;
                const double breach =
                    std::max({0.0, cb.lower - frac - se, frac - cb.upper - se});
                c.max_error = std::max(c.max_error, breach);
            }
        }
        c.pass = c.max_error <= 0.0;
        report.checks.push_back(c);
    }

    // Gamma ratio series against exact log-gamma.
    {
        VerifyCheck c{"gamma-ratio-series", true, 0.0, ""};
        for (double x = 5.0; x <= 100.0; x += 0.5) {
            const double rel = std::fabs(gamma_half_ratio_series(x) / gamma_half_ratio_exact(x) -
                                         1.0);
            c.max_error = std::max(c.max_error, rel);
        }
        c.pass = c.max_error <= 1e-6;
        report.checks.push_back(c);
    }

    // Symmetric ordering along an SNR sweep.
    {
        VerifyCheck c{"symmetric-ordering", true, 0.0, ""};
        const SourceParams src{1.0, 0.5};
        for (int i = 0; i < 20; ++i) {
            const double snr = 0.1 + (3.0 - 0.1) * i / 19.0;
            const double lower = lower_bound_sym(src, snr, 1.0);
            const double sep = separation_sym(src, snr, 1.0);
            const double unc = uncoded_sym_dstar(src, snr, 1.0).first;
            const double vq = vq_sym_opt(src, snr, 1.0).distortion;
            const double sp = sp_sym_opt(src, snr, 1.0).distortion;
            c.max_error = std::max({c.max_error, lower - sp, sp - std::min(unc, vq), vq - sep});
        }
        c.pass = c.max_error <= 1e-9;
        report.checks.push_back(c);
    }

    return report;
}

}  // namespace gmac
