#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gmac/mcsim.hpp"
#include "gmac/model.hpp"

namespace gmac {

/// Which symmetric-case curves a sweep emits.
enum class SweepScheme { Lower, Separation, Uncoded, Vq, Superposition, Asymptote };

enum class SweepScale { Linear, Log };

struct SweepSpec {
    double rho = 0.5;
    double sigma2 = 1.0;
    double snr_min = 0.1;  // P/N
    double snr_max = 3.0;
    int points = 30;
    SweepScale scale = SweepScale::Linear;
    std::vector<SweepScheme> schemes;  // empty means all
};

/// Scheme selected by a simulate run.
enum class SimScheme { Uncoded, Vq, Superposition };

/// Flat key=value configuration for the simulate subcommand. Unknown
/// keys are rejected with a named-field diagnostic.
struct SimulateSpec {
    double sigma2 = 1.0;
    double rho = 0.5;
    double p1 = 1.0;
    double p2 = 1.0;
    double noise = 1.0;
    SimConfig sim;
    RatePair rates;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    SimScheme scheme = SimScheme::Uncoded;
};

/// Format a double with 9 significant digits; infinities become "inf".
std::string format_value(double v);

/// Parse flat key=value text (one pair per line, '#' comments).
/// Throws ConfigError with the offending line and key.
std::map<std::string, std::string> parse_kv_text(const std::string& text);

/// Interpret parsed keys as a SimulateSpec. Throws ConfigError on
/// unknown keys or malformed values. GAUSSMAC_SEED, when set in the
/// environment, overrides the configured seed.
SimulateSpec make_simulate_spec(const std::map<std::string, std::string>& kv);

/// Symmetric-case boundary sweep; returns a CSV table with one row per
/// SNR point, distortions normalized by sigma2.
std::string run_sweep(const SweepSpec& spec);

/// Run the configured simulation; returns a CSV table with per-trial
/// rows, the aggregate, the closed-form reference and z-scores.
std::string run_simulate(const SimulateSpec& spec);

struct VerifyCheck {
    std::string name;
    bool pass = false;
    double max_error = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks) {
            if (!c.pass) return false;
        }
        return true;
    }
};

/// Self-verification suite: oracle equivalence, boundary continuity,
/// uncoded converse equality, superposition reduction, cap-bound
/// sandwich, gamma-ratio series, and the symmetric ordering sweep.
VerifyReport run_verify();

}  // namespace gmac
