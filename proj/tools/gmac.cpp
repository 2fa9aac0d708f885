#include <cstdio>
#include <fstream>
#include <map>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gmac/cli.hpp"
#include "gmac/ratedist.hpp"

namespace {

int run_sweep_cmd(const gmac::SweepSpec& spec) {
    std::cout << gmac::run_sweep(spec);
    return 0;
}

int run_rd_cmd(double sigma2, double rho, double d1, double d2, bool limit) {
    const gmac::SourceParams src{sigma2, rho};
    const gmac::DistortionPair d{d1, d2};
    const double rate = gmac::rd_rate(d, src, limit);
    const char* region = "";
    if (d1 > 0.0 && d2 > 0.0) {
        switch (gmac::classify_region(d, src)) {
            case gmac::RdRegion::Region1:
                region = "D1";
                break;
            case gmac::RdRegion::Region2:
                region = "D2";
                break;
            case gmac::RdRegion::Region3:
                region = "D3";
                break;
        }
    }
    std::cout << "rate_bits,region\n" << gmac::format_value(rate) << "," << region << "\n";
    return 0;
}

int run_simulate_cmd(const std::string& config_path, const std::vector<std::string>& overrides,
                     const std::map<std::string, std::string>& flag_values) {
    std::string text;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config file '" << config_path << "'\n";
            return 1;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    auto kv = gmac::parse_kv_text(text);
    for (const auto& ov : overrides) {
        const auto kv2 = gmac::parse_kv_text(ov);
        for (const auto& [k, v] : kv2) kv[k] = v;
    }
    // Dedicated flags win over both the file and --set.
    for (const auto& [k, v] : flag_values) kv[k] = v;
    const gmac::SimulateSpec spec = gmac::make_simulate_spec(kv);
    std::cout << gmac::run_simulate(spec);
    return 0;
}

int run_verify_cmd() {
    const gmac::VerifyReport report = gmac::run_verify();
    for (const auto& c : report.checks) {
        std::printf("%-32s %s  max_error=%s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    gmac::format_value(c.max_error).c_str());
    }
    return report.all_pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distortion bounds and scheme simulation for a bivariate Gaussian "
                 "source over a two-user Gaussian MAC"};
    app.require_subcommand(1);

    gmac::SweepSpec sweep_spec;
    std::string sweep_schemes;
    std::string sweep_scale = "linear";
    auto* sweep = app.add_subcommand("sweep", "Symmetric-case boundary sweep (CSV)");
    sweep->add_option("--rho", sweep_spec.rho, "source correlation");
    sweep->add_option("--sigma2", sweep_spec.sigma2, "source variance");
    sweep->add_option("--snr-min", sweep_spec.snr_min, "smallest P/N");
    sweep->add_option("--snr-max", sweep_spec.snr_max, "largest P/N");
    sweep->add_option("--points", sweep_spec.points, "grid size");
    sweep->add_option("--scale", sweep_scale, "linear|log");
    sweep->add_option("--schemes", sweep_schemes,
                      "comma list of lower,separation,uncoded,vq,superposition,asymptote");

    std::string sim_config;
    std::vector<std::string> sim_sets;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo scheme simulation (CSV)");
    simulate->add_option("--config", sim_config, "key=value config file");
    simulate->add_option("--set", sim_sets, "key=value override (repeatable)");
    // One flag per config key; flags override the file.
    static const char* kSimKeys[] = {"sigma2", "rho",   "p1",    "p2",     "noise",
                                     "n",      "trials", "epsilon", "seed", "rate1",
                                     "rate2",  "alpha1", "alpha2",  "mode", "scheme"};
    std::map<std::string, std::string> sim_flags;
    for (const char* key : kSimKeys) {
        simulate->add_option_function<std::string>(
            std::string("--") + key,
            [&sim_flags, key](const std::string& v) { sim_flags[key] = v; },
            std::string("config key ") + key);
    }

    app.add_subcommand("verify", "Run the self-verification suite");

    double rd_sigma2 = 1.0, rd_rho = 0.5, rd_d1 = 0.5, rd_d2 = 0.5;
    bool rd_limit = false;
    auto* rd = app.add_subcommand("rd", "Single rate-distortion query");
    rd->add_option("--sigma2", rd_sigma2, "source variance");
    rd->add_option("--rho", rd_rho, "source correlation");
    rd->add_option("--d1", rd_d1, "distortion on component 1")->required();
    rd->add_option("--d2", rd_d2, "distortion on component 2")->required();
    rd->add_flag("--limit", rd_limit, "report +inf for zero distortion");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            if (sweep_scale == "log") {
                sweep_spec.scale = gmac::SweepScale::Log;
            } else if (sweep_scale != "linear") {
                std::cerr << "error: --scale must be linear or log\n";
                return 1;
            }
            if (!sweep_schemes.empty()) {
                std::stringstream ss(sweep_schemes);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (item == "lower") {
                        sweep_spec.schemes.push_back(gmac::SweepScheme::Lower);
                    } else if (item == "separation") {
                        sweep_spec.schemes.push_back(gmac::SweepScheme::Separation);
                    } else if (item == "uncoded") {
                        sweep_spec.schemes.push_back(gmac::SweepScheme::Uncoded);
                    } else if (item == "vq") {
                        sweep_spec.schemes.push_back(gmac::SweepScheme::Vq);
                    } else if (item == "superposition") {
                        sweep_spec.schemes.push_back(gmac::SweepScheme::Superposition);
                    } else if (item == "asymptote") {
                        sweep_spec.schemes.push_back(gmac::SweepScheme::Asymptote);
                    } else {
                        std::cerr << "error: unknown scheme '" << item << "'\n";
                        return 1;
                    }
                }
            }
            return run_sweep_cmd(sweep_spec);
        }
        if (simulate->parsed()) return run_simulate_cmd(sim_config, sim_sets, sim_flags);
        if (app.get_subcommand("verify")->parsed()) return run_verify_cmd();
        if (rd->parsed()) return run_rd_cmd(rd_sigma2, rd_rho, rd_d1, rd_d2, rd_limit);
    } catch (const gmac::BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const gmac::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const gmac::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
