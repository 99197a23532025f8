#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qabsorb/environment.hpp"
#include "qabsorb/model.hpp"

namespace qabsorb {

struct EnvSpec {
    double T_S = 900.0;       // K
    double T_W = 300.0;       // K
    double delta_um = 0.05;
    double omega_S = 0.81e14; // rad/s
    double epsilon = 1.0;
    std::string backend = "phenomenological";
    // phenomenological
    double z0_um = 3.0;
    double p = 2.0;
    double amplitude = 10.0;
    double off_resonance = 1.0;
    double window = 0.05;
    std::map<std::string, double> amplitudes;
    // tabulated
    std::string table;
};

struct ObservableFlags {
    bool temperatures = true;
    bool fluxes = true;
    bool entropy = true;
    bool entropy_local_only = false;
    bool collective_temperature = true;
    bool correlations = false;
};

struct SweepSpec {
    bool enabled = false;
    std::string axis = "z"; // z | epsilon | r | n_q
    double min = 0.0, max = 0.0;
    int points = 1;
    std::string spacing = "linear"; // linear | log

    std::vector<double> values() const;
};

struct MonteCarloSpec {
    int samples = 0;
    double sigma_um = 0.0;
    std::uint64_t seed = 1;
};

struct Scenario {
    SystemSpec system;
    double r_um = 0.833;
    double z_um = 2.72;
    EnvSpec environment;
    ObservableFlags observables;
    SweepSpec sweep;
    MonteCarloSpec montecarlo;
    std::string base_dir; // for relative table paths
    std::string canonical; // normalized text of the parsed document
};

// Throws ConfigError on syntax errors, unknown keys, bad values.
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

std::shared_ptr<const RateBackend> make_backend(const EnvSpec& e, const std::string& base_dir);

// 64-bit FNV-1a
std::uint64_t fnv1a(const std::string& s);

} // namespace qabsorb
