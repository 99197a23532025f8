#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qabsorb/dynamics.hpp"
#include "qabsorb/model.hpp"

namespace qabsorb {

struct PopulationTemperature {
    double theta = 0.0; // K, negative under inversion, +-inf at equal populations
    double mbeta = 0.0; // -1/theta, 1/K; -inf when p_e = 0, +inf when p_g = 0
};

PopulationTemperature population_temperature(const DensityMatrix& rho, const smat& lowering,
                                             double omega);
PopulationTemperature population_temperature(const DensityMatrix& rho, const Model& m,
                                             int transition);

// Re tr(H D(rho)), W.
double dissipator_heat_flux(const cmat& h, const Dissipator& d, const DensityMatrix& rho);

// c_nm = tr(rho A_n^dagger A_m) for transitions n, m.
cplx pair_coherence(const DensityMatrix& rho, const Model& m, int n, int mm);

// Energy per second entering transition n from m through the coupling.
double resonant_flux(const DensityMatrix& rho, const Model& m, int from, int to);

// Shared nonlocal flux of a resonant pair.
double nonlocal_flux(const DensityMatrix& rho, const Model& m, int n, int mm);

// Local flux of transition i computed with the free Hamiltonian.
double local_flux(const DensityMatrix& rho, const Model& m, int i);

// X_i of Q_i = X_i (exp(hw/k theta) - exp(hw/k T)); empty when theta = T or
// the environment is at zero temperature.
std::optional<double> flux_prefactor(const DensityMatrix& rho, const Model& m, int i);

struct EntropyOptions {
    bool local_only = false;       // skip nonlocal dissipators
    bool include_state_term = true; // -k_B tr(L(rho) ln rho); zero at stationarity
};

// W/K. Throws DegeneracyError naming the dissipator whose kernel is not unique.
double entropy_production(const Model& m, const DensityMatrix& rho,
                          const EntropyOptions& opt = {});

struct CollectiveOptions {
    double mbeta_max = 0.0; // 1/K; 0 means 10 k_B / (hbar omega_q)
    int grid = 2001;
    double rel_tol = 1e-10; // golden-section stop, relative to mbeta_max
};

struct CollectiveTemperature {
    double T = 0.0;       // K, negative under inversion
    double mbeta = 0.0;   // 1/K
    double residual = 0.0; // trace distance at the minimum
};

// rho_q on n_q qubits of frequency omega_q.
CollectiveTemperature collective_temperature_qubits(const cmat& rho_q, int n_q, double omega_q,
                                                    const CollectiveOptions& opt = {});
CollectiveTemperature collective_temperature(const DensityMatrix& rho, const SystemSpec& spec,
                                             const CollectiveOptions& opt = {});

// Thermal product state of n_q qubits at inverse temperature -mbeta.
cmat qubit_thermal_state(int n_q, double omega_q, double mbeta);

struct FluxReport {
    std::vector<std::string> dissipator_labels;
    std::vector<double> dissipator_flux;      // with H_sys
    std::vector<double> local;                // per transition, with H_free
    std::vector<std::optional<double>> prefactor;
    struct Pair {
        int a, b;
        double resonant_ab; // b -> a
        double nonlocal;
    };
    std::vector<Pair> pairs;
    double dU_dt = 0.0;
    double entropy = 0.0;
};

struct TemperatureReport {
    std::vector<EnvTemperature> environment;
    std::vector<PopulationTemperature> population;
};

TemperatureReport temperatures(const DensityMatrix& rho, const Model& m);
FluxReport fluxes(const DensityMatrix& rho, const Model& m, bool with_entropy = true,
                  const EntropyOptions& eopt = {false, false});

} // namespace qabsorb
