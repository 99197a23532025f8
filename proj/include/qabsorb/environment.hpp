#pragma once

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qabsorb/geometry.hpp"

namespace qabsorb {

enum class TransitionLabel { qubit, machine1, machine2, machine3 };

struct TransitionSpec {
    int site = 0;              // index into Layout::sites
    TransitionLabel label = TransitionLabel::qubit;
    int qubit_index = 0;       // 1..n_q for qubit transitions
    double omega = 0.0;        // rad/s
    vec3 dipole = vec3::Zero(); // C m

    std::string id() const;    // "M1", "M2", "M3", "q1", ...
};

// Canonical id of a pair, lower transition index first: "M2-q1", "q1-q3".
std::string pair_id(const TransitionSpec& a, const TransitionSpec& b);

struct LocalAlpha {
    double alpha_W = 0.0;
    double alpha_S = 0.0;
};

struct PairAlpha {
    std::complex<double> alpha_W = 0.0; // includes the orientation projection
    std::complex<double> alpha_S = 0.0;
    double K = 0.0;                     // reflected part of the coupling
};

struct FreeSpaceCorrelation {
    double dissipative = 0.0; // F_ab, -> p_a . p_b at zero separation
    double coupling = 0.0;    // Lambda_0 / sqrt(gamma_a gamma_b)
};

// Free-space dyadic Green function projected on two unit dipoles given in a
// pair frame, at x = omega * separation / c.
FreeSpaceCorrelation free_space_correlation(const PairFrame& frame, double omega);

class RateBackend {
public:
    virtual ~RateBackend() = default;
    virtual std::string name() const = 0;
    virtual LocalAlpha local(const TransitionSpec& t, double z) const = 0;
    // free_F is the vacuum dissipative correlation of the pair; analytic
    // backends scale it, tables supply the full value.
    virtual PairAlpha pair(const TransitionSpec& a, const TransitionSpec& b, double free_F,
                           double z) const = 0;
};

class EquilibriumBackend final : public RateBackend {
public:
    std::string name() const override { return "equilibrium"; }
    LocalAlpha local(const TransitionSpec&, double) const override;
    PairAlpha pair(const TransitionSpec& a, const TransitionSpec& b, double free_F,
                   double z) const override;
};

struct PhenomenologicalParams {
    double z0 = 3e-6;          // m
    double p = 2.0;
    double amplitude = 10.0;   // A for transitions resonant with the slab
    double off_resonance = 1.0;
    double window = 0.05;      // |omega - omega_S| / omega_S
    double omega_S = 0.81e14;
    std::map<std::string, double> amplitude_override; // by transition id
};

class PhenomenologicalBackend final : public RateBackend {
public:
    explicit PhenomenologicalBackend(PhenomenologicalParams p) : p_(std::move(p)) {}
    std::string name() const override { return "phenomenological"; }
    LocalAlpha local(const TransitionSpec& t, double z) const override;
    PairAlpha pair(const TransitionSpec& a, const TransitionSpec& b, double free_F,
                   double z) const override;
    double amplitude(const TransitionSpec& t) const;
    const PhenomenologicalParams& params() const { return p_; }

private:
    double screen(double z) const;
    PhenomenologicalParams p_;
};

class TabulatedBackend final : public RateBackend {
public:
    struct Row {
        std::string id;
        double omega, z, alpha_W, alpha_S, K;
    };
    // Parse the whitespace table; throws DataError on malformed rows.
    static TabulatedBackend from_file(const std::string& path);
    static TabulatedBackend from_string(const std::string& text);

    std::string name() const override { return "tabulated"; }
    LocalAlpha local(const TransitionSpec& t, double z) const override;
    PairAlpha pair(const TransitionSpec& a, const TransitionSpec& b, double free_F,
                   double z) const override;
    const std::vector<Row>& rows() const { return rows_; }

private:
    const Row& find(const std::string& id, double omega, double z) const;
    std::vector<Row> rows_;
};

struct EnvConfig {
    double T_S = 900.0;
    double T_W = 300.0;
    double delta = 0.05e-6;
    double omega_S = 0.81e14;
    double epsilon = 1.0; // scale already applied to T_S, T_W by scale_temperatures
    std::shared_ptr<const RateBackend> backend;
};

struct LocalRate {
    double gp = 0.0; // emission
    double gm = 0.0; // absorption
};

// Pair (a, b) with a < b in transition order. Channel convention follows the
// dissipator: rate gp multiplies sigma_b rho sigma_a^dagger, its conjugate the
// swapped term.
struct PairRate {
    int a = 0, b = 0;
    std::complex<double> gp = 0.0, gm = 0.0;
    double lambda = 0.0; // rad/s
};

struct RateSet {
    std::vector<LocalRate> local;  // indexed like the transition list
    std::vector<PairRate> pairs;

    const PairRate* find_pair(int a, int b) const;
};

double gamma0(double omega, double dipole_magnitude);
double bose_occupation(double omega, double T);

LocalRate local_rates(const TransitionSpec& t, const EnvConfig& env, const Layout& layout);
PairRate pair_rates(const TransitionSpec& a, const TransitionSpec& b, const EnvConfig& env,
                    const Layout& layout);

struct EnvTemperature {
    double T = 0.0;     // K, +inf for equal rates
    double mbeta = 0.0; // -1/T, 1/K
};
EnvTemperature env_temperature(double gp, double gm, double omega);

EnvConfig scale_temperatures(const EnvConfig& env, double epsilon);

bool resonant(double w1, double w2);

// Rates for every transition and every resonant pair of distinct owners.
RateSet compute_rates(const std::vector<TransitionSpec>& transitions, const EnvConfig& env,
                      const Layout& layout);

} // namespace qabsorb
