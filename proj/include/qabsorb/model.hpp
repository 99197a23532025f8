#pragma once

#include <array>
#include <string>
#include <vector>

#include "qabsorb/environment.hpp"
#include "qabsorb/geometry.hpp"
#include "qabsorb/linalg.hpp"

namespace qabsorb {

struct SystemSpec {
    int n_q = 4;
    double omega_q = 8.1e12;
    double omega_1 = 7.29e13; // |0> <-> |1>
    double omega_2 = 8.1e12;  // |1> <-> |2>, resonant with the qubits
    double omega_3 = 8.1e13;  // |0> <-> |2>
    double d_qubit = 1e-30;   // C m
    std::array<double, 3> d_machine{2.5e-31, 1e-30, 1e-31};

    // Throws ParameterError on violated invariants.
    void validate() const;
    // omega_q, omega_3 given; omega_2 = omega_q, omega_1 = omega_3 - omega_q
    static SystemSpec from_frequencies(int n_q, double omega_q, double omega_3);
};

// M1, M2, M3, q1..qn, with dipoles taken from the layout directions.
std::vector<TransitionSpec> build_transitions(const SystemSpec& spec, const Layout& layout);

struct OperatorSet {
    std::vector<int> dims; // {3, 2, ..., 2}
    int dim = 0;
    std::vector<smat> sigma;    // qubit lowering operators
    std::array<smat, 3> kappa;  // machine lowering operators for transitions 1, 2, 3
    cmat h_free;                // J
    std::vector<cmat> atom_h;   // free Hamiltonian of each site (machine first)

    // Lowering operator of transition i in build_transitions order.
    const smat& lowering(int i) const { return i < 3 ? kappa[i] : sigma[i - 3]; }
};

OperatorSet build_operators(const SystemSpec& spec);

enum class DissipatorKind { local, nonlocal };

// rate * (A_j rho A_i^dagger - 1/2 {A_i^dagger A_j, rho})
struct Channel {
    cplx rate;
    smat a_j;
    smat a_i;
    smat aidag_aj;
};

struct Dissipator {
    std::string label; // "B:q1", "M:2", "nl:M2-q1", "nl:q1-q2"
    DissipatorKind kind = DissipatorKind::local;
    std::vector<int> transitions;
    double omega = 0.0;
    std::vector<Channel> channels;
};

struct Liouvillian {
    int dim = 0;
    std::vector<int> dims;
    cmat h_free;
    cmat h_coupling;
    std::vector<Dissipator> dissipators;

    cmat hamiltonian() const { return h_free + h_coupling; }
};

cmat build_hamiltonian(const SystemSpec& spec, const OperatorSet& ops, const RateSet& rates,
                       const std::vector<TransitionSpec>& transitions);

// Throws PositivityError when a frequency block has a non-PSD rate matrix.
Liouvillian build_dissipators(const SystemSpec& spec, const OperatorSet& ops,
                              const RateSet& rates,
                              const std::vector<TransitionSpec>& transitions);

struct Model {
    SystemSpec spec;
    Layout layout;
    std::vector<TransitionSpec> transitions;
    RateSet rates;
    OperatorSet ops;
    Liouvillian L;
};

Model build_model(const SystemSpec& spec, const Layout& layout, const EnvConfig& env);

cmat apply_dissipator(const Dissipator& d, const cmat& rho);
// Full generator, or without the free rotation when include_free is false.
cmat apply_liouvillian(const Liouvillian& L, const cmat& rho, bool include_free = true);

// d^2 x d^2, column stacking: rho_ab at index a + d b.
cmat liouvillian_matrix(const Liouvillian& L, bool include_free = true);

// Smallest eigenvalue of each frequency block's rate matrix divided by the
// largest rate; the check in build_dissipators compares it with -1e-12.
double kossakowski_margin(const RateSet& rates, const std::vector<TransitionSpec>& transitions);

} // namespace qabsorb
