#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace qabsorb {

using vec3 = Eigen::Vector3d;

enum class SiteKind { machine, qubit };

struct AtomSite {
    vec3 position;         // m, slab surface is z = 0
    vec3 dipole_direction; // unit
    double dipole_magnitude = 0.0; // C m
    SiteKind kind = SiteKind::qubit;
    int qubit_index = 0;   // 1..n_q for qubits, 0 for the machine
};

struct Layout {
    std::vector<AtomSite> sites; // machine first, then qubits counterclockwise
    double r = 0.0;
    double z = 0.0;

    int n_qubits() const { return static_cast<int>(sites.size()) - 1; }
};

struct PairFrame {
    double separation = 0.0;
    vec3 ex, ey, ez;
    vec3 dipole_a; // components in (ex, ey, ez)
    vec3 dipole_b;
};

Layout circle_layout(int n_q, double r, double z, double dipole_magnitude);

PairFrame pair_geometry(const Layout& layout, int a, int b);

Layout gaussian_perturb(const Layout& layout, double sigma, std::uint64_t seed);

} // namespace qabsorb
