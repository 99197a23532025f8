#include "qabsorb/geometry.hpp"

#include <cmath>

#include "qabsorb/constants.hpp"
#include "qabsorb/errors.hpp"
#include "qabsorb/rng.hpp"

namespace qabsorb {

namespace {

void aim_qubits(Layout& l)
{
    const vec3 m = l.sites[0].position;
    for (size_t k = 1; k < l.sites.size(); ++k) {
        vec3 d = m - l.sites[k].position;
        d.z() = 0.0;
        double n = d.norm();
        if (n == 0.0)
            throw GeometryError("qubit " + std::to_string(k) + " coincides with the machine");
        l.sites[k].dipole_direction = d / n;
    }
}

} // namespace

Layout circle_layout(int n_q, double r, double z, double dipole_magnitude)
{
    if (n_q < 1)
        throw ParameterError("circle_layout: n_q must be >= 1");
    if (!(r > 0.0) || !(z > 0.0))
        throw ParameterError("circle_layout: r and z must be positive");
    Layout l;
    l.r = r;
    l.z = z;
    AtomSite m;
    m.position = vec3(0, 0, z);
    m.dipole_direction = vec3(1, 0, 0);
    m.dipole_magnitude = dipole_magnitude;
    m.kind = SiteKind::machine;
    l.sites.push_back(m);
    for (int k = 1; k <= n_q; ++k) {
        double phi = 2.0 * phys::pi * (k - 1) / n_q;
        AtomSite q;
        q.position = vec3(r * std::cos(phi), r * std::sin(phi), z);
        q.dipole_magnitude = dipole_magnitude;
        q.kind = SiteKind::qubit;
        q.qubit_index = k;
        l.sites.push_back(q);
    }
    aim_qubits(l);
    return l;
}

PairFrame pair_geometry(const Layout& layout, int a, int b)
{
    const int n = static_cast<int>(layout.sites.size());
    if (a < 0 || b < 0 || a >= n || b >= n)
        throw ParameterError("pair_geometry: site index out of range");
    if (a == b)
        throw ContractError("pair_geometry: a == b");
    const AtomSite& sa = layout.sites[a];
    const AtomSite& sb = layout.sites[b];
    vec3 d = sb.position - sa.position;
    double sep = d.norm();
    if (sep == 0.0 || sep < 1e-15 * (sa.position.norm() + sb.position.norm()))
        throw GeometryError("pair_geometry: coincident sites " + std::to_string(a) + ", " +
                            std::to_string(b));
    PairFrame f;
    f.separation = sep;
    f.ex = d / sep;
    vec3 nz(0, 0, 1);
    vec3 ez = nz - nz.dot(f.ex) * f.ex;
    if (ez.norm() < 1e-12)
        ez = vec3(1, 0, 0) - f.ex.x() * f.ex; // pair along the normal
    f.ez = ez.normalized();
    f.ey = f.ez.cross(f.ex);
    auto comps = [&](const vec3& p) { return vec3(p.dot(f.ex), p.dot(f.ey), p.dot(f.ez)); };
    f.dipole_a = comps(sa.dipole_direction);
    f.dipole_b = comps(sb.dipole_direction);
    return f;
}

Layout gaussian_perturb(const Layout& layout, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0))
        throw ParameterError("gaussian_perturb: sigma must be >= 0");
    if (sigma == 0.0)
        return layout;
    Layout out = layout;
    NormalRng rng(seed);
    for (auto& s : out.sites) {
        s.position.x() += sigma * rng.normal();
        s.position.y() += sigma * rng.normal();
    }
    aim_qubits(out);
    return out;
}

} // namespace qabsorb
