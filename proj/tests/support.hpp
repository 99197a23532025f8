#pragma once

#include <random>

#include "qabsorb/dynamics.hpp"
#include "qabsorb/environment.hpp"
#include "qabsorb/geometry.hpp"
#include "qabsorb/linalg.hpp"
#include "qabsorb/model.hpp"

namespace tsupport {

using namespace qabsorb;

inline cmat random_complex(int r, int c, std::mt19937_64& g)
{
    std::normal_distribution<double> n;
    cmat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            m(i, j) = cplx(n(g), n(g));
    return m;
}

inline cmat random_hermitian(int d, std::mt19937_64& g)
{
    cmat a = random_complex(d, d, g);
    return 0.5 * (a + a.adjoint());
}

inline cmat random_density(int d, std::mt19937_64& g)
{
    cmat a = random_complex(d, d, g);
    cmat r = a * a.adjoint();
    return r / r.trace().real();
}

inline cmat random_pure(int d, std::mt19937_64& g)
{
    cmat v = random_complex(d, 1, g);
    v.normalize();
    return v * v.adjoint();
}

// exp by scaling and squaring of a Taylor series; independent of the
// eigendecomposition used by the library.
inline cmat expm(const cmat& a)
{
    double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    while (nrm > 0.5) {
        nrm /= 2;
        ++s;
    }
    cmat x = a / std::pow(2.0, s);
    cmat term = cmat::Identity(a.rows(), a.cols()), sum = term;
    for (int k = 1; k < 30; ++k) {
        term = term * x / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < s; ++i)
        sum = sum * sum;
    return sum;
}

inline std::shared_ptr<const RateBackend> phenomenological()
{
    return std::make_shared<PhenomenologicalBackend>(PhenomenologicalParams{});
}

inline std::shared_ptr<const RateBackend> equilibrium()
{
    return std::make_shared<EquilibriumBackend>();
}

inline EnvConfig env_with(std::shared_ptr<const RateBackend> b, double TW = 300, double TS = 900)
{
    EnvConfig e;
    e.T_W = TW;
    e.T_S = TS;
    e.backend = std::move(b);
    return e;
}

inline SystemSpec default_spec(int n_q)
{
    SystemSpec s = SystemSpec::from_frequencies(n_q, 8.1e12, 8.1e13);
    return s;
}

inline Model default_model(int n_q, double r_um, double z_um,
                           std::shared_ptr<const RateBackend> b = phenomenological(),
                           double TW = 300, double TS = 900)
{
    const SystemSpec s = default_spec(n_q);
    const Layout l = circle_layout(n_q, r_um * 1e-6, z_um * 1e-6, s.d_qubit);
    return build_model(s, l, env_with(std::move(b), TW, TS));
}

// Gibbs state of the free Hamiltonian at temperature T.
inline cmat gibbs(const cmat& h_free, double T)
{
    const int d = static_cast<int>(h_free.rows());
    cmat g = cmat::Zero(d, d);
    double z = 0;
    for (int a = 0; a < d; ++a) {
        double w = std::exp(-h_free(a, a).real() / (1.380649e-23 * T));
        g(a, a) = w;
        z += w;
    }
    return g / z;
}

// Permutation matrix relabeling qubits: qubit k -> perm[k-1] (1-based).
inline cmat qubit_permutation(int n_q, const std::vector<int>& perm)
{
    const int d = 3 << n_q;
    cmat p = cmat::Zero(d, d);
    for (int idx = 0; idx < d; ++idx) {
        int m = idx >> n_q;
        int bits = idx & ((1 << n_q) - 1);
        int nb = 0;
        for (int k = 1; k <= n_q; ++k) {
            int bit = (bits >> (n_q - k)) & 1;
            int to = perm[k - 1];
            nb |= bit << (n_q - to);
        }
        p((m << n_q) | nb, idx) = 1.0;
    }
    return p;
}

// Machine phase diag(1, 1, -1) on the first factor.
inline cmat machine_gauge(int n_q)
{
    const int d = 3 << n_q;
    cmat u = cmat::Identity(d, d);
    for (int idx = 0; idx < d; ++idx)
        if ((idx >> n_q) == 2)
            u(idx, idx) = -1.0;
    return u;
}

} // namespace tsupport
