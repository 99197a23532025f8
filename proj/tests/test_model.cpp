#include "doctest.h"

#include "qabsorb/constants.hpp"
#include "qabsorb/errors.hpp"
#include "support.hpp"

using namespace qabsorb;
using namespace tsupport;

namespace {

cvec vec_of(const cmat& m)
{
    return Eigen::Map<const cvec>(m.data(), m.size());
}

cmat comm(const cmat& a, const cmat& b)
{
    return a * b - b * a;
}

} // namespace

TEST_CASE("operator set dimensions and algebra")
{
    OperatorSet o1 = build_operators(default_spec(1));
    CHECK(o1.dim == 6);
    Eigh e = hermitian_eigendecomposition(cmat(o1.sigma[0].adjoint() * o1.sigma[0]));
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(e.values(i)) < 1e-14);
        CHECK(std::abs(e.values(i + 3) - 1) < 1e-14);
    }

    OperatorSet o4 = build_operators(default_spec(4));
    CHECK(o4.dim == 48);
    for (int n = 0; n < 4; ++n) {
        cmat s = o4.sigma[n];
        CHECK(max_abs(s * s) == 0.0);
        for (int m = 0; m < 4; ++m)
            CHECK(max_abs(comm(s, cmat(o4.sigma[m]))) == 0.0);
    }
    CHECK(max_abs(cmat(o4.kappa[0] * o4.kappa[1]) - cmat(o4.kappa[2])) == 0.0);

    // ground state of the free Hamiltonian
    CHECK(o4.h_free(0, 0) == cplx(0.0));
    Eigh h = hermitian_eigendecomposition(o4.h_free);
    CHECK(h.values(0) == 0.0);
    CHECK(std::abs(std::abs(h.vectors(0, 0)) - 1) < 1e-14);
    const SystemSpec s = default_spec(4);
    CHECK(o4.h_free(47, 47).real() ==
          doctest::Approx(phys::hbar * (s.omega_3 + 4 * s.omega_q)).epsilon(1e-14));
}

TEST_CASE("Hamiltonian structure")
{
    Model m = default_model(4, 0.833, 2.72);
    cmat h = m.L.hamiltonian();
    CHECK(is_hermitian(h));
    const cmat& hc = m.L.h_coupling;
    CHECK(max_abs(comm(hc, m.L.h_free)) <= 1e-12 * max_abs(hc) * max_abs(m.L.h_free));

    // excitation number: machine |1>,|2> count as (0, 1) qubit-like quanta on
    // transition 2, plus qubit excitations
    cmat N = cmat(m.ops.kappa[1].adjoint() * m.ops.kappa[1]);
    for (const auto& s : m.ops.sigma)
        N += cmat(s.adjoint() * s);
    CHECK(max_abs(comm(h, N)) <= 1e-12 * max_abs(h));

    // zero couplings give the bare Hamiltonian
    RateSet rs = m.rates;
    for (auto& p : rs.pairs)
        p.lambda = 0.0;
    cmat h0 = build_hamiltonian(m.spec, m.ops, rs, m.transitions);
    CHECK(max_abs(h0 - m.L.h_free) == 0.0);

    // a missing coupling is a data error
    RateSet missing = m.rates;
    missing.pairs.pop_back();
    CHECK_THROWS_AS(build_hamiltonian(m.spec, m.ops, missing, m.transitions), DataError);
}

TEST_CASE("Hamiltonian is symmetric under the layout reflection")
{
    // (1 3)(2 4) combined with the machine phase diag(1, 1, -1): the relabeling
    // flips the machine dipole relative to qubits 1 and 3, which the phase undoes.
    Model m = default_model(4, 0.833, 2.72);
    cmat p = machine_gauge(4) * qubit_permutation(4, {3, 4, 1, 2});
    cmat h = m.L.hamiltonian();
    CHECK(max_abs(p * h * p.adjoint() - h) <= 1e-12 * max_abs(h));
}

TEST_CASE("dissipators preserve trace and hermiticity")
{
    std::mt19937_64 g(11);
    Model m = default_model(2, 0.833, 2.72);
    for (int t = 0; t < 5; ++t) {
        cmat r = random_density(m.L.dim, g);
        cmat x = random_hermitian(m.L.dim, g);
        for (const auto& d : m.L.dissipators) {
            cmat dr = apply_dissipator(d, r);
            double scale = 1e-12 * (1 + max_abs(dr));
            CHECK(std::abs(dr.trace()) <= scale);
            cmat dx = apply_dissipator(d, x);
            CHECK(max_abs(dx - dx.adjoint()) <= 1e-12 * (1 + max_abs(dx)));
        }
        cmat lr = apply_liouvillian(m.L, r);
        CHECK(std::abs(lr.trace()) <= 1e-12 * max_abs(lr));
    }
}

TEST_CASE("dissipator labels and the absent nonlocal part")
{
    Model m = default_model(4, 0.833, 2.72);
    std::vector<std::string> labels;
    for (const auto& d : m.L.dissipators)
        labels.push_back(d.label);
    auto has = [&](const std::string& s) {
        return std::find(labels.begin(), labels.end(), s) != labels.end();
    };
    CHECK(has("B:q1"));
    CHECK(has("M:1"));
    CHECK(has("M:3"));
    CHECK(has("nl:M2-q1"));
    CHECK(has("nl:q1-q2"));
    CHECK_FALSE(has("nl:M2-q2"));

    RateSet rs = m.rates;
    for (auto& p : rs.pairs)
        p.gp = p.gm = 0.0;
    Liouvillian L = build_dissipators(m.spec, m.ops, rs, m.transitions);
    for (const auto& d : L.dissipators)
        CHECK(d.kind == DissipatorKind::local);
    CHECK(L.dissipators.size() == 3 + 4);

    Model one = default_model(1, 0.833, 2.72);
    int nl = 0;
    for (const auto& d : one.L.dissipators)
        nl += d.kind == DissipatorKind::nonlocal;
    CHECK(nl == 1);
}

TEST_CASE("non-positive rate matrix is rejected")
{
    Model m = default_model(2, 0.833, 2.72);
    RateSet rs = m.rates;
    REQUIRE(!rs.pairs.empty());
    auto& p = rs.pairs.front();
    p.gp = 2.0 * std::sqrt(rs.local[p.a].gp * rs.local[p.b].gp);
    CHECK(kossakowski_margin(rs, m.transitions) < -1e-12);
    CHECK_THROWS_AS(build_dissipators(m.spec, m.ops, rs, m.transitions), PositivityError);
}

TEST_CASE("superoperator matrix matches direct application")
{
    std::mt19937_64 g(12);
    Model m1 = default_model(1, 0.833, 2.72);
    cmat S1 = liouvillian_matrix(m1.L);
    CHECK(S1.rows() == 36);

    Model m = default_model(2, 0.833, 2.72);
    for (bool free : {true, false}) {
        cmat S = liouvillian_matrix(m.L, free);
        for (int t = 0; t < 20; ++t) {
            cmat r = random_density(m.L.dim, g);
            cvec a = S * vec_of(r);
            cvec b = vec_of(apply_liouvillian(m.L, r, free));
            CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());
        }
        // vec(I) is a left null vector
        cvec id = vec_of(cmat::Identity(m.L.dim, m.L.dim));
        CHECK((id.adjoint() * S).cwiseAbs().maxCoeff() <= 1e-12 * S.cwiseAbs().maxCoeff());
    }
}
