#include "doctest.h"

#include "qabsorb/constants.hpp"
#include "qabsorb/correlations.hpp"
#include "qabsorb/errors.hpp"
#include "qabsorb/thermodynamics.hpp"
#include "support.hpp"

using namespace qabsorb;
using namespace tsupport;

namespace {
constexpr double um = 1e-6;

Model model_with(SystemSpec s, double r_um, double z_um, EnvConfig e)
{
    Layout l = circle_layout(s.n_q, r_um * um, z_um * um, s.d_qubit);
    return build_model(s, l, e);
}

cvec vec_of(const cmat& m)
{
    return Eigen::Map<const cvec>(m.data(), m.size());
}
} // namespace

TEST_CASE("single qubit in equilibrium relaxes to the Gibbs state")
{
    for (double T : {100.0, 300.0}) {
        Model m = default_model(1, 0.833, 2.72, equilibrium(), T, T);
        SteadyReport rep = steady_state_report(m.L);
        CHECK(rep.residual <= 1e-10);
        CHECK(rep.null_dimension == 1);
        cmat rq = partial_trace(rep.rho.matrix, m.L.dims, {1});
        const LocalRate& r = m.rates.local[3];
        CHECK(rq(1, 1).real() / rq(0, 0).real() == doctest::Approx(r.gm / r.gp).epsilon(1e-9));
        CHECK(r.gm / r.gp ==
              doctest::Approx(std::exp(-phys::hbar * m.spec.omega_q / (phys::k_B * T))).epsilon(1e-12));
        CHECK(trace_distance(rep.rho.matrix, gibbs(m.L.h_free, T)) <= 1e-8);
    }
}

TEST_CASE("machine populations in equilibrium share one temperature")
{
    const double T = 300;
    Model m = default_model(2, 0.833, 2.72, equilibrium(), T, T);
    DensityMatrix rho = steady_state(m.L);
    for (int t = 0; t < 3; ++t) {
        PopulationTemperature p = population_temperature(rho, m, t);
        CHECK(p.theta == doctest::Approx(T).epsilon(1e-8));
    }
}

TEST_CASE("steady state residual on the default configuration")
{
    Model m = default_model(4, 0.833, 2.72);
    SteadyReport rep = steady_state_report(m.L);
    CHECK(rep.residual <= 1e-10);
    CHECK(rep.min_eig_raw >= -1e-9);
    CHECK_NOTHROW(check_density_matrix(rep.rho));
    // the full generator also annihilates the state; its norm is set by the
    // largest free Bohr frequency
    cmat full = apply_liouvillian(m.L, rep.rho.matrix, true);
    const double norm_full = 2.0 * m.L.h_free.cwiseAbs().maxCoeff() / phys::hbar;
    CHECK(full.norm() <= 1e-10 * norm_full * rep.rho.matrix.norm());
}

TEST_CASE("sector solution agrees with the full interaction-picture generator")
{
    Model m = default_model(1, 0.833, 2.72);
    cmat S = liouvillian_matrix(m.L, false);
    Eigen::JacobiSVD<cmat> svd(S, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const int n = static_cast<int>(sv.size());
    REQUIRE(sv(n - 1) <= 1e-12 * sv(0));
    REQUIRE(sv(n - 2) > 1e-12 * sv(0));
    cvec v = svd.matrixV().col(n - 1);
    cmat rho = Eigen::Map<cmat>(v.data(), m.L.dim, m.L.dim);
    rho /= rho.trace();
    DensityMatrix ss = steady_state(m.L);
    CHECK(trace_distance(hermitize(rho), ss.matrix) <= 1e-9);
    CHECK((S * vec_of(ss.matrix)).norm() <= 1e-10 * sv(0) * ss.matrix.norm());
}

TEST_CASE("sparse LU path matches the dense path")
{
    Model m = default_model(3, 0.833, 2.72);
    SteadyOptions svd_opt, lu_opt;
    svd_opt.method = SteadyMethod::sector_svd;
    lu_opt.method = SteadyMethod::sector_lu;
    SteadyReport a = steady_state_report(m.L, svd_opt), b = steady_state_report(m.L, lu_opt);
    CHECK(trace_distance(a.rho.matrix, b.rho.matrix) <= 1e-9);
    CHECK(b.residual <= 1e-10);
}

TEST_CASE("isolated qubit gives a degenerate stationary manifold")
{
    SystemSpec s = default_spec(1);
    s.d_qubit = 0.0;
    Model m = model_with(s, 0.833, 2.72, env_with(phenomenological()));
    CHECK_THROWS_AS(steady_state(m.L), DegeneracyError);
    try {
        steady_state(m.L);
    } catch (const DegeneracyError& e) {
        CHECK(std::string(e.what()).find("dimension 2") != std::string::npos);
    }
}

TEST_CASE("steady state respects the layout reflection")
{
    Model m = default_model(4, 0.833, 2.72);
    DensityMatrix rho = steady_state(m.L);
    cmat p = machine_gauge(4) * qubit_permutation(4, {3, 4, 1, 2});
    CHECK(trace_distance(p * rho.matrix * p.adjoint(), rho.matrix) <= 1e-9);
}

TEST_CASE("evolution with a zero generator is constant")
{
    SystemSpec s = default_spec(1);
    s.d_qubit = 0.0;
    s.d_machine = {0.0, 0.0, 0.0};
    Model m = model_with(s, 0.833, 2.72, env_with(equilibrium()));
    std::mt19937_64 g(3);
    DensityMatrix r0{random_density(6, g), m.L.dims};
    auto traj = evolve(m.L, r0, 1.0, 0.1);
    CHECK(traj.size() == 11);
    for (const auto& p : traj)
        CHECK(max_abs(p.rho.matrix - r0.matrix) <= 1e-15);
}

TEST_CASE("excited qubit decays at the emission rate")
{
    SystemSpec s = default_spec(1);
    s.d_machine = {0.0, 0.0, 0.0};
    Model m = model_with(s, 0.833, 2.72, env_with(equilibrium(), 0.0, 0.0));
    const double G = m.rates.local[3].gp;
    REQUIRE(m.rates.local[3].gm == 0.0);
    cmat r0 = cmat::Zero(6, 6);
    r0(1, 1) = 1.0; // machine ground, qubit excited
    const double t_end = 3.0 / G;
    auto traj = evolve(m.L, {r0, m.L.dims}, t_end, 0.01 / G, 50);
    const cmat& rf = traj.back().rho.matrix;
    CHECK(traj.back().t == doctest::Approx(t_end));
    CHECK(rf(1, 1).real() == doctest::Approx(std::exp(-3.0)).epsilon(1e-6));
    for (const auto& p : traj)
        CHECK(std::abs(p.rho.matrix.trace() - cplx(1.0)) <= 1e-8);
    CHECK_THROWS_AS(evolve(m.L, {r0, m.L.dims}, 1.0, 1.0 / G), ParameterError);
}

TEST_CASE("long-time limit of a trajectory is the steady state")
{
    Model m = default_model(1, 10.0, 2.72);
    cmat S = liouvillian_matrix(m.L, false);
    Eigen::ComplexEigenSolver<cmat> es(S, false);
    const double scale = S.cwiseAbs().maxCoeff();
    double gap = 1e300;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        double re = std::abs(es.eigenvalues()(k).real());
        if (re > 1e-10 * scale)
            gap = std::min(gap, re);
    }
    std::mt19937_64 g(9);
    DensityMatrix r0{random_density(6, g), m.L.dims};
    const double dt = 0.05 / max_rate(m.L);
    auto traj = evolve(m.L, r0, 50.0 / gap, dt, 1000000);
    DensityMatrix ss = steady_state(m.L);
    CHECK(trace_distance(traj.back().rho.matrix, ss.matrix) <= 1e-6);
    CHECK(std::abs(traj.back().rho.matrix.trace() - cplx(1.0)) <= 1e-8);
}

TEST_CASE("density matrix validation")
{
    cmat bad = cmat::Identity(2, 2);
    CHECK_THROWS_AS(check_density_matrix({bad, {2}}), StructuralError);
    cmat neg = cmat::Zero(2, 2);
    neg(0, 0) = 1.1;
    neg(1, 1) = -0.1;
    CHECK_THROWS_AS(check_density_matrix({neg, {2}}), StructuralError);
    cmat ok = 0.5 * cmat::Identity(2, 2);
    CHECK_NOTHROW(check_density_matrix({ok, {2}}));
}
