#include "qabsorb/thermodynamics.hpp"

#include <cmath>
#include <limits>

#include "qabsorb/constants.hpp"
#include "qabsorb/correlations.hpp"
#include "qabsorb/errors.hpp"

namespace qabsorb {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double expect(const cmat& rho, const smat& op)
{
    // tr(rho op)
    cplx s = 0.0;
    for (int k = 0; k < op.outerSize(); ++k)
        for (smat::InnerIterator it(op, k); it; ++it)
            s += rho(it.col(), it.row()) * it.value();
    return s.real();
}

cplx expect_c(const cmat& rho, const smat& op)
{
    cplx s = 0.0;
    for (int k = 0; k < op.outerSize(); ++k)
        for (smat::InnerIterator it(op, k); it; ++it)
            s += rho(it.col(), it.row()) * it.value();
    return s;
}

cmat site_lowering(const TransitionSpec& t)
{
    if (t.label == TransitionLabel::qubit) {
        cmat s = cmat::Zero(2, 2);
        s(0, 1) = 1.0;
        return s;
    }
    cmat k = cmat::Zero(3, 3);
    if (t.label == TransitionLabel::machine1)
        k(0, 1) = 1.0;
    else if (t.label == TransitionLabel::machine2)
        k(1, 2) = 1.0;
    else
        k(0, 2) = 1.0;
    return k;
}

// Contribution k_B tr(D(rho) ln sigma) of a dissipator whose kernel is a
// Gibbs state at -beta = mbeta: mbeta * tr(H_free D(rho)).
double gibbs_term(double mbeta, double q)
{
    if (q == 0.0)
        return 0.0;
    return mbeta * q;
}

// Kernel of a nonlocal dissipator alone on its two atoms.
double pair_kernel_term(const Model& m, const Dissipator& d, const DensityMatrix& rho)
{
    const TransitionSpec& ta = m.transitions[d.transitions[0]];
    const TransitionSpec& tb = m.transitions[d.transitions[1]];
    const std::vector<int> sdims = {m.ops.dims[ta.site], m.ops.dims[tb.site]};
    const smat la = embed(site_lowering(ta), sdims, 0);
    const smat lb = embed(site_lowering(tb), sdims, 1);
    Liouvillian lp;
    lp.dims = sdims;
    lp.dim = sdims[0] * sdims[1];
    // free Hamiltonians of the two atoms, reduced to their factors
    auto local_h = [&](int site) {
        std::vector<int> keep = {site};
        cmat h = partial_trace(m.ops.atom_h[site], m.ops.dims, keep);
        return cmat(h / static_cast<double>(m.ops.dim / m.ops.dims[site]));
    };
    lp.h_free = tensor_product(local_h(ta.site), cmat::Identity(sdims[1], sdims[1])) +
                tensor_product(cmat::Identity(sdims[0], sdims[0]), local_h(tb.site));
    lp.h_coupling = cmat::Zero(lp.dim, lp.dim);
    Dissipator dp;
    dp.label = d.label;
    dp.kind = d.kind;
    auto ch = [](cplx r, const smat& aj, const smat& ai) {
        Channel c{r, aj, ai, smat(ai.adjoint()) * aj};
        return c;
    };
    const smat lad = la.adjoint(), lbd = lb.adjoint();
    dp.channels = {ch(d.channels[0].rate, lb, la), ch(d.channels[1].rate, la, lb),
                   ch(d.channels[2].rate, lbd, lad), ch(d.channels[3].rate, lad, lbd)};
    lp.dissipators.push_back(dp);
    SteadyReport rep;
    try {
        rep = steady_state_report(lp);
    } catch (const DegeneracyError& e) {
        throw DegeneracyError("entropy kernel of dissipator " + d.label + ": " + e.what());
    }
    std::vector<int> keep = {ta.site, tb.site};
    cmat rp = partial_trace(rho.matrix, m.ops.dims, keep);
    if (ta.site > tb.site) {
        // partial_trace keeps original order; swap factors back
        cmat sw = cmat::Zero(lp.dim, lp.dim);
        for (int i = 0; i < sdims[0]; ++i)
            for (int j = 0; j < sdims[1]; ++j)
                sw(i * sdims[1] + j, j * sdims[0] + i) = 1.0;
        rp = sw * rp * sw.adjoint();
    }
    const cmat lg = psd_matrix_function(rep.rho.matrix, PsdFn::log, 1e-12);
    return phys::k_B * (apply_dissipator(dp, rp) * lg).trace().real();
}

} // namespace

PopulationTemperature population_temperature(const DensityMatrix& rho, const smat& a,
                                             double omega)
{
    const double pe = expect(rho.matrix, smat(a.adjoint()) * a);
    const double pg = expect(rho.matrix, a * smat(a.adjoint()));
    if (!(pg + pe > 0.0))
        throw ContractError("population_temperature: transition levels are empty");
    PopulationTemperature out;
    if (pe <= 0.0)
        return {0.0, -inf};
    if (pg <= 0.0)
        return {-0.0, inf};
    const double lr = std::log(pg / pe);
    out.mbeta = -phys::k_B * lr / (phys::hbar * omega);
    out.theta = lr == 0.0 ? inf : phys::hbar * omega / (phys::k_B * lr);
    return out;
}

PopulationTemperature population_temperature(const DensityMatrix& rho, const Model& m, int i)
{
    return population_temperature(rho, m.ops.lowering(i), m.transitions[i].omega);
}

double dissipator_heat_flux(const cmat& h, const Dissipator& d, const DensityMatrix& rho)
{
    return (h * apply_dissipator(d, rho.matrix)).trace().real();
}

cplx pair_coherence(const DensityMatrix& rho, const Model& m, int n, int mm)
{
    return expect_c(rho.matrix, smat(m.ops.lowering(n).adjoint()) * m.ops.lowering(mm));
}

double resonant_flux(const DensityMatrix& rho, const Model& m, int from, int to)
{
    const PairRate* p = m.rates.find_pair(from, to);
    if (!p)
        throw ContractError("resonant_flux: " + m.transitions[from].id() + " and " +
                            m.transitions[to].id() + " are not a resonant pair");
    const cplx c = pair_coherence(rho, m, to, from);
    return 2.0 * phys::hbar * m.transitions[to].omega * p->lambda * c.imag();
}

double nonlocal_flux(const DensityMatrix& rho, const Model& m, int n, int mm)
{
    const PairRate* p = m.rates.find_pair(n, mm);
    if (!p)
        throw ContractError("nonlocal_flux: " + m.transitions[n].id() + " and " +
                            m.transitions[mm].id() + " are not a resonant pair");
    // stored rates belong to the ordered pair (a, b)
    const cplx c = pair_coherence(rho, m, p->a, p->b);
    return -phys::hbar * m.transitions[n].omega * (c * (p->gp - std::conj(p->gm))).real();
}

double local_flux(const DensityMatrix& rho, const Model& m, int i)
{
    return dissipator_heat_flux(m.ops.h_free, m.L.dissipators.at(i), rho);
}

std::optional<double> flux_prefactor(const DensityMatrix& rho, const Model& m, int i)
{
    const LocalRate& r = m.rates.local[i];
    if (!(r.gp > 0.0) || !(r.gm > 0.0))
        return std::nullopt;
    const smat& a = m.ops.lowering(i);
    const double pe = expect(rho.matrix, smat(a.adjoint()) * a);
    const double pg = expect(rho.matrix, a * smat(a.adjoint()));
    if (!(pe > 0.0) || !(pg > 0.0))
        return std::nullopt;
    const double pop = pg / pe;
    const double env = r.gp / r.gm;
    const double den = pop - env;
    if (std::abs(den) <= 1e-12 * std::max(pop, env))
        return std::nullopt;
    return local_flux(rho, m, i) / den;
}

double entropy_production(const Model& m, const DensityMatrix& rho, const EntropyOptions& opt)
{
    double total = 0.0;
    for (const auto& d : m.L.dissipators) {
        if (d.kind == DissipatorKind::local) {
            const LocalRate& r = m.rates.local[d.transitions[0]];
            if (r.gp == 0.0 && r.gm == 0.0)
                continue;
            const EnvTemperature et = env_temperature(r.gp, r.gm, d.omega);
            total += gibbs_term(et.mbeta, dissipator_heat_flux(m.ops.h_free, d, rho));
            continue;
        }
        if (opt.local_only)
            continue;
        const PairRate* p = m.rates.find_pair(d.transitions[0], d.transitions[1]);
        const cplx gp = p->gp, gm = p->gm;
        const double sc = std::max(std::abs(gp), std::abs(gm));
        if (sc == 0.0)
            continue;
        const bool real_rates =
            std::abs(gp.imag()) <= 1e-12 * sc && std::abs(gm.imag()) <= 1e-12 * sc;
        if (real_rates && gp.real() != 0.0 && gp.real() * gm.real() >= 0.0) {
            const double ratio = gm.real() == 0.0 ? inf : gp.real() / gm.real();
            const double mbeta =
                ratio == inf ? -inf : -phys::k_B * std::log(ratio) / (phys::hbar * d.omega);
            total += gibbs_term(mbeta, dissipator_heat_flux(m.ops.h_free, d, rho));
            continue;
        }
        total += pair_kernel_term(m, d, rho);
    }
    if (opt.include_state_term) {
        const cmat lr = apply_liouvillian(m.L, rho.matrix, false);
        const cmat lg = psd_matrix_function(rho.matrix, PsdFn::log, 1e-14);
        total -= phys::k_B * (lr * lg).trace().real();
    }
    return total;
}

cmat qubit_thermal_state(int n_q, double omega_q, double mbeta)
{
    const double y = mbeta * phys::hbar * omega_q / phys::k_B;
    // p_e / p_g = exp(y)
    const double pe = y > 0 ? 1.0 / (1.0 + std::exp(-y)) : std::exp(y) / (1.0 + std::exp(y));
    const double pg = 1.0 - pe;
    const int d = 1 << n_q;
    cmat out = cmat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        int k = __builtin_popcount(static_cast<unsigned>(i));
        out(i, i) = std::pow(pe, k) * std::pow(pg, n_q - k);
    }
    return out;
}

CollectiveTemperature collective_temperature_qubits(const cmat& rho_q, int n_q, double omega_q,
                                                    const CollectiveOptions& opt)
{
    if (rho_q.rows() != (1 << n_q))
        throw StructuralError("collective_temperature: qubit state has the wrong dimension");
    if (opt.grid < 3)
        throw ParameterError("collective_temperature: grid needs at least 3 points");
    const double bmax =
        opt.mbeta_max > 0 ? opt.mbeta_max : 10.0 * phys::k_B / (phys::hbar * omega_q);
    auto dist = [&](double b) {
        return trace_distance(rho_q, qubit_thermal_state(n_q, omega_q, b));
    };
    const int n = opt.grid;
    int best = 0;
    double bestv = inf;
    for (int k = 0; k < n; ++k) {
        double b = -bmax + 2.0 * bmax * k / (n - 1);
        double v = dist(b);
        if (v < bestv) {
            bestv = v;
            best = k;
        }
    }
    const double h = 2.0 * bmax / (n - 1);
    double lo = -bmax + h * std::max(best - 1, 0), hi = -bmax + h * std::min(best + 1, n - 1);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = dist(x1), f2 = dist(x2);
    while (hi - lo > opt.rel_tol * bmax) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = dist(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = dist(x2);
        }
    }
    double b = 0.5 * (lo + hi);
    double v = dist(b);
    const double grid_b = -bmax + h * best;
    if (bestv < v) {
        b = grid_b;
        v = bestv;
    }
    CollectiveTemperature out;
    out.mbeta = b;
    out.T = b == 0.0 ? inf : -1.0 / b;
    out.residual = v;
    return out;
}

CollectiveTemperature collective_temperature(const DensityMatrix& rho, const SystemSpec& spec,
                                             const CollectiveOptions& opt)
{
    std::vector<int> keep;
    for (int n = 1; n <= spec.n_q; ++n)
        keep.push_back(n);
    const cmat rq = partial_trace(rho.matrix, rho.dims, keep);
    return collective_temperature_qubits(rq, spec.n_q, spec.omega_q, opt);
}

TemperatureReport temperatures(const DensityMatrix& rho, const Model& m)
{
    TemperatureReport out;
    for (size_t i = 0; i < m.transitions.size(); ++i) {
        const LocalRate& r = m.rates.local[i];
        if (r.gp > 0)
            out.environment.push_back(env_temperature(r.gp, r.gm, m.transitions[i].omega));
        else
            out.environment.push_back({std::numeric_limits<double>::quiet_NaN(),
                                       std::numeric_limits<double>::quiet_NaN()});
        out.population.push_back(population_temperature(rho, m, static_cast<int>(i)));
    }
    return out;
}

FluxReport fluxes(const DensityMatrix& rho, const Model& m, bool with_entropy,
                  const EntropyOptions& eopt)
{
    FluxReport out;
    const cmat h = m.L.hamiltonian();
    for (const auto& d : m.L.dissipators) {
        out.dissipator_labels.push_back(d.label);
        double q = dissipator_heat_flux(h, d, rho);
        out.dissipator_flux.push_back(q);
        out.dU_dt += q;
    }
    for (size_t i = 0; i < m.transitions.size(); ++i) {
        out.local.push_back(local_flux(rho, m, static_cast<int>(i)));
        out.prefactor.push_back(flux_prefactor(rho, m, static_cast<int>(i)));
    }
    for (const auto& p : m.rates.pairs)
        out.pairs.push_back({p.a, p.b, resonant_flux(rho, m, p.b, p.a),
                             nonlocal_flux(rho, m, p.a, p.b)});
    if (with_entropy)
        out.entropy = entropy_production(m, rho, eopt);
    return out;
}

} // namespace qabsorb
