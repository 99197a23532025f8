#include "qabsorb/model.hpp"

#include <cmath>

#include "qabsorb/constants.hpp"
#include "qabsorb/errors.hpp"

namespace qabsorb {

void SystemSpec::validate() const
{
    if (n_q < 1)
        throw ParameterError("n_q must be >= 1");
    if (!(omega_q > 0 && omega_1 > 0 && omega_2 > 0 && omega_3 > 0))
        throw ParameterError("transition frequencies must be positive");
    if (!resonant(omega_2, omega_q))
        throw ParameterError("omega_2 must equal omega_q");
    if (std::abs(omega_3 - omega_1 - omega_2) > 1e-12 * omega_3)
        throw ParameterError("omega_3 must equal omega_1 + omega_2");
    if (d_qubit < 0 || d_machine[0] < 0 || d_machine[1] < 0 || d_machine[2] < 0)
        throw ParameterError("dipole magnitudes must be >= 0");
}

SystemSpec SystemSpec::from_frequencies(int n_q, double omega_q, double omega_3)
{
    SystemSpec s;
    s.n_q = n_q;
    s.omega_q = omega_q;
    s.omega_2 = omega_q;
    s.omega_3 = omega_3;
    s.omega_1 = omega_3 - omega_q;
    return s;
}

std::vector<TransitionSpec> build_transitions(const SystemSpec& spec, const Layout& layout)
{
    spec.validate();
    if (layout.n_qubits() != spec.n_q)
        throw StructuralError("layout qubit count differs from n_q");
    std::vector<TransitionSpec> ts;
    const vec3 md = layout.sites[0].dipole_direction;
    const TransitionLabel ml[3] = {TransitionLabel::machine1, TransitionLabel::machine2,
                                   TransitionLabel::machine3};
    const double mw[3] = {spec.omega_1, spec.omega_2, spec.omega_3};
    for (int t = 0; t < 3; ++t) {
        TransitionSpec s;
        s.site = 0;
        s.label = ml[t];
        s.omega = mw[t];
        s.dipole = spec.d_machine[t] * md;
        ts.push_back(s);
    }
    for (int k = 1; k <= spec.n_q; ++k) {
        TransitionSpec s;
        s.site = k;
        s.label = TransitionLabel::qubit;
        s.qubit_index = k;
        s.omega = spec.omega_q;
        s.dipole = spec.d_qubit * layout.sites[k].dipole_direction;
        ts.push_back(s);
    }
    return ts;
}

OperatorSet build_operators(const SystemSpec& spec)
{
    if (spec.n_q < 1)
        throw ParameterError("n_q must be >= 1");
    OperatorSet ops;
    ops.dims.push_back(3);
    for (int i = 0; i < spec.n_q; ++i)
        ops.dims.push_back(2);
    ops.dim = 3 << spec.n_q;

    cmat k1 = cmat::Zero(3, 3), k2 = cmat::Zero(3, 3), k3 = cmat::Zero(3, 3);
    k1(0, 1) = 1.0;
    k2(1, 2) = 1.0;
    k3(0, 2) = 1.0;
    ops.kappa = {embed(k1, ops.dims, 0), embed(k2, ops.dims, 0), embed(k3, ops.dims, 0)};
    cmat sg = cmat::Zero(2, 2);
    sg(0, 1) = 1.0;
    for (int n = 1; n <= spec.n_q; ++n)
        ops.sigma.push_back(embed(sg, ops.dims, n));

    cmat hm = cmat::Zero(3, 3);
    hm(1, 1) = phys::hbar * spec.omega_1;
    hm(2, 2) = phys::hbar * spec.omega_3;
    ops.atom_h.push_back(cmat(embed(hm, ops.dims, 0)));
    cmat hq = cmat::Zero(2, 2);
    hq(1, 1) = phys::hbar * spec.omega_q;
    for (int n = 1; n <= spec.n_q; ++n)
        ops.atom_h.push_back(cmat(embed(hq, ops.dims, n)));
    ops.h_free = cmat::Zero(ops.dim, ops.dim);
    for (const auto& h : ops.atom_h)
        ops.h_free += h;
    return ops;
}

namespace {

bool needs_pair(const std::vector<TransitionSpec>& ts, int i, int j)
{
    return ts[i].site != ts[j].site && resonant(ts[i].omega, ts[j].omega);
}

void check_rates_complete(const RateSet& rates, const std::vector<TransitionSpec>& ts)
{
    if (rates.local.size() != ts.size())
        throw DataError("rate set does not cover every transition");
    for (int i = 0; i < static_cast<int>(ts.size()); ++i)
        for (int j = i + 1; j < static_cast<int>(ts.size()); ++j)
            if (needs_pair(ts, i, j) && rates.find_pair(i, j) == nullptr)
                throw DataError("missing pair rates for " + pair_id(ts[i], ts[j]));
}

Channel make_channel(cplx rate, const smat& aj, const smat& ai)
{
    Channel c{rate, aj, ai, smat(ai.adjoint()) * aj};
    c.aidag_aj.makeCompressed();
    return c;
}

} // namespace

cmat build_hamiltonian(const SystemSpec& spec, const OperatorSet& ops, const RateSet& rates,
                       const std::vector<TransitionSpec>& ts)
{
    (void)spec;
    check_rates_complete(rates, ts);
    cmat h = ops.h_free;
    for (const auto& p : rates.pairs) {
        const smat& a = ops.lowering(p.a);
        const smat& b = ops.lowering(p.b);
        smat x = smat(a.adjoint()) * b;
        h += phys::hbar * p.lambda * (cmat(x) + cmat(x.adjoint()));
    }
    return h;
}

double kossakowski_margin(const RateSet& rates, const std::vector<TransitionSpec>& ts)
{
    const int n = static_cast<int>(ts.size());
    std::vector<int> block(n, -1);
    int nb = 0;
    for (int i = 0; i < n; ++i) {
        if (block[i] >= 0)
            continue;
        block[i] = nb;
        for (int j = i + 1; j < n; ++j)
            if (block[j] < 0 && resonant(ts[i].omega, ts[j].omega))
                block[j] = nb;
        ++nb;
    }
    double margin = 0.0;
    for (int b = 0; b < nb; ++b) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (block[i] == b)
                members.push_back(i);
        const int m = static_cast<int>(members.size());
        cmat gp = cmat::Zero(m, m), gm = cmat::Zero(m, m);
        for (int x = 0; x < m; ++x) {
            gp(x, x) = rates.local[members[x]].gp;
            gm(x, x) = rates.local[members[x]].gm;
            for (int y = x + 1; y < m; ++y) {
                const PairRate* p = rates.find_pair(members[x], members[y]);
                if (!p)
                    continue;
                gp(x, y) = p->gp;
                gp(y, x) = std::conj(p->gp);
                gm(x, y) = p->gm;
                gm(y, x) = std::conj(p->gm);
            }
        }
        for (const cmat* g : {&gp, &gm}) {
            double scale = max_abs(*g);
            if (scale == 0.0)
                continue;
            Eigen::SelfAdjointEigenSolver<cmat> es(*g, Eigen::EigenvaluesOnly);
            margin = std::min(margin, es.eigenvalues()(0) / scale);
        }
    }
    return margin;
}

Liouvillian build_dissipators(const SystemSpec& spec, const OperatorSet& ops,
                              const RateSet& rates, const std::vector<TransitionSpec>& ts)
{
    check_rates_complete(rates, ts);
    const double margin = kossakowski_margin(rates, ts);
    if (margin < -1e-12)
        throw PositivityError("rate matrix is not positive semidefinite (relative eigenvalue " +
                              std::to_string(margin) + ")");
    Liouvillian L;
    L.dim = ops.dim;
    L.dims = ops.dims;
    L.h_free = ops.h_free;
    L.h_coupling = build_hamiltonian(spec, ops, rates, ts) - ops.h_free;

    for (int i = 0; i < static_cast<int>(ts.size()); ++i) {
        const smat& a = ops.lowering(i);
        smat ad = a.adjoint();
        Dissipator d;
        d.kind = DissipatorKind::local;
        d.label = i < 3 ? "M:" + std::to_string(i + 1) : "B:" + ts[i].id();
        d.transitions = {i};
        d.omega = ts[i].omega;
        d.channels.push_back(make_channel(rates.local[i].gp, a, a));
        d.channels.push_back(make_channel(rates.local[i].gm, ad, ad));
        L.dissipators.push_back(std::move(d));
    }
    for (const auto& p : rates.pairs) {
        if (p.gp == cplx(0.0) && p.gm == cplx(0.0))
            continue;
        const smat& a = ops.lowering(p.a);
        const smat& b = ops.lowering(p.b);
        smat ad = a.adjoint(), bd = b.adjoint();
        Dissipator d;
        d.kind = DissipatorKind::nonlocal;
        d.label = "nl:" + pair_id(ts[p.a], ts[p.b]);
        d.transitions = {p.a, p.b};
        d.omega = ts[p.a].omega;
        d.channels.push_back(make_channel(p.gp, b, a));
        d.channels.push_back(make_channel(std::conj(p.gp), a, b));
        d.channels.push_back(make_channel(p.gm, bd, ad));
        d.channels.push_back(make_channel(std::conj(p.gm), ad, bd));
        L.dissipators.push_back(std::move(d));
    }
    return L;
}

Model build_model(const SystemSpec& spec, const Layout& layout, const EnvConfig& env)
{
    Model m;
    m.spec = spec;
    m.layout = layout;
    m.transitions = build_transitions(spec, layout);
    m.rates = compute_rates(m.transitions, env, layout);
    m.ops = build_operators(spec);
    m.L = build_dissipators(spec, m.ops, m.rates, m.transitions);
    return m;
}

cmat apply_dissipator(const Dissipator& d, const cmat& rho)
{
    cmat out = cmat::Zero(rho.rows(), rho.cols());
    for (const auto& c : d.channels) {
        if (c.rate == cplx(0.0))
            continue;
        cmat jr = c.a_j * rho;
        cmat term = jr * smat(c.a_i.adjoint());
        cmat ar = c.aidag_aj * rho;
        cmat ra = rho * c.aidag_aj;
        out += c.rate * (term - 0.5 * (ar + ra));
    }
    return out;
}

cmat apply_liouvillian(const Liouvillian& L, const cmat& rho, bool include_free)
{
    const cmat h = include_free ? L.hamiltonian() : L.h_coupling;
    cmat out = cplx(0.0, -1.0 / phys::hbar) * (h * rho - rho * h);
    for (const auto& d : L.dissipators)
        out += apply_dissipator(d, rho);
    return out;
}

cmat liouvillian_matrix(const Liouvillian& L, bool include_free)
{
    const int d = L.dim;
    smat id(d, d);
    id.setIdentity();
    const cmat hd = include_free ? L.hamiltonian() : L.h_coupling;
    const smat h = to_sparse(hd);
    smat acc = cplx(0.0, -1.0 / phys::hbar) *
               (tensor_product(id, h) - tensor_product(smat(h.transpose()), id));
    for (const auto& ds : L.dissipators)
        for (const auto& c : ds.channels) {
            if (c.rate == cplx(0.0))
                continue;
            smat aic = c.a_i.conjugate();
            smat t = tensor_product(aic, c.a_j) - 0.5 * tensor_product(id, c.aidag_aj) -
                     0.5 * tensor_product(smat(c.aidag_aj.transpose()), id);
            acc += c.rate * t;
        }
    return cmat(acc);
}

} // namespace qabsorb
