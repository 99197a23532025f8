#include "qabsorb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "qabsorb/constants.hpp"
#include "qabsorb/errors.hpp"

namespace qabsorb {

void check_density_matrix(const DensityMatrix& rho)
{
    const cmat& m = rho.matrix;
    if (m.rows() != m.cols())
        throw StructuralError("density matrix is not square");
    if (max_abs(m - m.adjoint()) > 1e-10)
        throw StructuralError("density matrix is not Hermitian");
    if (std::abs(m.trace() - cplx(1.0)) > 1e-10)
        throw StructuralError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<cmat> es(hermitize(m), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-9)
        throw StructuralError("density matrix has a negative eigenvalue");
}

namespace {

struct Term {
    cplx coef;
    const smat* left;
    const smat* right;
};

// Hermitian coordinates of the degenerate block.
struct Sector {
    int d = 0;
    std::vector<int> index;                 // a*d+b -> position in pairs, or -1
    std::vector<std::pair<int, int>> pairs; // (a, b) with equal free energy
    std::vector<int> coord_of;              // pair -> first real coordinate (a <= b), -1 otherwise
    std::vector<std::pair<int, int>> coords_pair;
    int n_coords = 0;
    double min_gap = 0.0; // rad/s
};

Sector make_sector(const cmat& h_free)
{
    Sector s;
    const int d = static_cast<int>(h_free.rows());
    s.d = d;
    std::vector<double> e(d);
    double emax = 0.0;
    for (int a = 0; a < d; ++a) {
        e[a] = h_free(a, a).real() / phys::hbar;
        emax = std::max(emax, std::abs(e[a]));
    }
    const double tol = 1e-9 * std::max(emax, 1.0);
    std::vector<int> order(d);
    for (int a = 0; a < d; ++a)
        order[a] = a;
    std::sort(order.begin(), order.end(), [&](int x, int y) { return e[x] < e[y]; });
    std::vector<int> cls(d);
    std::vector<double> level;
    for (int k = 0; k < d; ++k) {
        int a = order[k];
        if (level.empty() || e[a] - level.back() > tol)
            level.push_back(e[a]);
        cls[a] = static_cast<int>(level.size()) - 1;
    }
    s.min_gap = std::numeric_limits<double>::infinity();
    for (size_t k = 1; k < level.size(); ++k)
        s.min_gap = std::min(s.min_gap, level[k] - level[k - 1]);

    s.index.assign(static_cast<size_t>(d) * d, -1);
    for (int b = 0; b < d; ++b)
        for (int a = 0; a < d; ++a)
            if (cls[a] == cls[b]) {
                s.index[static_cast<size_t>(a) * d + b] = static_cast<int>(s.pairs.size());
                s.pairs.emplace_back(a, b);
            }
    s.coord_of.assign(s.pairs.size(), -1);
    for (size_t k = 0; k < s.pairs.size(); ++k) {
        auto [a, b] = s.pairs[k];
        if (a == b) {
            s.coord_of[k] = s.n_coords++;
            s.coords_pair.emplace_back(a, b);
        } else if (a < b) {
            s.coord_of[k] = s.n_coords;
            s.n_coords += 2;
            s.coords_pair.emplace_back(a, b);
            s.coords_pair.emplace_back(a, b);
        }
    }
    return s;
}

// Real matrix of L' in the Hermitian coordinates of the sector.
Eigen::SparseMatrix<double> sector_matrix(const Liouvillian& L, const Sector& s)
{
    const int d = s.d;
    smat id(d, d);
    id.setIdentity();
    const smat hc = to_sparse(L.h_coupling);
    std::vector<smat> keep; // adjoints of a_i
    for (const auto& ds : L.dissipators)
        for (const auto& c : ds.channels)
            keep.push_back(c.a_i.adjoint());

    std::vector<Term> terms;
    const cplx mi(0.0, -1.0 / phys::hbar);
    terms.push_back({mi, &hc, &id});
    terms.push_back({-mi, &id, &hc});
    size_t q = 0;
    for (const auto& ds : L.dissipators)
        for (const auto& c : ds.channels) {
            const smat& aid = keep[q++];
            if (c.rate == cplx(0.0))
                continue;
            terms.push_back({c.rate, &c.a_j, &aid});
            terms.push_back({-0.5 * c.rate, &c.aidag_aj, &id});
            terms.push_back({-0.5 * c.rate, &id, &c.aidag_aj});
        }

    std::vector<Eigen::Triplet<double>> trip;
    const cplx I(0.0, 1.0);
    // complex entry M[(c,e),(a,b)] spread onto the real coordinates
    auto emit = [&](int row, int col, cplx v) {
        auto [c, e] = s.pairs[row];
        if (c > e)
            return;
        auto [a, b] = s.pairs[col];
        int j;
        cplx f_im = 0.0;
        if (a == b) {
            j = s.coord_of[col];
        } else if (a < b) {
            j = s.coord_of[col];
            f_im = I;
        } else {
            j = s.coord_of[s.index[static_cast<size_t>(b) * d + a]];
            f_im = -I;
        }
        const int i = s.coord_of[row];
        trip.emplace_back(i, j, v.real());
        if (a != b)
            trip.emplace_back(i, j + 1, (v * f_im).real());
        if (c != e) {
            trip.emplace_back(i + 1, j, v.imag());
            if (a != b)
                trip.emplace_back(i + 1, j + 1, (v * f_im).imag());
        }
    };
    for (const auto& t : terms) {
        for (int ka = 0; ka < t.left->outerSize(); ++ka)
            for (smat::InnerIterator il(*t.left, ka); il; ++il) {
                const int c = static_cast<int>(il.row()), a = static_cast<int>(il.col());
                for (int kb = 0; kb < t.right->outerSize(); ++kb)
                    for (smat::InnerIterator ir(*t.right, kb); ir; ++ir) {
                        const int b = static_cast<int>(ir.row()), e = static_cast<int>(ir.col());
                        const int col = s.index[static_cast<size_t>(a) * d + b];
                        if (col < 0)
                            continue;
                        const int row = s.index[static_cast<size_t>(c) * d + e];
                        if (row < 0)
                            continue;
                        emit(row, col, t.coef * il.value() * ir.value());
                    }
            }
    }
    Eigen::SparseMatrix<double> R(s.n_coords, s.n_coords);
    R.setFromTriplets(trip.begin(), trip.end());
    return R;
}

cmat from_coords(const Sector& s, const rvec& x)
{
    cmat rho = cmat::Zero(s.d, s.d);
    for (int k = 0; k < s.n_coords; ++k) {
        auto [a, b] = s.coords_pair[k];
        if (a == b) {
            rho(a, a) = x(k);
        } else {
            rho(a, b) = cplx(x(k), x(k + 1));
            rho(b, a) = cplx(x(k), -x(k + 1));
            ++k;
        }
    }
    return rho;
}

double power_norm2(const Eigen::SparseMatrix<double>& R)
{
    // largest singular value by a few power iterations on R^T R
    rvec v = rvec::Ones(R.cols()).normalized();
    double nrm = 0.0;
    for (int it = 0; it < 60; ++it) {
        rvec w = R.transpose() * (R * v);
        double n2 = w.norm();
        if (n2 == 0.0)
            return 0.0;
        v = w / n2;
        if (std::abs(std::sqrt(n2) - nrm) <= 1e-6 * nrm)
            return std::sqrt(n2);
        nrm = std::sqrt(n2);
    }
    return nrm;
}

// Solve R x = 0 with the first equation replaced by the trace condition.
// Returns an empty vector when the factorization is singular.
rvec trace_constrained_solve(const Eigen::SparseMatrix<double>& R, const Sector& s, double norm_l)
{
    Eigen::SparseMatrix<double> A = R;
    A.prune([](Eigen::Index r, Eigen::Index, double) { return r != 0; });
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < s.n_coords; ++k)
        if (s.coords_pair[k].first == s.coords_pair[k].second)
            trip.emplace_back(0, k, 1.0);
    Eigen::SparseMatrix<double> T(s.n_coords, s.n_coords);
    T.setFromTriplets(trip.begin(), trip.end());
    A = A + norm_l * T;
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        return {};
    rvec rhs = rvec::Zero(s.n_coords);
    rhs(0) = norm_l;
    rvec x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
        return {};
    return x;
}

} // namespace

SteadyReport steady_state_report(const Liouvillian& L, const SteadyOptions& opt)
{
    const Sector s = make_sector(L.h_free);
    const Eigen::SparseMatrix<double> R = sector_matrix(L, s);
    SteadyReport rep;
    rep.sector_size = s.n_coords;

    SteadyMethod method = opt.method;
    if (method == SteadyMethod::automatic)
        method = s.n_coords <= opt.max_dense_sector ? SteadyMethod::sector_svd
                                                    : SteadyMethod::sector_lu;
    rvec x;
    double norm_l = 0.0;
    if (method == SteadyMethod::sector_svd) {
        Eigen::MatrixXd Rd(R);
        // singular values only; the vector comes from the constrained solve
        const rvec sv = Eigen::BDCSVD<Eigen::MatrixXd>(Rd).singularValues();
        const int n = static_cast<int>(sv.size());
        norm_l = sv(0);
        if (norm_l == 0.0)
            throw DegeneracyError("steady_state: generator vanishes, every state is stationary "
                                  "(null dimension " + std::to_string(n) + ")");
        int null_dim = 0;
        for (int k = 0; k < n; ++k)
            if (sv(k) <= opt.null_tol * norm_l)
                ++null_dim;
        rep.sv_ratio_null = sv(n - 1) / norm_l;
        rep.sv_ratio_next = n > 1 ? sv(n - 2) / norm_l : 1.0;
        if (null_dim > 1)
            throw DegeneracyError("steady_state: stationary manifold has dimension " +
                                  std::to_string(null_dim));
        rep.null_dimension = 1;
        // the singular vector is only normwise accurate; slow modes leave
        // ~eps/sv_ratio_next errors that the constrained LU solve does not
        x = trace_constrained_solve(R, s, norm_l);
        if (x.size() == 0)
            x = Eigen::BDCSVD<Eigen::MatrixXd>(Rd, Eigen::ComputeFullV).matrixV().col(n - 1);
    } else {
        norm_l = power_norm2(R);
        x = trace_constrained_solve(R, s, norm_l);
        if (x.size() == 0)
            throw DegeneracyError("steady_state: sparse factorization failed, stationary "
                                  "manifold is not unique");
    }
    cmat rho = from_coords(s, x);
    const cplx tr = rho.trace();
    if (std::abs(tr) <= 1e-12 * x.norm())
        throw StructuralError("steady_state: null vector has no trace-1 representative");
    rho /= tr;
    rho = hermitize(rho);
    Eigen::SelfAdjointEigenSolver<cmat> es(rho);
    rvec w = es.eigenvalues();
    rep.min_eig_raw = w(0);
    for (Eigen::Index k = 0; k < w.size(); ++k)
        w(k) = std::max(w(k), 0.0);
    rho = es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    rho /= rho.trace().real();
    rho = hermitize(rho);
    // the spectral clip mixes in rounding noise outside the block
    for (int b = 0; b < s.d; ++b)
        for (int a = 0; a < s.d; ++a)
            if (s.index[static_cast<size_t>(a) * s.d + b] < 0)
                rho(a, b) = 0.0;

    const cmat res = apply_liouvillian(L, rho, false);
    rep.residual = norm_l > 0 ? res.norm() / (norm_l * rho.norm()) : 0.0;
    rep.separation = norm_l > 0 ? s.min_gap / norm_l : std::numeric_limits<double>::infinity();
    if (rep.separation < 10.0)
        throw StructuralError("steady_state: dissipative scale is not small against the free "
                              "level spacing; block solution is not valid");
    rep.rho = {rho, L.dims};
    return rep;
}

DensityMatrix steady_state(const Liouvillian& L)
{
    return steady_state_report(L).rho;
}

double max_rate(const Liouvillian& L)
{
    double m = 0.0;
    for (const auto& d : L.dissipators) {
        double s = 0.0;
        for (const auto& c : d.channels)
            s += std::abs(c.rate);
        m = std::max(m, s);
    }
    Eigen::SelfAdjointEigenSolver<cmat> es(L.h_coupling, Eigen::EigenvaluesOnly);
    if (L.h_coupling.size() > 0) {
        double hn = std::max(std::abs(es.eigenvalues()(0)),
                             std::abs(es.eigenvalues()(es.eigenvalues().size() - 1)));
        m = std::max(m, 2.0 * hn / phys::hbar);
    }
    return m;
}

std::vector<TrajectoryPoint> evolve(const Liouvillian& L, const DensityMatrix& rho0,
                                    double duration, double dt, int stride)
{
    if (!(dt > 0.0) || duration < 0.0)
        throw ParameterError("evolve: need dt > 0 and duration >= 0");
    if (stride < 1)
        throw ParameterError("evolve: stride must be >= 1");
    const double mr = max_rate(L);
    if (mr > 0.0 && dt > 0.1 / mr)
        throw ParameterError("evolve: dt exceeds 0.1 / max rate");
    const long steps = static_cast<long>(std::ceil(duration / dt - 1e-9));
    std::vector<TrajectoryPoint> out;
    cmat rho = rho0.matrix;
    out.push_back({0.0, rho0});
    auto f = [&](const cmat& r) { return apply_liouvillian(L, r, false); };
    double t = 0.0;
    for (long n = 1; n <= steps; ++n) {
        const double h = std::min(dt, duration - t);
        cmat k1 = f(rho);
        cmat k2 = f(rho + 0.5 * h * k1);
        cmat k3 = f(rho + 0.5 * h * k2);
        cmat k4 = f(rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = hermitize(rho);
        t += h;
        if (n % stride == 0 || n == steps)
            out.push_back({t, {rho, rho0.dims}});
    }
    return out;
}

} // namespace qabsorb
