#include "qabsorb/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qabsorb/errors.hpp"

namespace qabsorb {

namespace {

std::vector<int> join(const std::vector<int>& a, const std::vector<int>& b)
{
    std::vector<int> out = a;
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    return out;
}

int group_dim(const Partition& p, const std::vector<int>& g)
{
    int d = 1;
    for (int k : g)
        d *= p.dims.at(k);
    return d;
}

void check_groups(const Partition& p, size_t n)
{
    if (p.groups.size() != n)
        throw ContractError("partition must have " + std::to_string(n) + " groups");
    std::vector<int> seen(p.dims.size(), 0);
    for (const auto& g : p.groups) {
        if (g.empty())
            throw ContractError("partition group is empty");
        for (int k : g) {
            if (k < 0 || k >= static_cast<int>(p.dims.size()))
                throw ContractError("partition index out of range");
            if (seen[k]++)
                throw ContractError("partition groups overlap");
        }
    }
}

double s_of(const cmat& rho, const std::vector<int>& dims, const std::vector<int>& keep)
{
    return entropy(partial_trace(rho, dims, keep));
}

const cmat& pauli(int k)
{
    static const cmat sx = (cmat(2, 2) << 0, 1, 1, 0).finished();
    static const cmat sy = (cmat(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished();
    static const cmat sz = (cmat(2, 2) << 1, 0, 0, -1).finished();
    return k == 0 ? sx : (k == 1 ? sy : sz);
}

} // namespace

double entropy(const cmat& rho)
{
    Eigen::SelfAdjointEigenSolver<cmat> es(hermitize(rho), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double l = es.eigenvalues()(i);
        if (l > 1e-300)
            s -= l * std::log(l);
    }
    return s;
}

double mutual_information(const cmat& rho, const Partition& p)
{
    check_groups(p, 2);
    const auto& a = p.groups[0];
    const auto& b = p.groups[1];
    return s_of(rho, p.dims, a) + s_of(rho, p.dims, b) - s_of(rho, p.dims, join(a, b));
}

double rescaled_mutual_information(const cmat& rho, const Partition& p)
{
    check_groups(p, 2);
    const int dmin = std::min(group_dim(p, p.groups[0]), group_dim(p, p.groups[1]));
    return mutual_information(rho, p) / (2.0 * std::log(static_cast<double>(dmin)));
}

double tripartite_correlations(const cmat& rho, const Partition& p)
{
    check_groups(p, 3);
    const auto& a = p.groups[0];
    const auto& b = p.groups[1];
    const auto& c = p.groups[2];
    const double sa = s_of(rho, p.dims, a), sb = s_of(rho, p.dims, b), sc = s_of(rho, p.dims, c);
    const double sab = s_of(rho, p.dims, join(a, b));
    const double sac = s_of(rho, p.dims, join(a, c));
    const double sbc = s_of(rho, p.dims, join(b, c));
    const double sabc = s_of(rho, p.dims, join(join(a, b), c));
    const double mi3 = sa + sb + sc - sabc;
    const double mu = std::max({sa + sb - sab, sa + sc - sac, sb + sc - sbc});
    return mi3 - mu;
}

double max_cq_fidelity(const cmat& rho, int d_b)
{
    const int d = 2 * d_b;
    if (rho.rows() != d)
        throw StructuralError("max_cq_fidelity: state size does not match 2 x d_b");
    const cmat sr = psd_matrix_function(rho, PsdFn::sqrt, 1e-9);
    const cmat id = cmat::Identity(d_b, d_b);
    cmat lam[3];
    for (int k = 0; k < 3; ++k)
        lam[k] = hermitize(sr * tensor_product(pauli(k), id) * sr);

    // |sum_k u_k Lambda_k|_1 is convex in u; maximized on the sphere by
    // alternating u <- tr(Lambda_k S(u)), S = sign of the combination.
    auto trace_norm = [&](const Eigen::Vector3d& u, cmat* sign) {
        cmat k = u(0) * lam[0] + u(1) * lam[1] + u(2) * lam[2];
        Eigen::SelfAdjointEigenSolver<cmat> es(k);
        const rvec& w = es.eigenvalues();
        if (sign) {
            rvec s(w.size());
            for (Eigen::Index i = 0; i < w.size(); ++i)
                s(i) = w(i) >= 0 ? 1.0 : -1.0;
            *sign = es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
        }
        return w.cwiseAbs().sum();
    };
    auto climb = [&](Eigen::Vector3d u) {
        cmat sg;
        double v = trace_norm(u, &sg);
        for (int it = 0; it < 500; ++it) {
            Eigen::Vector3d g;
            for (int k = 0; k < 3; ++k)
                g(k) = (lam[k] * sg).trace().real();
            if (g.norm() == 0.0)
                break;
            const Eigen::Vector3d un = g.normalized();
            cmat sn;
            const double vn = trace_norm(un, &sn);
            if (vn <= v)
                break;
            const bool small = vn - v <= 1e-14 * std::max(1.0, v);
            u = un;
            v = vn;
            sg = sn;
            if (small)
                break;
        }
        return std::pair{v, u};
    };
    // the ascent slows down near flat maxima; finish with a compass search in
    // the tangent plane
    auto polish = [&](Eigen::Vector3d u, double v) {
        double step = 1e-3;
        while (step > 1e-10) {
            Eigen::Vector3d t1 = u.unitOrthogonal(), t2 = u.cross(t1);
            bool moved = false;
            for (const Eigen::Vector3d& dir : {t1, Eigen::Vector3d(-t1), t2, Eigen::Vector3d(-t2)}) {
                Eigen::Vector3d w = (u + step * dir).normalized();
                double vw = trace_norm(w, nullptr);
                if (vw > v) {
                    u = w;
                    v = vw;
                    moved = true;
                    break;
                }
            }
            if (!moved)
                step *= 0.5;
        }
        return v;
    };

    std::vector<Eigen::Vector3d> seeds;
    Eigen::Matrix3d gram;
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
            gram(k, l) = (lam[k] * lam[l]).trace().real();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ge(gram);
    for (int k = 0; k < 3; ++k) {
        seeds.push_back(ge.eigenvectors().col(k));
        seeds.push_back(-ge.eigenvectors().col(k));
    }
    for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(k) = 1.0;
        seeds.push_back(e);
    }
    // Fibonacci sphere
    const int nf = 48;
    for (int i = 0; i < nf; ++i) {
        double zc = 1.0 - (2.0 * i + 1.0) / nf;
        double rr = std::sqrt(std::max(0.0, 1.0 - zc * zc));
        double ph = i * 2.399963229728653;
        seeds.emplace_back(rr * std::cos(ph), rr * std::sin(ph), zc);
    }
    // ascend from the most promising starting points only
    std::vector<std::pair<double, int>> start;
    for (size_t i = 0; i < seeds.size(); ++i)
        start.emplace_back(-trace_norm(seeds[i], nullptr), static_cast<int>(i));
    std::sort(start.begin(), start.end());
    double best = -1.0;
    Eigen::Vector3d best_u;
    for (size_t i = 0; i < std::min<size_t>(8, start.size()); ++i) {
        auto [v, u] = climb(seeds[start[i].second]);
        if (v > best) {
            best = v;
            best_u = u;
        }
    }
    best = polish(best_u, best);
    return 0.5 * (1.0 + best);
}

double bures_geometric_discord(const cmat& rho, const Partition& p)
{
    check_groups(p, 2);
    const auto& a = p.groups[0];
    if (a.size() != 1 || p.dims.at(a[0]) != 2)
        throw ContractError("discord: measured group must be a single two-level subsystem");
    const std::vector<int> keep = join(a, p.groups[1]);
    cmat r = partial_trace(rho, p.dims, keep);
    std::vector<int> rd;
    for (int k : keep)
        rd.push_back(p.dims[k]);
    const int pos = static_cast<int>(std::find(keep.begin(), keep.end(), a[0]) - keep.begin());
    const int d = static_cast<int>(r.rows());
    const int db = d / 2;
    if (pos != 0) {
        // move the measured factor to the front
        std::vector<long> stride(rd.size(), 1);
        for (int i = static_cast<int>(rd.size()) - 2; i >= 0; --i)
            stride[i] = stride[i + 1] * rd[i + 1];
        std::vector<int> perm(d);
        for (int idx = 0; idx < d; ++idx) {
            int digit = static_cast<int>((idx / stride[pos]) % 2);
            int rest = 0, rem = idx;
            std::vector<int> digits(rd.size());
            for (int i = static_cast<int>(rd.size()) - 1; i >= 0; --i) {
                digits[i] = rem % rd[i];
                rem /= rd[i];
            }
            for (int i = 0; i < static_cast<int>(rd.size()); ++i)
                if (i != pos)
                    rest = rest * rd[i] + digits[i];
            perm[idx] = digit * db + rest;
        }
        cmat q(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                q(perm[i], perm[j]) = r(i, j);
        r = q;
    }
    const double f = std::min(1.0, max_cq_fidelity(r, db));
    const double dg = (1.0 - std::sqrt(f)) / (1.0 - 1.0 / std::sqrt(2.0));
    return std::clamp(dg, 0.0, 1.0);
}

double trace_distance(const cmat& rho, const cmat& sigma)
{
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
        throw StructuralError("trace_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<cmat> es(hermitize(rho - sigma), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

BestPartition maximize_over_partitions(const cmat& rho, const std::vector<int>& dims,
                                       Quantifier q, const PartitionConstraints& c)
{
    std::vector<int> cand = c.subsystems;
    if (cand.empty()) {
        cand.resize(dims.size());
        std::iota(cand.begin(), cand.end(), 0);
    }
    std::sort(cand.begin(), cand.end());
    const int n = static_cast<int>(cand.size());
    const int ng = q == Quantifier::tau ? 3 : 2;

    std::vector<std::vector<std::vector<int>>> parts;
    long total = 1;
    for (int i = 0; i < n; ++i)
        total *= (ng + 1);
    for (long code = 0; code < total; ++code) {
        std::vector<std::vector<int>> g(ng);
        long x = code;
        for (int i = 0; i < n; ++i) {
            int lab = static_cast<int>(x % (ng + 1));
            x /= (ng + 1);
            if (lab > 0)
                g[lab - 1].push_back(cand[i]);
        }
        bool ok = std::all_of(g.begin(), g.end(), [](const auto& v) { return !v.empty(); });
        if (!ok)
            continue;
        if (q == Quantifier::discord) {
            if (g[0].size() != 1 || dims[g[0][0]] != 2)
                continue;
        } else {
            // unordered groups: keep the ordering by smallest member
            bool sorted = true;
            for (int k = 1; k < ng; ++k)
                if (g[k - 1].front() > g[k].front())
                    sorted = false;
            if (!sorted)
                continue;
        }
        parts.push_back(g);
    }
    std::sort(parts.begin(), parts.end());

    BestPartition best;
    bool first = true;
    for (const auto& g : parts) {
        Partition p{dims, g};
        double v = 0.0;
        switch (q) {
        case Quantifier::mi:
            v = mutual_information(rho, p);
            break;
        case Quantifier::mi_rescaled:
            v = rescaled_mutual_information(rho, p);
            break;
        case Quantifier::tau:
            v = tripartite_correlations(rho, p);
            break;
        case Quantifier::discord:
            v = bures_geometric_discord(rho, p);
            break;
        }
        if (first || v > best.value + 1e-12) {
            best.value = v;
            best.partition = p;
            first = false;
        }
    }
    return best;
}

} // namespace qabsorb
