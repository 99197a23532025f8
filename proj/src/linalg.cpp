#include "qabsorb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qabsorb/errors.hpp"

namespace qabsorb {

double max_abs(const cmat& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const cmat& m, double rel_tol)
{
    if (m.rows() != m.cols())
        return false;
    double dev = max_abs(m - m.adjoint());
    return dev <= rel_tol * (1.0 + max_abs(m));
}

cmat tensor_product(const cmat& a, const cmat& b)
{
    cmat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

smat tensor_product(const smat& a, const smat& b)
{
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<size_t>(a.nonZeros() * b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (smat::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (smat::InnerIterator ib(b, kb); ib; ++ib)
                    trip.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()),
                                      static_cast<int>(ia.col() * b.cols() + ib.col()),
                                      ia.value() * ib.value());
    smat out(a.rows() * b.rows(), a.cols() * b.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

cmat partial_trace(const cmat& rho, const std::vector<int>& dims, std::vector<int> keep)
{
    const int n = static_cast<int>(dims.size());
    long total = 1;
    for (int d : dims) {
        if (d <= 0)
            throw StructuralError("partial_trace: non-positive subsystem dimension");
        total *= d;
    }
    if (rho.rows() != total || rho.cols() != total)
        throw StructuralError("partial_trace: dims do not match matrix size");
    if (keep.empty())
        throw StructuralError("partial_trace: keep is empty");
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    for (int k : keep)
        if (k < 0 || k >= n)
            throw StructuralError("partial_trace: keep index out of range");

    std::vector<bool> kept(n, false);
    for (int k : keep)
        kept[k] = true;

    // strides of the full index, first factor most significant
    std::vector<long> stride(n, 1);
    for (int i = n - 2; i >= 0; --i)
        stride[i] = stride[i + 1] * dims[i + 1];

    std::vector<int> kdims, tdims;
    std::vector<long> kstride, tstride;
    for (int i = 0; i < n; ++i) {
        if (kept[i]) {
            kdims.push_back(dims[i]);
            kstride.push_back(stride[i]);
        } else {
            tdims.push_back(dims[i]);
            tstride.push_back(stride[i]);
        }
    }
    auto offsets = [](const std::vector<int>& ds, const std::vector<long>& st) {
        long cnt = 1;
        for (int d : ds)
            cnt *= d;
        std::vector<long> off(cnt, 0);
        for (long idx = 0; idx < cnt; ++idx) {
            long rem = idx, o = 0;
            for (int i = static_cast<int>(ds.size()) - 1; i >= 0; --i) {
                o += (rem % ds[i]) * st[i];
                rem /= ds[i];
            }
            off[idx] = o;
        }
        return off;
    };
    const auto ko = offsets(kdims, kstride);
    const auto to = offsets(tdims, tstride);

    const long dk = static_cast<long>(ko.size());
    cmat out = cmat::Zero(dk, dk);
    for (long i = 0; i < dk; ++i)
        for (long j = 0; j < dk; ++j) {
            cplx s = 0.0;
            for (long t : to)
                s += rho(ko[i] + t, ko[j] + t);
            out(i, j) = s;
        }
    return out;
}

Eigh hermitian_eigendecomposition(const cmat& h)
{
    if (!is_hermitian(h))
        throw StructuralError("hermitian_eigendecomposition: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<cmat> es(hermitize(h));
    if (es.info() != Eigen::Success)
        throw StructuralError("hermitian_eigendecomposition: solver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

cmat psd_matrix_function(const cmat& rho, PsdFn f, double clip)
{
    if (clip < 0)
        throw ParameterError("psd_matrix_function: clip must be >= 0");
    const Eigh e = hermitian_eigendecomposition(rho);
    rvec w = e.values;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        double x = w(i);
        if (f != PsdFn::abs && x < -clip)
            throw PositivityError("psd_matrix_function: eigenvalue " + std::to_string(x) +
                                  " below -clip");
        switch (f) {
        case PsdFn::log:
            w(i) = x > clip ? std::log(x) : 0.0;
            break;
        case PsdFn::sqrt:
            w(i) = x > 0 ? std::sqrt(x) : 0.0;
            break;
        case PsdFn::abs:
            w(i) = std::abs(x);
            break;
        }
    }
    return e.vectors * w.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

cmat hermitize(const cmat& a)
{
    return 0.5 * (a + a.adjoint());
}

smat to_sparse(const cmat& m)
{
    smat s = m.sparseView();
    s.makeCompressed();
    return s;
}

smat embed(const cmat& op, const std::vector<int>& dims, int k)
{
    smat out(1, 1);
    out.insert(0, 0) = 1.0;
    for (int i = 0; i < static_cast<int>(dims.size()); ++i) {
        smat f;
        if (i == k) {
            if (op.rows() != dims[i])
                throw StructuralError("embed: operator size does not match factor");
            f = to_sparse(op);
        } else {
            f = smat(dims[i], dims[i]);
            f.setIdentity();
        }
        out = tensor_product(out, f);
    }
    out.makeCompressed();
    return out;
}

} // namespace qabsorb
