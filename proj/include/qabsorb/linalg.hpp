#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qabsorb {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;
using smat = Eigen::SparseMatrix<cplx>;

// max |m_ij|
double max_abs(const cmat& m);

// Hermiticity test with tolerance 1e-12 * (1 + max|M|).
bool is_hermitian(const cmat& m, double rel_tol = 1e-12);

// Kronecker product, block (i,j) = A(i,j) * B.
cmat tensor_product(const cmat& a, const cmat& b);
smat tensor_product(const smat& a, const smat& b);

// Reduced matrix on the subsystems listed in keep (order of keep is ignored,
// kept factors stay in their original order).
cmat partial_trace(const cmat& rho, const std::vector<int>& dims, std::vector<int> keep);

struct Eigh {
    rvec values;   // ascending
    cmat vectors;  // columns
};

// Throws StructuralError if h is not Hermitian.
Eigh hermitian_eigendecomposition(const cmat& h);

enum class PsdFn { log, sqrt, abs };

// f applied on the spectrum. For log, eigenvalues <= clip map to 0 so that
// x ln x sums treat them as empty. Throws PositivityError when an eigenvalue
// lies below -clip (except for abs).
cmat psd_matrix_function(const cmat& rho, PsdFn f, double clip = 1e-12);

// (A + A^dagger)/2
cmat hermitize(const cmat& a);

// Embed op acting on factor k of a tensor product with the given dims.
smat embed(const cmat& op, const std::vector<int>& dims, int k);

smat to_sparse(const cmat& m);

} // namespace qabsorb
