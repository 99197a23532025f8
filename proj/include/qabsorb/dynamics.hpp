#pragma once

#include <vector>

#include "qabsorb/linalg.hpp"
#include "qabsorb/model.hpp"

namespace qabsorb {

struct DensityMatrix {
    cmat matrix;
    std::vector<int> dims;

    int dim() const { return static_cast<int>(matrix.rows()); }
};

// Throws StructuralError unless rho is Hermitian (1e-10), unit trace (1e-10)
// and has min eigenvalue >= -1e-9.
void check_density_matrix(const DensityMatrix& rho);

enum class SteadyMethod {
    automatic, // dense sector SVD up to max_dense_sector, sparse LU above
    sector_svd,
    sector_lu,
};

struct SteadyOptions {
    SteadyMethod method = SteadyMethod::automatic;
    double null_tol = 1e-12;       // relative to the largest singular value
    int max_dense_sector = 2500;
};

struct SteadyReport {
    DensityMatrix rho;
    double residual = 0.0;       // |L'(rho)|_F / (|L'|_2 |rho|_F)
    int null_dimension = 1;
    int sector_size = 0;
    double min_eig_raw = 0.0;    // before clipping
    double sv_ratio_null = 0.0;  // smallest / largest singular value
    double sv_ratio_next = 0.0;  // second smallest / largest
    double separation = 0.0;     // min Bohr frequency / |L'|
};

// The stationary state lives in the block of coherences between degenerate
// free levels, because every dissipator and the coupling commute with the free
// rotation. Only that block is solved.
SteadyReport steady_state_report(const Liouvillian& L, const SteadyOptions& opt = {});

DensityMatrix steady_state(const Liouvillian& L);

struct TrajectoryPoint {
    double t;
    DensityMatrix rho;
};

// Largest rate scale used by the step guard of evolve.
double max_rate(const Liouvillian& L);

// Classical RK4 on the generator with the free rotation removed (states are
// in the interaction picture; populations and spectra are unchanged).
// stride > 1 records every stride-th step; the final state is always kept.
std::vector<TrajectoryPoint> evolve(const Liouvillian& L, const DensityMatrix& rho0,
                                    double duration, double dt, int stride = 1);

} // namespace qabsorb
