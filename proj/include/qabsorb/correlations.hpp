#pragma once

#include <vector>

#include "qabsorb/linalg.hpp"

namespace qabsorb {

// Subsystems not listed in any group are traced out first.
struct Partition {
    std::vector<int> dims;
    std::vector<std::vector<int>> groups;
};

double entropy(const cmat& rho); // nats

double mutual_information(const cmat& rho, const Partition& p);
double rescaled_mutual_information(const cmat& rho, const Partition& p);
double tripartite_correlations(const cmat& rho, const Partition& p);

// Normalized Bures geometric discord with groups[0] measured; groups[0] must
// be a single two-dimensional subsystem.
double bures_geometric_discord(const cmat& rho, const Partition& p);

// Largest fidelity between rho (2 x d, first factor measured) and a
// classical-quantum state.
double max_cq_fidelity(const cmat& rho_ab, int d_b);

double trace_distance(const cmat& rho, const cmat& sigma);

enum class Quantifier { mi, mi_rescaled, tau, discord };

struct PartitionConstraints {
    std::vector<int> subsystems; // candidates; empty means all
};

struct BestPartition {
    double value = 0.0;
    Partition partition;
};

BestPartition maximize_over_partitions(const cmat& rho, const std::vector<int>& dims,
                                       Quantifier q, const PartitionConstraints& c = {});

} // namespace qabsorb
