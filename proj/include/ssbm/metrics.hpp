#pragma once

#include <span>
#include <vector>

#include "ssbm/partition.hpp"

namespace ssbm {

/// Hubert-Arabie adjusted Rand index. Two constant labelings score 1.
double ari(std::span<const Block> a, std::span<const Block> b);
double ari(const Partition& a, const Partition& b);

/// 1 for vertices whose block is in the image of graph k's shared map.
std::vector<Block> shared_labels(std::span<const Partition> partitions, const SharedMapping& mapping);

/// ARI of the shared/non-shared labels, pooled over all graphs' vertices.
double shared_ari(std::span<const Partition> partitions, const SharedMapping& mapping,
                  std::span<const Partition> true_partitions, const SharedMapping& true_mapping);

struct EvalReport {
    std::vector<double> partition_ari;
    double mean_partition_ari = 0.0;
    double shared_ari = 0.0;
};

EvalReport evaluate(std::span<const Partition> partitions, const SharedMapping& mapping,
                    std::span<const Partition> true_partitions, const SharedMapping& true_mapping);

double mean(std::span<const double> xs);
/// Midpoint of the two central values for even sizes.
double median(std::vector<double> xs);

}  // namespace ssbm
