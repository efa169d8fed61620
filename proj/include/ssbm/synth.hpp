#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssbm/graph.hpp"
#include "ssbm/likelihood.hpp"
#include "ssbm/partition.hpp"

namespace ssbm {

struct PlantedParams {
    /// One entry per graph.
    std::vector<std::size_t> num_vertices;
    std::vector<std::size_t> num_blocks;
    std::size_t shared = 0;
    double alpha = 0.5;
    double beta = 1.0;
    bool directed = true;
    /// Block sizes differ by at most one (shuffled) instead of i.i.d. uniform labels.
    bool balanced = false;
    std::uint64_t seed = 1;
    /// Every theta entry takes this value instead of a Beta draw.
    std::optional<double> fixed_theta;

    /// n graphs with identical sizes.
    static PlantedParams uniform(std::size_t n, std::size_t vertices, std::size_t blocks,
                                 std::size_t shared, std::uint64_t seed);

    std::size_t num_graphs() const noexcept { return num_vertices.size(); }
    void validate() const;
};

/// Ground truth of a planted SSBM. Shared blocks occupy labels 0..s-1 of
/// every graph and carry one common theta submatrix.
struct PlantedInstance {
    std::vector<Graph> graphs;
    std::vector<Partition> true_partitions;
    SharedMapping true_mapping;
    std::vector<ThetaMatrix> true_thetas;
    PlantedParams params;
};

PlantedInstance generate(const PlantedParams& params);

/// Each vertex independently, with probability `noise`, gets a uniformly
/// random block (possibly its own).
Partition add_noise(const Partition& p, double noise, std::uint64_t seed);

/// Writes graph_<k>.txt, truth_<k>.txt (k 1-based), mapping.txt and
/// manifest.txt into `dir`, creating it if needed.
void save_instance(const PlantedInstance& inst, const std::filesystem::path& dir,
                   const std::vector<std::string>& header = {});

}  // namespace ssbm
