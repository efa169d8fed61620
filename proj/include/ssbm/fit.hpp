#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ssbm/graph.hpp"
#include "ssbm/likelihood.hpp"
#include "ssbm/partition.hpp"

namespace ssbm {

using Rng = std::mt19937_64;

/// Inverse temperature grows geometrically from `initial` to `final` over the
/// first `ramp_fraction` of the sweeps and is held at `final` afterwards.
struct BetaSchedule {
    double initial = 1.0;
    double final = 1e4;
    double ramp_fraction = 0.9;

    double at(std::size_t sweep, std::size_t total_sweeps) const;
};

enum class McmcMode { single, shared };

struct McmcConfig {
    std::size_t sweeps = 500;
    BetaSchedule beta;
    double epsilon = 0.1;
    std::uint64_t seed = 1;
    McmcMode mode = McmcMode::shared;
    /// Steepest-ascent pass over all vertices after restoring the best state.
    bool greedy_finish = true;
    bool record_trace = true;
    /// Recount all block statistics after every sweep and throw on mismatch.
    bool verify_counts = false;

    void validate() const;
};

struct TracePoint {
    std::size_t sweep = 0;
    double beta = 0.0;
    double log_likelihood = 0.0;
    double best_log_likelihood = 0.0;
};

struct FitResult {
    std::vector<Partition> partitions;
    SharedMapping mapping;
    double log_likelihood = 0.0;
    ModelScore score;
    std::vector<TracePoint> trace;
    std::uint64_t seed = 0;
    std::string algorithm;
    double runtime_seconds = 0.0;
};

struct Proposal {
    Block to = 0;
    /// P(b' | b) and P(b | b') of the neighbor-biased proposal.
    double forward = 1.0;
    double reverse = 1.0;
};

/// Edge weight e_{x,y} between two blocks counted from x's side; summing over
/// y gives the total degree of block x.
Count block_edge_weight(const BlockCounts& counts, Block x, Block y);

/// Probability that the proposal for a vertex with this tally picks `target`.
double proposal_probability(const BlockCounts& counts, const NeighborTally& tally, Block target,
                            double epsilon);

/// Same, under the counts that would hold after moving the vertex from
/// `from` to `to`.
double proposal_probability_after_move(const BlockCounts& counts, const NeighborTally& tally,
                                       Block from, Block to, Block target, double epsilon);

/// Picks a uniformly random incident edge (v, u), then block r with
/// probability (e_{b_u,r} + eps) / (e_{b_u} + eps B). Isolated vertices
/// propose uniformly. `tally` is refilled for v.
Proposal propose_move(const Graph& g, const Partition& p, const BlockCounts& counts, Vertex v,
                      double epsilon, Rng& rng, NeighborTally& tally);

/// min(1, exp(beta * delta) * reverse / forward).
double accept_probability(double delta_llh, double beta, double forward, double reverse);

/// Annealed Metropolis-Hastings over vertex moves. Shared mode ties the
/// first s blocks of every graph together; single mode requires s = 0.
/// Returns the best state visited (checked at sweep boundaries), optionally
/// refined by a greedy pass.
FitResult mcmc_fit(std::span<const Graph> graphs, std::span<const std::size_t> num_blocks,
                   std::size_t s, const McmcConfig& config,
                   std::optional<std::vector<Partition>> initial = std::nullopt);

struct MultilevelConfig {
    double merge_factor = 2.0;
    std::size_t resettle_sweeps = 10;
    std::size_t merge_candidates = 10;
    double resettle_beta = 1e4;
    /// Levels starting at or below this many blocks score every block pair
    /// and merge one pair at a time; larger levels sample candidates.
    std::size_t exhaustive_merge_blocks = 64;
    double epsilon = 0.1;
    std::uint64_t seed = 1;
};

/// Agglomerative initialization from singleton blocks down to target_blocks.
Partition multilevel_init(const Graph& g, std::size_t target_blocks, const MultilevelConfig& config);

enum class Strategy { single, multilevel, ml_single, shared, ml_shared };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);
/// True when the strategy fits a shared model (s is meaningful).
bool strategy_shares(Strategy s);

struct PipelineConfig {
    McmcConfig mcmc;
    MultilevelConfig multilevel;
};

/// Runs one of the five fitting strategies. Seeds of the multilevel stage
/// are derived from mcmc.seed so that strategies sharing that stage start
/// from the same partitions.
FitResult run_pipeline(Strategy strategy, std::span<const Graph> graphs,
                       std::span<const std::size_t> num_blocks, std::size_t s,
                       const PipelineConfig& config);

/// Per-graph multilevel partitions as used by the ml_* strategies.
std::vector<Partition> multilevel_partitions(std::span<const Graph> graphs,
                                             std::span<const std::size_t> num_blocks,
                                             const PipelineConfig& config);

/// Exact selection on fixed partitions, relabeling, and shared refinement:
/// the tail of the ml_shared strategy.
FitResult refine_shared(std::span<const Graph> graphs, std::vector<Partition> partitions,
                        std::size_t s, const PipelineConfig& config);

}  // namespace ssbm
