#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ssbm/partition.hpp"

namespace ssbm {

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// x log x with 0 log 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// C / (C + F), or 0 for an empty dyad set.
inline double mle_theta(Count edges, Count non_edges) {
    const Count total = edges + non_edges;
    return total == 0 ? 0.0 : static_cast<double>(edges) / static_cast<double>(total);
}

/// Pooled estimate sum(C) / sum(C + F) over (C, F) pairs.
double shared_theta(std::span<const std::pair<Count, Count>> counts);

/// C log theta + F log(1 - theta) with 0 log 0 = 0. Returns -inf when theta
/// assigns zero probability to an observed dyad.
double bernoulli_term(Count edges, Count non_edges, double theta);

/// x log x for a nonnegative count; small counts come from a lookup table.
double xlogx_count(Count x);

/// bernoulli_term at the maximum-likelihood theta, evaluated as
/// C log C + F log F - (C + F) log(C + F).
inline double mle_term(Count edges, Count non_edges) {
    return xlogx_count(edges) + xlogx_count(non_edges) - xlogx_count(edges + non_edges);
}

/// B x B edge probabilities; for undirected models only i <= j is read.
struct ThetaMatrix {
    std::size_t num_blocks = 0;
    std::vector<double> values;

    ThetaMatrix() = default;
    explicit ThetaMatrix(std::size_t blocks, double fill = 0.0)
        : num_blocks(blocks), values(blocks * blocks, fill) {}

    double& operator()(Block i, Block j) { return values[i * num_blocks + j]; }
    double operator()(Block i, Block j) const { return values[i * num_blocks + j]; }
};

ThetaMatrix mle_theta_matrix(const BlockCounts& counts);

/// Maximum-likelihood thetas of every graph under a shared mapping: shared
/// block pairs get the pooled estimate, all others their own.
std::vector<ThetaMatrix> shared_theta_matrices(std::span<const BlockCounts> all_counts,
                                               const SharedMapping& mapping);

/// Bernoulli log-likelihood of one graph's counts. Sums over ordered block
/// pairs when directed and over i <= j otherwise. May return -inf.
double log_likelihood(const BlockCounts& counts, const ThetaMatrix& theta);

/// Single-graph log-likelihood at the MLE thetas.
double mle_log_likelihood(const BlockCounts& counts);

/// Total log-likelihood of n graphs at maximum-likelihood parameters, pooling
/// the counts of pairs whose blocks are both shared.
double shared_log_likelihood(std::span<const BlockCounts> all_counts, const SharedMapping& mapping);

struct ModelScore {
    double log_likelihood = 0.0;
    Count num_parameters = 0;
    Count num_dyads = 0;
    double bic = 0.0;
};

inline Count theta_parameter_count(std::size_t num_blocks, bool directed) {
    const auto b = static_cast<Count>(num_blocks);
    return directed ? b * b : b * (b + 1) / 2;
}

/// k ln(D) - 2 LLH with k = sum_k P(B_k) - (n - 1) P(s) and D the number of
/// observed dyads.
ModelScore bic(std::span<const BlockCounts> all_counts, const SharedMapping& mapping, bool directed);

/// Mutable multi-graph state for MCMC: partitions, counts and a shared
/// mapping, with O(deg(v) + n B) log-likelihood deltas for single moves.
/// Pooled shared counts are not cached; they are re-summed over the graphs
/// for the O(B) block pairs a move touches. Owned by one chain.
class JointState {
public:
    JointState(std::vector<const Graph*> graphs, std::vector<Partition> partitions,
               SharedMapping mapping);

    std::size_t num_graphs() const noexcept { return graphs_.size(); }
    const Graph& graph(std::size_t k) const { return *graphs_[k]; }
    const Partition& partition(std::size_t k) const { return partitions_[k]; }
    const std::vector<Partition>& partitions() const noexcept { return partitions_; }
    const BlockCounts& counts(std::size_t k) const { return counts_[k]; }
    const std::vector<BlockCounts>& all_counts() const noexcept { return counts_; }
    const SharedMapping& mapping() const noexcept { return mapping_; }

    /// Full recomputation.
    double log_likelihood() const;
    /// Log-likelihood of graph k alone, with pooled terms excluded. Only
    /// meaningful when nothing is shared.
    double graph_log_likelihood(std::size_t k) const;

    /// Change in total log-likelihood if v in graph k moved to block `to`.
    /// `tally` must be the neighbor tally of v under the current partition.
    double delta_move(std::size_t k, Vertex v, Block to, const NeighborTally& tally) const;
    double delta_move(std::size_t k, Vertex v, Block to) const;

    void apply_move(std::size_t k, Vertex v, Block to, const NeighborTally& tally);
    void apply_move(std::size_t k, Vertex v, Block to);

    /// Replaces graph k's partition (e.g. when restoring a best state).
    void set_partition(std::size_t k, Partition p);

private:
    static constexpr Block kNotShared = ~Block{0};

    double pair_term(std::size_t k, Block i, Block j, Count edges, Count dyads) const;

    std::vector<const Graph*> graphs_;
    std::vector<Partition> partitions_;
    std::vector<BlockCounts> counts_;
    SharedMapping mapping_;
    /// shared_index_[k][b] = l when maps[k][l] == b, else kNotShared.
    std::vector<std::vector<Block>> shared_index_;
};

}  // namespace ssbm
