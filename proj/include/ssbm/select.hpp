#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssbm/likelihood.hpp"
#include "ssbm/partition.hpp"

namespace ssbm {

/// Requested number of shared blocks exceeds some graph's block count.
class InfeasibleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Candidate shared blocks [B_1] x ... x [B_n], indexed in lexicographic
/// order (graph 1 most significant).
class TupleSpace {
public:
    explicit TupleSpace(std::vector<std::size_t> num_blocks);

    std::size_t size() const noexcept { return size_; }
    std::size_t num_graphs() const noexcept { return radices_.size(); }
    Block coord(std::size_t index, std::size_t k) const { return coords_[index * radices_.size() + k]; }
    std::vector<Block> tuple(std::size_t index) const;
    std::size_t index_of(std::span<const Block> tuple) const;
    /// Number of consecutive indices sharing the same first coordinate.
    std::size_t first_stride() const noexcept { return strides_.empty() ? 1 : strides_.front(); }

private:
    std::vector<std::size_t> radices_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 1;
    std::vector<Block> coords_;
};

/// Per-graph unshared pair scores U^k and pooled scores Q over tuple pairs.
///
/// Losses are expressed relative to leaving everything unshared:
/// self_loss(r) is what sharing the block pair (r, r) costs, pair_loss(r, t)
/// what sharing the pairs between two distinct shared tuples costs. Both are
/// >= 0 since pooled estimates cannot beat per-graph ones.
class PairScores {
public:
    static constexpr std::size_t kDefaultMaterializeCap = std::size_t{1} << 24;

    explicit PairScores(std::span<const BlockCounts> all_counts,
                        std::size_t materialize_cap = kDefaultMaterializeCap);

    const TupleSpace& tuples() const noexcept { return tuples_; }
    std::size_t num_graphs() const noexcept { return counts_.size(); }
    bool directed() const noexcept { return directed_; }

    double unshared(std::size_t k, Block i, Block j) const {
        return unshared_[k][i * counts_[k].num_blocks() + j];
    }
    /// Log-likelihood with nothing shared.
    double unshared_total() const noexcept { return unshared_total_; }

    /// Pooled log-likelihood of the block pairs (r_k, t_k) across graphs.
    double q(std::size_t r, std::size_t t) const;

    double self_loss(std::size_t r) const { return self_loss_[r]; }
    double pair_loss(std::size_t r, std::size_t t) const;

    bool materialized() const noexcept { return !pair_table_.empty(); }

private:
    double compute_pair_loss(std::size_t r, std::size_t t) const;

    std::vector<BlockCounts> counts_;
    bool directed_ = true;
    TupleSpace tuples_;
    std::vector<std::vector<double>> unshared_;
    double unshared_total_ = 0.0;
    std::vector<double> self_loss_;
    std::vector<double> pair_table_;
};

struct SelectionResult {
    SharedMapping mapping;
    double log_likelihood = 0.0;
    double llh_loss_vs_unshared = 0.0;
    std::string solver;
    double runtime_seconds = 0.0;
    /// Search nodes for the exact solver, iterations otherwise.
    std::uint64_t work = 0;
};

struct SelectOptions {
    std::size_t materialize_cap = PairScores::kDefaultMaterializeCap;
};

/// Optimal choice of s shared tuples by branch and bound over tuple sets
/// in increasing order of the first graph's block.
SelectionResult select_exact(std::span<const BlockCounts> all_counts, std::size_t s,
                             const SelectOptions& options = {});

/// Repeatedly adds the tuple with the smallest log-likelihood loss given the
/// tuples chosen so far. Ties go to the lexicographically smallest tuple.
SelectionResult select_greedy(std::span<const BlockCounts> all_counts, std::size_t s,
                              const SelectOptions& options = {});

/// Uniformly random injective map per graph.
SelectionResult select_random(std::span<const BlockCounts> all_counts, std::size_t s,
                              std::uint64_t seed);

struct RelabeledModel {
    std::vector<Partition> partitions;
    SharedMapping mapping;
    /// permutations[k][old_block] = new_block
    std::vector<std::vector<Block>> permutations;
};

/// Renames blocks so that maps[k][l] becomes block l; the remaining blocks
/// keep their relative order after the shared ones.
RelabeledModel relabel_shared_first(std::span<const Partition> partitions, const SharedMapping& mapping);

std::vector<Block> invert_permutation(std::span<const Block> perm);

void check_feasible(std::span<const BlockCounts> all_counts, std::size_t s);

}  // namespace ssbm
