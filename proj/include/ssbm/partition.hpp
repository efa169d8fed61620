#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ssbm/graph.hpp"

namespace ssbm {

/// Block assignment of one graph. Labels are 0-based internally and written
/// 1-based in files. Empty blocks are allowed.
struct Partition {
    std::size_t num_blocks = 0;
    std::vector<Block> assignment;
    std::vector<Count> block_sizes;

    Partition() = default;
    Partition(std::size_t blocks, std::vector<Block> labels);

    std::size_t num_vertices() const noexcept { return assignment.size(); }
    Block operator[](Vertex v) const { return assignment[v]; }

    friend bool operator==(const Partition&, const Partition&) = default;
};

/// Number of dyads between blocks of the given sizes.
inline Count dyad_count(Count n_i, Count n_j, bool same_block, bool directed) {
    if (!same_block) return n_i * n_j;
    return directed ? n_i * (n_i - 1) : n_i * (n_i - 1) / 2;
}

/// Per-vertex neighbor tally by block, reused across moves of one chain.
/// For undirected graphs only `out` is filled.
struct NeighborTally {
    std::vector<Count> out;
    std::vector<Count> in;
    std::vector<Block> touched;
    Count degree = 0;

    void reset(std::size_t num_blocks);
};

void tally_neighbors(const Graph& g, const Partition& p, Vertex v, NeighborTally& tally);

/// Sufficient statistics of a partition: edge counts between block pairs plus
/// block sizes (dyads and non-edges derive from them) and block degrees.
///
/// Undirected counts are stored symmetrically; only i <= j is meaningful and
/// edges(i, j) == edges(j, i).
class BlockCounts {
public:
    BlockCounts() = default;
    BlockCounts(std::size_t num_blocks, bool directed);

    std::size_t num_blocks() const noexcept { return num_blocks_; }
    bool directed() const noexcept { return directed_; }

    Count edges(Block i, Block j) const { return edges_[i * num_blocks_ + j]; }
    Count dyads(Block i, Block j) const {
        return dyad_count(sizes_[i], sizes_[j], i == j, directed_);
    }
    Count non_edges(Block i, Block j) const { return dyads(i, j) - edges(i, j); }
    Count block_size(Block i) const { return sizes_[i]; }
    /// Sum of total degrees of the block's vertices.
    Count block_degree(Block i) const { return degrees_[i]; }

    Count num_vertices() const;
    Count total_edges() const;

    /// Edge count of pair (i, j) after moving a vertex with the given tally
    /// from block `from` to block `to`, without applying the move.
    Count edges_after_move(Block i, Block j, Block from, Block to,
                           const NeighborTally& tally) const;

    friend bool operator==(const BlockCounts&, const BlockCounts&) = default;

private:
    friend BlockCounts compute_block_counts(const Graph&, const Partition&);
    friend void move_vertex(const Graph&, Partition&, BlockCounts&, Vertex, Block,
                            const NeighborTally&);
    friend BlockCounts merge_blocks(const BlockCounts&, Block, Block);

    void add_edges(Block i, Block j, Count delta);

    std::size_t num_blocks_ = 0;
    bool directed_ = true;
    std::vector<Count> edges_;
    std::vector<Count> sizes_;
    std::vector<Count> degrees_;
};

/// Full recount in O(E + B^2). Throws std::out_of_range on a bad label and
/// std::invalid_argument on a size mismatch.
BlockCounts compute_block_counts(const Graph& g, const Partition& p);

/// Moves v to block `to`, updating partition and counts in O(deg(v) + B).
void move_vertex(const Graph& g, Partition& p, BlockCounts& counts, Vertex v, Block to);
/// Same, reusing a tally already computed for v under the current partition.
void move_vertex(const Graph& g, Partition& p, BlockCounts& counts, Vertex v, Block to,
                 const NeighborTally& tally);

/// Counts after merging block `from` into block `into` (block `from` left empty).
BlockCounts merge_blocks(const BlockCounts& counts, Block from, Block into);

/// Relabels blocks: new label of block b is perm[b].
Partition permute_blocks(const Partition& p, const std::vector<Block>& perm);

/// Injective alignment of s shared blocks: maps[k][l] is the block of graph k
/// playing the l-th shared role.
struct SharedMapping {
    std::size_t shared = 0;
    std::vector<std::vector<Block>> maps;

    static SharedMapping identity_prefix(std::size_t num_graphs, std::size_t s);
    static SharedMapping none(std::size_t num_graphs) { return identity_prefix(num_graphs, 0); }

    std::size_t num_graphs() const noexcept { return maps.size(); }

    /// Throws std::invalid_argument unless every map has length s, entries in
    /// range, and no repeats.
    void validate(const std::vector<std::size_t>& num_blocks) const;

    friend bool operator==(const SharedMapping&, const SharedMapping&) = default;
};

/// "vertex_id block_label" lines, labels 1-based.
void write_partition(const Partition& p, std::ostream& out,
                     const std::vector<std::string>& header = {},
                     const std::vector<std::string>& vertex_names = {});
void save_partition(const Partition& p, const std::filesystem::path& path,
                    const std::vector<std::string>& header = {},
                    const std::vector<std::string>& vertex_names = {});
/// Reads a partition file for a graph of num_vertices vertices. Every vertex
/// must appear exactly once. num_blocks = 0 infers B from the largest label.
/// When vertex_names is non-empty, ids are looked up by name.
Partition load_partition(const std::filesystem::path& path, std::size_t num_vertices,
                         std::size_t num_blocks = 0,
                         const std::vector<std::string>& vertex_names = {});
Partition parse_partition(std::istream& in, std::size_t num_vertices, std::size_t num_blocks = 0,
                          const std::vector<std::string>& vertex_names = {});

/// "graph_index: b_1 ... b_s" lines, graph index and block labels 1-based.
void write_mapping(const SharedMapping& m, std::ostream& out,
                   const std::vector<std::string>& header = {});
void save_mapping(const SharedMapping& m, const std::filesystem::path& path,
                  const std::vector<std::string>& header = {});
/// An empty file (comments only) yields s = 0 for num_graphs graphs.
SharedMapping load_mapping(const std::filesystem::path& path, std::size_t num_graphs);
SharedMapping parse_mapping(std::istream& in, std::size_t num_graphs);

}  // namespace ssbm
