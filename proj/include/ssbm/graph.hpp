#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssbm {

using Vertex = std::uint32_t;
using Block = std::uint32_t;
using Count = std::int64_t;

/// Raised by the edge-list and partition readers. Carries the 1-based line
/// number of the offending line (0 when the failure is not line-specific).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Simple graph in CSR form. Immutable after construction.
///
/// Undirected graphs store each edge in both endpoints' neighbor lists, and
/// `in_neighbors` aliases `out_neighbors`, so iterating either list of a
/// vertex sees each incident edge exactly once.
class Graph {
public:
    Graph() = default;

    /// Builds from an edge list. Duplicate edges are collapsed ("u v" and
    /// "v u" are the same edge when undirected). Self-loops and endpoints
    /// >= num_vertices throw std::invalid_argument.
    static Graph from_edges(std::size_t num_vertices,
                            std::vector<std::pair<Vertex, Vertex>> edges,
                            bool directed);

    bool directed() const noexcept { return directed_; }
    std::size_t num_vertices() const noexcept { return num_vertices_; }
    std::size_t num_edges() const noexcept { return num_edges_; }

    std::span<const Vertex> out_neighbors(Vertex v) const {
        return {out_targets_.data() + out_offsets_[v],
                out_targets_.data() + out_offsets_[v + 1]};
    }

    std::span<const Vertex> in_neighbors(Vertex v) const {
        if (!directed_) return out_neighbors(v);
        return {in_targets_.data() + in_offsets_[v],
                in_targets_.data() + in_offsets_[v + 1]};
    }

    /// out+in degree for directed graphs, plain degree otherwise.
    Count total_degree(Vertex v) const {
        Count d = static_cast<Count>(out_offsets_[v + 1] - out_offsets_[v]);
        if (directed_) d += static_cast<Count>(in_offsets_[v + 1] - in_offsets_[v]);
        return d;
    }

    bool has_edge(Vertex u, Vertex v) const;

    /// Canonical edge list: (u, v) pairs sorted, u < v when undirected.
    std::vector<std::pair<Vertex, Vertex>> edges() const;

    /// Original vertex names when the graph was loaded with id remapping.
    const std::vector<std::string>& vertex_names() const noexcept { return names_; }
    void set_vertex_names(std::vector<std::string> names);

private:
    bool directed_ = true;
    std::size_t num_vertices_ = 0;
    std::size_t num_edges_ = 0;
    std::vector<std::size_t> out_offsets_{0};
    std::vector<Vertex> out_targets_;
    std::vector<std::size_t> in_offsets_{0};
    std::vector<Vertex> in_targets_;
    std::vector<std::string> names_;
};

struct EdgeListOptions {
    bool directed = true;
    /// Forces at least this many vertices (isolated trailing vertices).
    std::optional<std::size_t> num_vertices;
    /// Treat tokens as arbitrary names and map them to dense ids in order of
    /// first appearance. The mapping is kept in Graph::vertex_names().
    bool remap_ids = false;
};

/// Reads "u v" lines; '#' starts a comment line; blank lines are skipped.
/// A "# vertex_count: N" comment raises the vertex count to at least N so that
/// isolated trailing vertices survive a round trip.
Graph load_edge_list(const std::filesystem::path& path, const EdgeListOptions& options = {});
Graph parse_edge_list(std::istream& in, const EdgeListOptions& options = {});

void save_edge_list(const Graph& g, const std::filesystem::path& path,
                    const std::vector<std::string>& header = {});
void write_edge_list(const Graph& g, std::ostream& out,
                     const std::vector<std::string>& header = {});

}  // namespace ssbm
