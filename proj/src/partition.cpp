#include "ssbm/partition.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace ssbm {

Partition::Partition(std::size_t blocks, std::vector<Block> labels)
    : num_blocks(blocks), assignment(std::move(labels)), block_sizes(blocks, 0) {
    for (Block b : assignment) {
        if (b >= num_blocks)
            throw std::out_of_range("block label " + std::to_string(b + 1) + " outside [1.." +
                                    std::to_string(num_blocks) + "]");
        ++block_sizes[b];
    }
}

void NeighborTally::reset(std::size_t num_blocks) {
    if (out.size() != num_blocks) {
        out.assign(num_blocks, 0);
        in.assign(num_blocks, 0);
        touched.clear();
    } else {
        for (Block b : touched) out[b] = in[b] = 0;
        touched.clear();
    }
    degree = 0;
}

void tally_neighbors(const Graph& g, const Partition& p, Vertex v, NeighborTally& tally) {
    tally.reset(p.num_blocks);
    auto mark = [&](Block b) {
        if (tally.out[b] == 0 && tally.in[b] == 0) tally.touched.push_back(b);
    };
    for (Vertex u : g.out_neighbors(v)) {
        const Block b = p.assignment[u];
        mark(b);
        ++tally.out[b];
    }
    if (g.directed()) {
        for (Vertex u : g.in_neighbors(v)) {
            const Block b = p.assignment[u];
            mark(b);
            ++tally.in[b];
        }
    }
    tally.degree = g.total_degree(v);
}

BlockCounts::BlockCounts(std::size_t num_blocks, bool directed)
    : num_blocks_(num_blocks),
      directed_(directed),
      edges_(num_blocks * num_blocks, 0),
      sizes_(num_blocks, 0),
      degrees_(num_blocks, 0) {}

Count BlockCounts::num_vertices() const {
    return std::accumulate(sizes_.begin(), sizes_.end(), Count{0});
}

Count BlockCounts::total_edges() const {
    Count total = 0;
    for (Block i = 0; i < num_blocks_; ++i)
        for (Block j = directed_ ? 0 : i; j < num_blocks_; ++j) total += edges(i, j);
    return total;
}

void BlockCounts::add_edges(Block i, Block j, Count delta) {
    edges_[i * num_blocks_ + j] += delta;
    if (!directed_ && i != j) edges_[j * num_blocks_ + i] += delta;
}

Count BlockCounts::edges_after_move(Block i, Block j, Block from, Block to,
                                    const NeighborTally& tally) const {
    Count c = edges(i, j);
    if (from == to) return c;
    if (directed_) {
        if (i == to) c += tally.out[j];
        if (i == from) c -= tally.out[j];
        if (j == to) c += tally.in[i];
        if (j == from) c -= tally.in[i];
    } else {
        if (i == to) c += tally.out[j];
        if (i == from) c -= tally.out[j];
        if (i != j) {
            if (j == to) c += tally.out[i];
            if (j == from) c -= tally.out[i];
        }
    }
    return c;
}

BlockCounts compute_block_counts(const Graph& g, const Partition& p) {
    if (p.assignment.size() != g.num_vertices())
        throw std::invalid_argument("partition has " + std::to_string(p.assignment.size()) +
                                    " entries for a graph with " +
                                    std::to_string(g.num_vertices()) + " vertices");
    BlockCounts counts(p.num_blocks, g.directed());
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
        const Block bv = p.assignment[v];
        if (bv >= p.num_blocks)
            throw std::out_of_range("vertex " + std::to_string(v) + " has block label " +
                                    std::to_string(bv + 1) + " outside [1.." +
                                    std::to_string(p.num_blocks) + "]");
        ++counts.sizes_[bv];
        counts.degrees_[bv] += g.total_degree(v);
        for (Vertex u : g.out_neighbors(v)) {
            if (!g.directed() && u < v) continue;
            counts.add_edges(bv, p.assignment[u], 1);
        }
    }
    return counts;
}

void move_vertex(const Graph& g, Partition& p, BlockCounts& counts, Vertex v, Block to) {
    NeighborTally tally;
    tally_neighbors(g, p, v, tally);
    move_vertex(g, p, counts, v, to, tally);
}

void move_vertex(const Graph& g, Partition& p, BlockCounts& counts, Vertex v, Block to,
                 const NeighborTally& tally) {
    if (to >= p.num_blocks)
        throw std::out_of_range("target block " + std::to_string(to + 1) + " outside [1.." +
                                std::to_string(p.num_blocks) + "]");
    const Block from = p.assignment[v];
    if (from == to) return;
    for (Block x : tally.touched) {
        if (tally.out[x] != 0) {
            counts.add_edges(from, x, -tally.out[x]);
            counts.add_edges(to, x, tally.out[x]);
        }
        if (g.directed() && tally.in[x] != 0) {
            counts.add_edges(x, from, -tally.in[x]);
            counts.add_edges(x, to, tally.in[x]);
        }
    }
    --counts.sizes_[from];
    ++counts.sizes_[to];
    counts.degrees_[from] -= tally.degree;
    counts.degrees_[to] += tally.degree;
    --p.block_sizes[from];
    ++p.block_sizes[to];
    p.assignment[v] = to;
}

BlockCounts merge_blocks(const BlockCounts& counts, Block from, Block into) {
    BlockCounts merged = counts;
    if (from == into) return merged;
    const std::size_t B = counts.num_blocks_;
    auto at = [&](Block i, Block j) -> Count& { return merged.edges_[i * B + j]; };
    if (counts.directed_) {
        for (Block x = 0; x < B; ++x) {
            at(into, x) += at(from, x);
            at(from, x) = 0;
        }
        for (Block x = 0; x < B; ++x) {
            at(x, into) += at(x, from);
            at(x, from) = 0;
        }
    } else {
        const Count diag = counts.edges(into, into) + counts.edges(from, from) +
                           counts.edges(from, into);
        for (Block x = 0; x < B; ++x) {
            if (x == from || x == into) continue;
            at(into, x) += at(from, x);
            at(x, into) = at(into, x);
            at(from, x) = at(x, from) = 0;
        }
        at(from, into) = at(into, from) = at(from, from) = 0;
        at(into, into) = diag;
    }
    merged.sizes_[into] += merged.sizes_[from];
    merged.sizes_[from] = 0;
    merged.degrees_[into] += merged.degrees_[from];
    merged.degrees_[from] = 0;
    return merged;
}

Partition permute_blocks(const Partition& p, const std::vector<Block>& perm) {
    if (perm.size() != p.num_blocks)
        throw std::invalid_argument("block permutation has wrong length");
    std::vector<Block> labels(p.assignment.size());
    std::transform(p.assignment.begin(), p.assignment.end(), labels.begin(),
                   [&](Block b) { return perm[b]; });
    return Partition(p.num_blocks, std::move(labels));
}

SharedMapping SharedMapping::identity_prefix(std::size_t num_graphs, std::size_t s) {
    SharedMapping m;
    m.shared = s;
    std::vector<Block> prefix(s);
    std::iota(prefix.begin(), prefix.end(), Block{0});
    m.maps.assign(num_graphs, prefix);
    return m;
}

void SharedMapping::validate(const std::vector<std::size_t>& num_blocks) const {
    if (maps.size() != num_blocks.size())
        throw std::invalid_argument("mapping covers " + std::to_string(maps.size()) +
                                    " graphs, expected " + std::to_string(num_blocks.size()));
    for (std::size_t k = 0; k < maps.size(); ++k) {
        if (maps[k].size() != shared)
            throw std::invalid_argument("mapping for graph " + std::to_string(k + 1) +
                                        " has wrong length");
        if (shared > num_blocks[k])
            throw std::invalid_argument("more shared blocks than blocks in graph " +
                                        std::to_string(k + 1));
        std::vector<bool> seen(num_blocks[k], false);
        for (Block b : maps[k]) {
            if (b >= num_blocks[k])
                throw std::invalid_argument("mapped block out of range in graph " +
                                            std::to_string(k + 1));
            if (seen[b])
                throw std::invalid_argument("mapping for graph " + std::to_string(k + 1) +
                                            " is not injective");
            seen[b] = true;
        }
    }
}

namespace {

bool skip_line(std::string_view line) {
    const auto first = line.find_first_not_of(" \t\r");
    return first == std::string_view::npos || line[first] == '#';
}

std::string line_prefix(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

template <typename T>
T parse_number(const std::string& token, std::size_t line_no) {
    T value{};
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError(line_prefix(line_no) + "invalid number '" + token + "'", line_no);
    return value;
}

}  // namespace

void write_partition(const Partition& p, std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::string>& vertex_names) {
    for (const auto& h : header) out << "# " << h << '\n';
    for (Vertex v = 0; v < p.assignment.size(); ++v) {
        if (vertex_names.empty())
            out << v;
        else
            out << vertex_names[v];
        out << ' ' << p.assignment[v] + 1 << '\n';
    }
}

void save_partition(const Partition& p, const std::filesystem::path& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::string>& vertex_names) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_partition(p, out, header, vertex_names);
}

Partition parse_partition(std::istream& in, std::size_t num_vertices, std::size_t num_blocks,
                          const std::vector<std::string>& vertex_names) {
    std::unordered_map<std::string, Vertex> by_name;
    for (Vertex v = 0; v < vertex_names.size(); ++v) by_name.emplace(vertex_names[v], v);

    constexpr Block unset = ~Block{0};
    std::vector<Block> labels(num_vertices, unset);
    std::size_t max_label = 0;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (skip_line(raw)) continue;
        std::istringstream fields(raw);
        std::string id_token, label_token, extra;
        if (!(fields >> id_token >> label_token) || (fields >> extra))
            throw ParseError(line_prefix(line_no) + "expected \"vertex_id block_label\"", line_no);
        Vertex v = 0;
        if (vertex_names.empty()) {
            v = parse_number<Vertex>(id_token, line_no);
        } else {
            const auto it = by_name.find(id_token);
            if (it == by_name.end())
                throw ParseError(line_prefix(line_no) + "unknown vertex '" + id_token + "'", line_no);
            v = it->second;
        }
        const auto label = parse_number<std::size_t>(label_token, line_no);
        if (v >= num_vertices)
            throw ParseError(line_prefix(line_no) + "vertex id out of range", line_no);
        if (label == 0 || (num_blocks != 0 && label > num_blocks))
            throw ParseError(line_prefix(line_no) + "block label out of range", line_no);
        if (labels[v] != unset)
            throw ParseError(line_prefix(line_no) + "vertex listed twice", line_no);
        labels[v] = static_cast<Block>(label - 1);
        max_label = std::max(max_label, label);
    }
    for (Vertex v = 0; v < num_vertices; ++v)
        if (labels[v] == unset)
            throw ParseError("vertex " + std::to_string(v) + " has no block label", 0);
    return Partition(num_blocks != 0 ? num_blocks : max_label, std::move(labels));
}

Partition load_partition(const std::filesystem::path& path, std::size_t num_vertices,
                         std::size_t num_blocks, const std::vector<std::string>& vertex_names) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open partition file " + path.string(), 0);
    try {
        return parse_partition(in, num_vertices, num_blocks, vertex_names);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

void write_mapping(const SharedMapping& m, std::ostream& out,
                   const std::vector<std::string>& header) {
    for (const auto& h : header) out << "# " << h << '\n';
    out << "# shared_blocks: " << m.shared << '\n';
    if (m.shared == 0) return;
    for (std::size_t k = 0; k < m.maps.size(); ++k) {
        out << k + 1 << ':';
        for (Block b : m.maps[k]) out << ' ' << b + 1;
        out << '\n';
    }
}

void save_mapping(const SharedMapping& m, const std::filesystem::path& path,
                  const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_mapping(m, out, header);
}

SharedMapping parse_mapping(std::istream& in, std::size_t num_graphs) {
    std::vector<std::vector<Block>> maps(num_graphs);
    std::vector<bool> seen(num_graphs, false);
    std::string raw;
    std::size_t line_no = 0;
    bool any = false;
    while (std::getline(in, raw)) {
        ++line_no;
        if (skip_line(raw)) continue;
        const auto colon = raw.find(':');
        if (colon == std::string::npos)
            throw ParseError(line_prefix(line_no) + "expected \"graph_index: blocks...\"", line_no);
        std::string index_token = raw.substr(0, colon);
        index_token.erase(0, index_token.find_first_not_of(" \t"));
        index_token.erase(index_token.find_last_not_of(" \t") + 1);
        const auto k = parse_number<std::size_t>(index_token, line_no);
        if (k == 0 || k > num_graphs)
            throw ParseError(line_prefix(line_no) + "graph index out of range", line_no);
        if (seen[k - 1]) throw ParseError(line_prefix(line_no) + "graph listed twice", line_no);
        seen[k - 1] = true;
        any = true;
        std::istringstream fields(raw.substr(colon + 1));
        std::string token;
        while (fields >> token) {
            const auto label = parse_number<std::size_t>(token, line_no);
            if (label == 0) throw ParseError(line_prefix(line_no) + "block labels are 1-based", line_no);
            maps[k - 1].push_back(static_cast<Block>(label - 1));
        }
    }
    SharedMapping m;
    m.maps = std::move(maps);
    if (!any) return m;
    m.shared = m.maps.front().size();
    for (std::size_t k = 0; k < num_graphs; ++k)
        if (!seen[k] || m.maps[k].size() != m.shared)
            throw ParseError("mapping must list all graphs with the same number of blocks", 0);
    return m;
}

SharedMapping load_mapping(const std::filesystem::path& path, std::size_t num_graphs) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mapping file " + path.string(), 0);
    try {
        return parse_mapping(in, num_graphs);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

}  // namespace ssbm
