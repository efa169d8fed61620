#include "ssbm/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace ssbm {

namespace {

void build_csr(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& arcs,
               std::vector<std::size_t>& offsets, std::vector<Vertex>& targets) {
    offsets.assign(n + 1, 0);
    for (const auto& [u, v] : arcs) ++offsets[u + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    targets.resize(arcs.size());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [u, v] : arcs) targets[cursor[u]++] = v;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

Graph Graph::from_edges(std::size_t num_vertices,
                        std::vector<std::pair<Vertex, Vertex>> edges, bool directed) {
    for (auto& [u, v] : edges) {
        if (u >= num_vertices || v >= num_vertices)
            throw std::invalid_argument("edge endpoint out of range: " + std::to_string(u) +
                                        " " + std::to_string(v));
        if (u == v)
            throw std::invalid_argument("self-loop on vertex " + std::to_string(u));
        if (!directed && u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Graph g;
    g.directed_ = directed;
    g.num_vertices_ = num_vertices;
    g.num_edges_ = edges.size();
    if (directed) {
        build_csr(num_vertices, edges, g.out_offsets_, g.out_targets_);
        std::vector<std::pair<Vertex, Vertex>> reversed;
        reversed.reserve(edges.size());
        for (const auto& [u, v] : edges) reversed.emplace_back(v, u);
        std::sort(reversed.begin(), reversed.end());
        build_csr(num_vertices, reversed, g.in_offsets_, g.in_targets_);
    } else {
        std::vector<std::pair<Vertex, Vertex>> arcs;
        arcs.reserve(2 * edges.size());
        for (const auto& [u, v] : edges) {
            arcs.emplace_back(u, v);
            arcs.emplace_back(v, u);
        }
        std::sort(arcs.begin(), arcs.end());
        build_csr(num_vertices, arcs, g.out_offsets_, g.out_targets_);
    }
    return g;
}

bool Graph::has_edge(Vertex u, Vertex v) const {
    const auto nb = out_neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<Vertex, Vertex>> Graph::edges() const {
    std::vector<std::pair<Vertex, Vertex>> result;
    result.reserve(num_edges_);
    for (Vertex u = 0; u < num_vertices_; ++u)
        for (Vertex v : out_neighbors(u))
            if (directed_ || u < v) result.emplace_back(u, v);
    return result;
}

void Graph::set_vertex_names(std::vector<std::string> names) {
    if (!names.empty() && names.size() != num_vertices_)
        throw std::invalid_argument("vertex name count does not match vertex count");
    names_ = std::move(names);
}

Graph parse_edge_list(std::istream& in, const EdgeListOptions& options) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    std::unordered_map<std::string, Vertex> ids;
    std::vector<std::string> names;
    std::size_t max_id_plus_one = 0;

    auto intern = [&](std::string_view token, std::size_t line_no) -> Vertex {
        if (options.remap_ids) {
            auto [it, inserted] = ids.try_emplace(std::string(token), static_cast<Vertex>(names.size()));
            if (inserted) names.emplace_back(token);
            return it->second;
        }
        Vertex id = 0;
        const auto* end = token.data() + token.size();
        const auto [ptr, ec] = std::from_chars(token.data(), end, id);
        if (ec != std::errc() || ptr != end)
            throw ParseError("line " + std::to_string(line_no) + ": invalid vertex id '" +
                                 std::string(token) + "'",
                             line_no);
        return id;
    };

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            constexpr std::string_view key = "# vertex_count:";
            if (!options.remap_ids && line.substr(0, key.size()) == key) {
                const auto value = trim(line.substr(key.size()));
                std::size_t declared = 0;
                const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), declared);
                if (ec != std::errc() || ptr != value.data() + value.size())
                    throw ParseError("line " + std::to_string(line_no) + ": invalid vertex count", line_no);
                max_id_plus_one = std::max(max_id_plus_one, declared);
            }
            continue;
        }
        std::istringstream fields{std::string(line)};
        std::string a, b, extra;
        if (!(fields >> a >> b) || (fields >> extra))
            throw ParseError("line " + std::to_string(line_no) + ": expected \"u v\"", line_no);
        const Vertex u = intern(a, line_no);
        const Vertex v = intern(b, line_no);
        if (u == v)
            throw ParseError("line " + std::to_string(line_no) + ": self-loop on vertex " + a +
                                 " is not allowed",
                             line_no);
        max_id_plus_one = std::max<std::size_t>(max_id_plus_one, std::max(u, v) + std::size_t{1});
        edges.emplace_back(u, v);
    }

    std::size_t n = options.remap_ids ? names.size() : max_id_plus_one;
    if (options.num_vertices) {
        if (*options.num_vertices < n)
            throw ParseError("vertex count override " + std::to_string(*options.num_vertices) +
                                 " is smaller than the " + std::to_string(n) + " vertices seen",
                             0);
        n = *options.num_vertices;
        if (options.remap_ids)
            while (names.size() < n) names.push_back("__isolated_" + std::to_string(names.size()));
    }
    Graph g = Graph::from_edges(n, std::move(edges), options.directed);
    if (options.remap_ids) g.set_vertex_names(std::move(names));
    return g;
}

Graph load_edge_list(const std::filesystem::path& path, const EdgeListOptions& options) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open edge list " + path.string(), 0);
    try {
        return parse_edge_list(in, options);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

void write_edge_list(const Graph& g, std::ostream& out, const std::vector<std::string>& header) {
    for (const auto& h : header) out << "# " << h << '\n';
    const auto& names = g.vertex_names();
    if (names.empty()) out << "# vertex_count: " << g.num_vertices() << '\n';
    for (const auto& [u, v] : g.edges()) {
        if (names.empty())
            out << u << ' ' << v << '\n';
        else
            out << names[u] << ' ' << names[v] << '\n';
    }
}

void save_edge_list(const Graph& g, const std::filesystem::path& path,
                    const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_edge_list(g, out, header);
}

}  // namespace ssbm
