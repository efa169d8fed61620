#include "ssbm/synth.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

namespace ssbm {

namespace {

using Rng = std::mt19937_64;

double sample_beta(double a, double b, Rng& rng) {
    const double x = std::gamma_distribution<double>(a, 1.0)(rng);
    const double y = std::gamma_distribution<double>(b, 1.0)(rng);
    const double sum = x + y;
    return sum > 0.0 ? x / sum : 0.5;
}

ThetaMatrix sample_theta(std::size_t B, const PlantedParams& params, Rng& rng) {
    ThetaMatrix theta(B);
    for (Block i = 0; i < B; ++i) {
        for (Block j = params.directed ? 0 : i; j < B; ++j) {
            const double t = params.fixed_theta ? *params.fixed_theta
                                                : sample_beta(params.alpha, params.beta, rng);
            theta(i, j) = t;
            if (!params.directed) theta(j, i) = t;
        }
    }
    return theta;
}

std::vector<Block> sample_labels(std::size_t N, std::size_t B, bool balanced, Rng& rng) {
    std::vector<Block> labels(N);
    if (balanced) {
        for (std::size_t v = 0; v < N; ++v) labels[v] = static_cast<Block>(v % B);
        std::shuffle(labels.begin(), labels.end(), rng);
    } else {
        std::uniform_int_distribution<Block> pick(0, static_cast<Block>(B - 1));
        for (auto& b : labels) b = pick(rng);
    }
    return labels;
}

}  // namespace

PlantedParams PlantedParams::uniform(std::size_t n, std::size_t vertices, std::size_t blocks,
                                     std::size_t shared, std::uint64_t seed) {
    PlantedParams p;
    p.num_vertices.assign(n, vertices);
    p.num_blocks.assign(n, blocks);
    p.shared = shared;
    p.seed = seed;
    return p;
}

void PlantedParams::validate() const {
    if (num_vertices.empty()) throw std::invalid_argument("need at least one graph");
    if (num_vertices.size() != num_blocks.size())
        throw std::invalid_argument("need one block count per graph");
    for (std::size_t k = 0; k < num_vertices.size(); ++k) {
        if (num_blocks[k] == 0) throw std::invalid_argument("block counts must be positive");
        if (num_vertices[k] < num_blocks[k])
            throw std::invalid_argument("graph " + std::to_string(k + 1) + " has fewer vertices than blocks");
        if (shared > num_blocks[k])
            throw std::invalid_argument("shared block count exceeds the block count of graph " +
                                        std::to_string(k + 1));
    }
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("Beta parameters must be positive");
    if (fixed_theta && !(*fixed_theta >= 0.0 && *fixed_theta <= 1.0))
        throw std::invalid_argument("fixed theta must lie in [0, 1]");
}

PlantedInstance generate(const PlantedParams& params) {
    params.validate();
    Rng rng(params.seed);
    const std::size_t n = params.num_graphs();
    const std::size_t s = params.shared;

    PlantedInstance inst;
    inst.params = params;
    inst.true_mapping = SharedMapping::identity_prefix(n, s);
    const ThetaMatrix shared_theta = sample_theta(s, params, rng);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t N = params.num_vertices[k];
        const std::size_t B = params.num_blocks[k];
        ThetaMatrix theta = sample_theta(B, params, rng);
        for (Block i = 0; i < s; ++i)
            for (Block j = 0; j < s; ++j) theta(i, j) = shared_theta(i, j);

        Partition truth(B, sample_labels(N, B, params.balanced, rng));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<std::pair<Vertex, Vertex>> edges;
        for (Vertex u = 0; u < N; ++u) {
            for (Vertex v = params.directed ? 0 : u + 1; v < N; ++v) {
                if (u == v) continue;
                if (unit(rng) < theta(truth[u], truth[v])) edges.emplace_back(u, v);
            }
        }
        inst.graphs.push_back(Graph::from_edges(N, std::move(edges), params.directed));
        inst.true_partitions.push_back(std::move(truth));
        inst.true_thetas.push_back(std::move(theta));
    }
    return inst;
}

Partition add_noise(const Partition& p, double noise, std::uint64_t seed) {
    if (!(noise >= 0.0 && noise <= 1.0)) throw std::invalid_argument("noise must lie in [0, 1]");
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<Block> pick(0, static_cast<Block>(p.num_blocks - 1));
    auto labels = p.assignment;
    for (auto& b : labels)
        if (unit(rng) < noise) b = pick(rng);
    return Partition(p.num_blocks, std::move(labels));
}

void save_instance(const PlantedInstance& inst, const std::filesystem::path& dir,
                   const std::vector<std::string>& header) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < inst.graphs.size(); ++k) {
        const auto idx = std::to_string(k + 1);
        save_edge_list(inst.graphs[k], dir / ("graph_" + idx + ".txt"), header);
        save_partition(inst.true_partitions[k], dir / ("truth_" + idx + ".txt"), header);
    }
    save_mapping(inst.true_mapping, dir / "mapping.txt", header);

    std::ofstream out(dir / "manifest.txt");
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.txt").string());
    for (const auto& line : header) out << "# " << line << '\n';
    const auto& p = inst.params;
    out << "graphs=" << p.num_graphs() << '\n';
    out << "directed=" << (p.directed ? "true" : "false") << '\n';
    out << "shared=" << p.shared << '\n';
    out << "alpha=" << p.alpha << '\n';
    out << "beta=" << p.beta << '\n';
    out << "balanced=" << (p.balanced ? "true" : "false") << '\n';
    out << "seed=" << p.seed << '\n';
    for (std::size_t k = 0; k < p.num_graphs(); ++k) {
        out << "graph_" << k + 1 << "_vertices=" << p.num_vertices[k] << '\n';
        out << "graph_" << k + 1 << "_blocks=" << p.num_blocks[k] << '\n';
        out << "graph_" << k + 1 << "_edges=" << inst.graphs[k].num_edges() << '\n';
    }
}

}  // namespace ssbm
