#include "ssbm/likelihood.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ssbm {

namespace {

bool check_directedness(std::span<const BlockCounts> all_counts) {
    if (all_counts.empty()) return true;
    const bool directed = all_counts.front().directed();
    for (const auto& c : all_counts)
        if (c.directed() != directed)
            throw std::invalid_argument("cannot mix directed and undirected graphs");
    return directed;
}

std::vector<std::size_t> block_totals(std::span<const BlockCounts> all_counts) {
    std::vector<std::size_t> out;
    out.reserve(all_counts.size());
    for (const auto& c : all_counts) out.push_back(c.num_blocks());
    return out;
}

std::vector<bool> shared_flags(const SharedMapping& mapping, std::size_t k, std::size_t num_blocks) {
    std::vector<bool> flags(num_blocks, false);
    for (Block b : mapping.maps[k]) flags[b] = true;
    return flags;
}

constexpr std::size_t kXlogxTableSize = std::size_t{1} << 16;

const std::vector<double>& xlogx_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(kXlogxTableSize);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = xlogx(static_cast<double>(i));
        return t;
    }();
    return table;
}

}  // namespace

double xlogx_count(Count x) {
    if (x >= 0 && static_cast<std::size_t>(x) < kXlogxTableSize) {
        static const std::vector<double>& table = xlogx_table();
        return table[static_cast<std::size_t>(x)];
    }
    return xlogx(static_cast<double>(x));
}

double shared_theta(std::span<const std::pair<Count, Count>> counts) {
    Count edges = 0;
    Count total = 0;
    for (const auto& [c, f] : counts) {
        edges += c;
        total += c + f;
    }
    return total == 0 ? 0.0 : static_cast<double>(edges) / static_cast<double>(total);
}

double bernoulli_term(Count edges, Count non_edges, double theta) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    double value = 0.0;
    if (edges > 0) {
        if (theta <= 0.0) return neg_inf;
        value += static_cast<double>(edges) * std::log(theta);
    }
    if (non_edges > 0) {
        if (theta >= 1.0) return neg_inf;
        value += static_cast<double>(non_edges) * std::log1p(-theta);
    }
    return value;
}

ThetaMatrix mle_theta_matrix(const BlockCounts& counts) {
    const auto B = counts.num_blocks();
    ThetaMatrix theta(B);
    for (Block i = 0; i < B; ++i)
        for (Block j = 0; j < B; ++j) theta(i, j) = mle_theta(counts.edges(i, j), counts.non_edges(i, j));
    return theta;
}

std::vector<ThetaMatrix> shared_theta_matrices(std::span<const BlockCounts> all_counts,
                                               const SharedMapping& mapping) {
    mapping.validate(block_totals(all_counts));
    std::vector<ThetaMatrix> thetas;
    for (const auto& c : all_counts) thetas.push_back(mle_theta_matrix(c));
    const std::size_t s = mapping.shared;
    std::vector<std::pair<Count, Count>> pooled(all_counts.size());
    for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = 0; b < s; ++b) {
            for (std::size_t k = 0; k < all_counts.size(); ++k) {
                const Block i = mapping.maps[k][a];
                const Block j = mapping.maps[k][b];
                pooled[k] = {all_counts[k].edges(i, j), all_counts[k].non_edges(i, j)};
            }
            const double theta = shared_theta(pooled);
            for (std::size_t k = 0; k < all_counts.size(); ++k)
                thetas[k](mapping.maps[k][a], mapping.maps[k][b]) = theta;
        }
    }
    return thetas;
}

double log_likelihood(const BlockCounts& counts, const ThetaMatrix& theta) {
    if (theta.num_blocks != counts.num_blocks())
        throw std::invalid_argument("theta matrix shape does not match block counts");
    CompensatedSum total;
    const auto B = counts.num_blocks();
    for (Block i = 0; i < B; ++i) {
        for (Block j = counts.directed() ? 0 : i; j < B; ++j) {
            const double term = bernoulli_term(counts.edges(i, j), counts.non_edges(i, j), theta(i, j));
            if (std::isinf(term)) return term;
            total += term;
        }
    }
    return total.value();
}

double mle_log_likelihood(const BlockCounts& counts) {
    CompensatedSum total;
    const auto B = counts.num_blocks();
    for (Block i = 0; i < B; ++i)
        for (Block j = counts.directed() ? 0 : i; j < B; ++j)
            total += mle_term(counts.edges(i, j), counts.non_edges(i, j));
    return total.value();
}

double shared_log_likelihood(std::span<const BlockCounts> all_counts, const SharedMapping& mapping) {
    const bool directed = check_directedness(all_counts);
    mapping.validate(block_totals(all_counts));
    CompensatedSum total;
    for (std::size_t k = 0; k < all_counts.size(); ++k) {
        const auto& c = all_counts[k];
        const auto shared = shared_flags(mapping, k, c.num_blocks());
        for (Block i = 0; i < c.num_blocks(); ++i)
            for (Block j = directed ? 0 : i; j < c.num_blocks(); ++j)
                if (!(shared[i] && shared[j])) total += mle_term(c.edges(i, j), c.non_edges(i, j));
    }
    const std::size_t s = mapping.shared;
    for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = directed ? 0 : a; b < s; ++b) {
            Count edges = 0;
            Count dyads = 0;
            for (std::size_t k = 0; k < all_counts.size(); ++k) {
                const Block i = mapping.maps[k][a];
                const Block j = mapping.maps[k][b];
                edges += all_counts[k].edges(i, j);
                dyads += all_counts[k].dyads(i, j);
            }
            total += mle_term(edges, dyads - edges);
        }
    }
    return total.value();
}

ModelScore bic(std::span<const BlockCounts> all_counts, const SharedMapping& mapping, bool directed) {
    ModelScore score;
    score.log_likelihood = shared_log_likelihood(all_counts, mapping);
    for (const auto& c : all_counts) {
        score.num_parameters += theta_parameter_count(c.num_blocks(), directed);
        const Count n = c.num_vertices();
        score.num_dyads += dyad_count(n, n, true, directed);
    }
    if (!all_counts.empty())
        score.num_parameters -= static_cast<Count>(all_counts.size() - 1) *
                                theta_parameter_count(mapping.shared, directed);
    const double log_dyads = score.num_dyads > 0 ? std::log(static_cast<double>(score.num_dyads)) : 0.0;
    score.bic = static_cast<double>(score.num_parameters) * log_dyads - 2.0 * score.log_likelihood;
    return score;
}

JointState::JointState(std::vector<const Graph*> graphs, std::vector<Partition> partitions,
                       SharedMapping mapping)
    : graphs_(std::move(graphs)), partitions_(std::move(partitions)), mapping_(std::move(mapping)) {
    if (graphs_.size() != partitions_.size())
        throw std::invalid_argument("need one partition per graph");
    if (mapping_.maps.empty() && mapping_.shared == 0) mapping_ = SharedMapping::none(graphs_.size());
    counts_.reserve(graphs_.size());
    for (std::size_t k = 0; k < graphs_.size(); ++k)
        counts_.push_back(compute_block_counts(*graphs_[k], partitions_[k]));
    check_directedness(counts_);
    mapping_.validate(block_totals(counts_));
    shared_index_.resize(graphs_.size());
    for (std::size_t k = 0; k < graphs_.size(); ++k) {
        shared_index_[k].assign(partitions_[k].num_blocks, kNotShared);
        for (std::size_t l = 0; l < mapping_.shared; ++l)
            shared_index_[k][mapping_.maps[k][l]] = static_cast<Block>(l);
    }
}

double JointState::log_likelihood() const { return shared_log_likelihood(counts_, mapping_); }

double JointState::graph_log_likelihood(std::size_t k) const { return mle_log_likelihood(counts_[k]); }

double JointState::pair_term(std::size_t k, Block i, Block j, Count edges, Count dyads) const {
    const Block a = shared_index_[k][i];
    const Block b = shared_index_[k][j];
    if (a == kNotShared || b == kNotShared) return mle_term(edges, dyads - edges);
    for (std::size_t l = 0; l < counts_.size(); ++l) {
        if (l == k) continue;
        const Block il = mapping_.maps[l][a];
        const Block jl = mapping_.maps[l][b];
        edges += counts_[l].edges(il, jl);
        dyads += counts_[l].dyads(il, jl);
    }
    return mle_term(edges, dyads - edges);
}

double JointState::delta_move(std::size_t k, Vertex v, Block to, const NeighborTally& tally) const {
    const Block from = partitions_[k].assignment[v];
    if (from == to) return 0.0;
    const auto& c = counts_[k];
    const bool directed = c.directed();
    const std::size_t B = c.num_blocks();
    auto size_after = [&](Block x) {
        return c.block_size(x) - (x == from ? 1 : 0) + (x == to ? 1 : 0);
    };
    double delta = 0.0;
    auto visit = [&](Block i, Block j) {
        const double after = pair_term(k, i, j, c.edges_after_move(i, j, from, to, tally),
                                       dyad_count(size_after(i), size_after(j), i == j, directed));
        const double before = pair_term(k, i, j, c.edges(i, j), c.dyads(i, j));
        delta += after - before;
    };
    for (Block x = 0; x < B; ++x) {
        visit(from, x);
        if (directed || x != from) visit(to, x);
        if (directed && x != from && x != to) {
            visit(x, from);
            visit(x, to);
        }
    }
    return delta;
}

double JointState::delta_move(std::size_t k, Vertex v, Block to) const {
    NeighborTally tally;
    tally_neighbors(*graphs_[k], partitions_[k], v, tally);
    return delta_move(k, v, to, tally);
}

void JointState::apply_move(std::size_t k, Vertex v, Block to, const NeighborTally& tally) {
    move_vertex(*graphs_[k], partitions_[k], counts_[k], v, to, tally);
}

void JointState::apply_move(std::size_t k, Vertex v, Block to) {
    move_vertex(*graphs_[k], partitions_[k], counts_[k], v, to);
}

void JointState::set_partition(std::size_t k, Partition p) {
    if (p.num_blocks != partitions_[k].num_blocks)
        throw std::invalid_argument("replacement partition has a different block count");
    counts_[k] = compute_block_counts(*graphs_[k], p);
    partitions_[k] = std::move(p);
}

}  // namespace ssbm
