#include "ssbm/fit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ssbm/select.hpp"

namespace ssbm {

namespace {

using Clock = std::chrono::steady_clock;

/// Greedy moves must improve by more than this.
constexpr double kGreedyThreshold = 1e-9;
constexpr std::size_t kMaxGreedyPasses = 10;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Samples a block for a vertex with the given tally.
Block sample_block(const Graph& g, const Partition& p, const BlockCounts& counts, Vertex v,
                   const NeighborTally& tally, double epsilon, Rng& rng) {
    const std::size_t B = p.num_blocks;
    if (tally.degree == 0) return static_cast<Block>(uniform_index(rng, B));
    const auto out = g.out_neighbors(v);
    const std::size_t pick = uniform_index(rng, static_cast<std::size_t>(tally.degree));
    const Vertex u = pick < out.size() ? out[pick] : g.in_neighbors(v)[pick - out.size()];
    const Block t = p.assignment[u];
    const auto e_t = static_cast<double>(counts.block_degree(t));
    const double eps_mass = epsilon * static_cast<double>(B);
    if (uniform01(rng) * (e_t + eps_mass) < eps_mass) return static_cast<Block>(uniform_index(rng, B));
    // Pick r with probability e_{t,r} / e_t.
    Count target = static_cast<Count>(uniform_index(rng, static_cast<std::size_t>(counts.block_degree(t))));
    for (Block r = 0; r < B; ++r) {
        target -= block_edge_weight(counts, t, r);
        if (target < 0) return r;
    }
    return static_cast<Block>(B - 1);
}

void check_blocks(std::span<const Graph> graphs, std::span<const std::size_t> num_blocks, std::size_t s) {
    if (graphs.empty()) throw std::invalid_argument("no graphs given");
    if (num_blocks.size() != graphs.size())
        throw std::invalid_argument("need one block count per graph");
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        if (num_blocks[k] == 0) throw std::invalid_argument("block counts must be positive");
        if (graphs[k].directed() != graphs.front().directed())
            throw std::invalid_argument("cannot mix directed and undirected graphs");
        if (s > num_blocks[k])
            throw InfeasibleError("cannot share " + std::to_string(s) + " blocks: graph " +
                                  std::to_string(k + 1) + " has " + std::to_string(num_blocks[k]));
    }
}

/// One Metropolis-Hastings sweep over the given visit order.
void mh_sweep(JointState& state, std::span<const std::pair<std::size_t, Vertex>> order, double beta,
              double epsilon, Rng& rng, NeighborTally& tally) {
    for (const auto& [k, v] : order) {
        const auto& g = state.graph(k);
        const auto prop = propose_move(g, state.partition(k), state.counts(k), v, epsilon, rng, tally);
        if (prop.to == state.partition(k)[v]) continue;
        const double delta = state.delta_move(k, v, prop.to, tally);
        const double a = accept_probability(delta, beta, prop.forward, prop.reverse);
        if (a >= 1.0 || (a > 0.0 && uniform01(rng) < a)) state.apply_move(k, v, prop.to, tally);
    }
}

bool greedy_pass(JointState& state, std::span<const std::pair<std::size_t, Vertex>> order,
                 NeighborTally& tally) {
    bool improved = false;
    for (const auto& [k, v] : order) {
        const auto& p = state.partition(k);
        tally_neighbors(state.graph(k), p, v, tally);
        const Block from = p[v];
        Block best = from;
        double best_delta = kGreedyThreshold;
        for (Block t = 0; t < p.num_blocks; ++t) {
            if (t == from) continue;
            const double d = state.delta_move(k, v, t, tally);
            if (d > best_delta) {
                best_delta = d;
                best = t;
            }
        }
        if (best != from) {
            state.apply_move(k, v, best, tally);
            improved = true;
        }
    }
    return improved;
}

std::vector<const Graph*> graph_pointers(std::span<const Graph> graphs) {
    std::vector<const Graph*> out;
    for (const auto& g : graphs) out.push_back(&g);
    return out;
}

FitResult summarize(std::span<const Graph> graphs, std::vector<Partition> partitions,
                    SharedMapping mapping, std::string algorithm, std::uint64_t seed) {
    FitResult result;
    std::vector<BlockCounts> counts;
    for (std::size_t k = 0; k < graphs.size(); ++k)
        counts.push_back(compute_block_counts(graphs[k], partitions[k]));
    result.score = bic(counts, mapping, graphs.front().directed());
    result.log_likelihood = result.score.log_likelihood;
    result.partitions = std::move(partitions);
    result.mapping = std::move(mapping);
    result.algorithm = std::move(algorithm);
    result.seed = seed;
    return result;
}

/// Change in single-graph log-likelihood from merging block `from` into
/// block `into`, given per-block sums of the pair terms touching each block.
double merge_delta(const BlockCounts& c, std::span<const double> touching, Block from, Block into) {
    const bool directed = c.directed();
    const std::size_t B = c.num_blocks();
    auto term = [&](Block i, Block j) { return mle_term(c.edges(i, j), c.non_edges(i, j)); };
    double before = touching[from] + touching[into] - term(from, into);
    if (directed) before -= term(into, from);

    const Count n = c.block_size(from) + c.block_size(into);
    double after = 0.0;
    for (Block x = 0; x < B; ++x) {
        if (x == from || x == into) continue;
        const Count nx = c.block_size(x);
        if (nx == 0) continue;
        const Count e_out = c.edges(into, x) + c.edges(from, x);
        after += mle_term(e_out, n * nx - e_out);
        if (directed) {
            const Count e_in = c.edges(x, into) + c.edges(x, from);
            after += mle_term(e_in, n * nx - e_in);
        }
    }
    Count e_diag = c.edges(into, into) + c.edges(from, from) + c.edges(from, into);
    if (directed) e_diag += c.edges(into, from);
    after += mle_term(e_diag, dyad_count(n, n, true, directed) - e_diag);
    return after - before;
}

std::vector<double> touching_terms(const BlockCounts& c) {
    const std::size_t B = c.num_blocks();
    std::vector<double> out(B, 0.0);
    for (Block i = 0; i < B; ++i) {
        for (Block j = c.directed() ? 0 : i; j < B; ++j) {
            const double t = mle_term(c.edges(i, j), c.non_edges(i, j));
            out[i] += t;
            if (j != i) out[j] += t;
        }
    }
    return out;
}

struct MergeCandidate {
    double loss;
    Block from;
    Block into;
};

}  // namespace

double BetaSchedule::at(std::size_t sweep, std::size_t total_sweeps) const {
    const auto ramp = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(ramp_fraction * static_cast<double>(total_sweeps))));
    if (ramp <= 1 || sweep + 1 >= ramp) return sweep + 1 >= ramp ? final : initial;
    const double frac = static_cast<double>(sweep) / static_cast<double>(ramp - 1);
    return initial * std::pow(final / initial, frac);
}

void McmcConfig::validate() const {
    if (sweeps < 1) throw std::invalid_argument("sweeps must be at least 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(beta.initial >= 0.0) || !(beta.final >= beta.initial))
        throw std::invalid_argument("beta schedule must be non-decreasing and non-negative");
    if (beta.initial == 0.0 && beta.final > 0.0)
        throw std::invalid_argument("geometric beta schedule needs a positive initial beta");
    if (!(beta.ramp_fraction > 0.0 && beta.ramp_fraction <= 1.0))
        throw std::invalid_argument("beta ramp fraction must lie in (0, 1]");
}

Count block_edge_weight(const BlockCounts& counts, Block x, Block y) {
    if (x == y) return 2 * counts.edges(x, x);
    if (counts.directed()) return counts.edges(x, y) + counts.edges(y, x);
    return counts.edges(x, y);
}

double proposal_probability(const BlockCounts& counts, const NeighborTally& tally, Block target,
                            double epsilon) {
    const auto B = static_cast<double>(counts.num_blocks());
    if (tally.degree == 0) return 1.0 / B;
    double prob = 0.0;
    for (Block x : tally.touched) {
        const auto k_x = static_cast<double>(tally.out[x] + (counts.directed() ? tally.in[x] : 0));
        const auto e_xr = static_cast<double>(block_edge_weight(counts, x, target));
        const auto e_x = static_cast<double>(counts.block_degree(x));
        prob += k_x * (e_xr + epsilon) / (e_x + epsilon * B);
    }
    return prob / static_cast<double>(tally.degree);
}

double proposal_probability_after_move(const BlockCounts& counts, const NeighborTally& tally,
                                       Block from, Block to, Block target, double epsilon) {
    const auto B = static_cast<double>(counts.num_blocks());
    if (tally.degree == 0) return 1.0 / B;
    if (from == to) return proposal_probability(counts, tally, target, epsilon);
    auto weight_after = [&](Block x, Block y) -> Count {
        if (x == y) return 2 * counts.edges_after_move(x, x, from, to, tally);
        if (counts.directed())
            return counts.edges_after_move(x, y, from, to, tally) +
                   counts.edges_after_move(y, x, from, to, tally);
        return counts.edges_after_move(x, y, from, to, tally);
    };
    double prob = 0.0;
    for (Block x : tally.touched) {
        const auto k_x = static_cast<double>(tally.out[x] + (counts.directed() ? tally.in[x] : 0));
        const auto e_xr = static_cast<double>(weight_after(x, target));
        Count e_x = counts.block_degree(x);
        if (x == from) e_x -= tally.degree;
        if (x == to) e_x += tally.degree;
        prob += k_x * (e_xr + epsilon) / (static_cast<double>(e_x) + epsilon * B);
    }
    return prob / static_cast<double>(tally.degree);
}

Proposal propose_move(const Graph& g, const Partition& p, const BlockCounts& counts, Vertex v,
                      double epsilon, Rng& rng, NeighborTally& tally) {
    tally_neighbors(g, p, v, tally);
    Proposal prop;
    prop.to = sample_block(g, p, counts, v, tally, epsilon, rng);
    const Block from = p[v];
    prop.forward = proposal_probability(counts, tally, prop.to, epsilon);
    prop.reverse = prop.to == from
                       ? prop.forward
                       : proposal_probability_after_move(counts, tally, from, prop.to, from, epsilon);
    return prop;
}

double accept_probability(double delta_llh, double beta, double forward, double reverse) {
    if (std::isinf(delta_llh) && delta_llh < 0) return 0.0;
    if (!(forward > 0.0)) throw std::invalid_argument("forward proposal probability must be positive");
    if (reverse <= 0.0) return 0.0;
    const double log_a = beta * delta_llh + std::log(reverse) - std::log(forward);
    if (log_a >= 0.0) return 1.0;
    return std::exp(log_a);
}

FitResult mcmc_fit(std::span<const Graph> graphs, std::span<const std::size_t> num_blocks,
                   std::size_t s, const McmcConfig& config,
                   std::optional<std::vector<Partition>> initial) {
    const auto start = Clock::now();
    config.validate();
    check_blocks(graphs, num_blocks, s);
    if (config.mode == McmcMode::single && s != 0)
        throw std::invalid_argument("single mode fits no shared blocks");
    const std::size_t n = graphs.size();

    Rng rng(config.seed);
    std::vector<Partition> partitions;
    if (initial) {
        if (initial->size() != n) throw std::invalid_argument("need one initial partition per graph");
        for (std::size_t k = 0; k < n; ++k)
            if ((*initial)[k].num_blocks != num_blocks[k] ||
                (*initial)[k].num_vertices() != graphs[k].num_vertices())
                throw std::invalid_argument("initial partition does not match graph " +
                                            std::to_string(k + 1));
        partitions = std::move(*initial);
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<Block> labels(graphs[k].num_vertices());
            for (auto& b : labels) b = static_cast<Block>(uniform_index(rng, num_blocks[k]));
            partitions.emplace_back(num_blocks[k], std::move(labels));
        }
    }

    JointState state(graph_pointers(graphs), partitions, SharedMapping::identity_prefix(n, s));
    std::vector<std::pair<std::size_t, Vertex>> order;
    for (std::size_t k = 0; k < n; ++k)
        for (Vertex v = 0; v < graphs[k].num_vertices(); ++v) order.emplace_back(k, v);

    // Without sharing the objective separates, so each graph keeps its own best.
    const bool per_graph = s == 0;
    std::vector<Partition> best = partitions;
    std::vector<double> best_graph(n, 0.0);
    double best_total = 0.0;
    auto current_total = [&] {
        if (!per_graph) return state.log_likelihood();
        CompensatedSum sum;
        for (std::size_t k = 0; k < n; ++k) sum += state.graph_log_likelihood(k);
        return sum.value();
    };
    auto update_best = [&](double total) {
        if (per_graph) {
            CompensatedSum sum;
            for (std::size_t k = 0; k < n; ++k) {
                const double llh = state.graph_log_likelihood(k);
                if (llh > best_graph[k]) {
                    best_graph[k] = llh;
                    best[k] = state.partition(k);
                }
                sum += best_graph[k];
            }
            best_total = sum.value();
        } else if (total > best_total) {
            best_total = total;
            best = state.partitions();
        }
    };
    for (std::size_t k = 0; k < n; ++k) best_graph[k] = state.graph_log_likelihood(k);
    best_total = current_total();

    FitResult result;
    NeighborTally tally;
    for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
        const double beta = config.beta.at(sweep, config.sweeps);
        std::shuffle(order.begin(), order.end(), rng);
        mh_sweep(state, order, beta, config.epsilon, rng, tally);
        const double total = current_total();
        update_best(total);
        if (config.verify_counts) {
            for (std::size_t k = 0; k < n; ++k)
                if (!(compute_block_counts(graphs[k], state.partition(k)) == state.counts(k)))
                    throw std::logic_error("block counts diverged from partition");
        }
        if (config.record_trace) result.trace.push_back({sweep + 1, beta, total, best_total});
    }

    for (std::size_t k = 0; k < n; ++k)
        if (!(best[k] == state.partition(k))) state.set_partition(k, best[k]);
    if (config.greedy_finish) {
        for (std::size_t pass = 0; pass < kMaxGreedyPasses; ++pass)
            if (!greedy_pass(state, order, tally)) break;
    }

    auto summary = summarize(graphs, state.partitions(), state.mapping(),
                             config.mode == McmcMode::single ? "single" : "shared", config.seed);
    summary.trace = std::move(result.trace);
    summary.runtime_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return summary;
}

Partition multilevel_init(const Graph& g, std::size_t target_blocks, const MultilevelConfig& config) {
    const std::size_t N = g.num_vertices();
    if (target_blocks > N)
        throw std::invalid_argument("target block count " + std::to_string(target_blocks) +
                                    " exceeds vertex count " + std::to_string(N));
    if (target_blocks == 0) throw std::invalid_argument("target block count must be positive");
    if (!(config.merge_factor > 1.0)) throw std::invalid_argument("merge factor must exceed 1");

    std::vector<Block> labels(N);
    std::iota(labels.begin(), labels.end(), Block{0});
    if (target_blocks == N) return Partition(N, std::move(labels));

    Rng rng(config.seed);
    std::size_t B = N;
    BlockCounts counts = compute_block_counts(g, Partition(B, labels));
    NeighborTally tally;

    while (B > target_blocks) {
        std::size_t next_B = static_cast<std::size_t>(std::ceil(static_cast<double>(B) / config.merge_factor));
        next_B = std::clamp(next_B, target_blocks, B - 1);

        std::vector<Block> parent(B);
        std::iota(parent.begin(), parent.end(), Block{0});
        auto find = [&](Block x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        if (B <= config.exhaustive_merge_blocks) {
            // Every pair is scored and one merge is applied at a time.
            std::vector<bool> alive(B, true);
            for (std::size_t live = B; live > next_B; --live) {
                const auto touching = touching_terms(counts);
                MergeCandidate best{std::numeric_limits<double>::infinity(), 0, 0};
                for (Block r = 0; r < B; ++r) {
                    if (!alive[r]) continue;
                    for (Block t = 0; t < B; ++t) {
                        if (t == r || !alive[t]) continue;
                        const double loss = -merge_delta(counts, touching, r, t);
                        if (loss < best.loss) best = {loss, r, t};
                    }
                }
                counts = merge_blocks(counts, best.from, best.into);
                parent[best.from] = best.into;
                alive[best.from] = false;
            }
        } else {
            Partition current(B, labels);
            std::vector<std::vector<Vertex>> members(B);
            for (Vertex v = 0; v < N; ++v) members[labels[v]].push_back(v);
            const auto touching = touching_terms(counts);

            std::vector<MergeCandidate> candidates;
            std::vector<Block> tried;
            for (Block r = 0; r < B; ++r) {
                tried.clear();
                MergeCandidate best{std::numeric_limits<double>::infinity(), r, r};
                auto consider = [&](Block t) {
                    if (t == r || std::find(tried.begin(), tried.end(), t) != tried.end()) return;
                    tried.push_back(t);
                    const double loss = -merge_delta(counts, touching, r, t);
                    if (loss < best.loss || (loss == best.loss && t < best.into)) best = {loss, r, t};
                };
                for (std::size_t c = 0; c < config.merge_candidates; ++c) {
                    if (members[r].empty()) {
                        consider(static_cast<Block>(uniform_index(rng, B)));
                        continue;
                    }
                    const Vertex v = members[r][uniform_index(rng, members[r].size())];
                    tally_neighbors(g, current, v, tally);
                    consider(sample_block(g, current, counts, v, tally, config.epsilon, rng));
                }
                if (tried.empty())
                    consider(static_cast<Block>((r + 1 + uniform_index(rng, B - 1)) % B));
                candidates.push_back(best);
            }
            std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
                if (a.loss != b.loss) return a.loss < b.loss;
                if (a.from != b.from) return a.from < b.from;
                return a.into < b.into;
            });

            std::vector<bool> merged_away(B, false);
            std::size_t merges = 0;
            for (const auto& cand : candidates) {
                if (merges == B - next_B) break;
                if (merged_away[cand.from]) continue;
                const Block root = find(cand.into);
                if (root == cand.from) continue;
                parent[cand.from] = root;
                merged_away[cand.from] = true;
                ++merges;
            }
        }

        std::vector<Block> compact(B, 0);
        std::size_t new_B = 0;
        for (Block b = 0; b < B; ++b)
            if (find(b) == b) compact[b] = static_cast<Block>(new_B++);
        for (auto& b : labels) b = compact[find(b)];
        B = new_B;

        JointState state({&g}, {Partition(B, labels)}, SharedMapping::none(1));
        std::vector<std::pair<std::size_t, Vertex>> order;
        for (Vertex v = 0; v < N; ++v) order.emplace_back(0, v);
        for (std::size_t sweep = 0; sweep < config.resettle_sweeps; ++sweep) {
            std::shuffle(order.begin(), order.end(), rng);
            mh_sweep(state, order, config.resettle_beta, config.epsilon, rng, tally);
        }
        labels = state.partition(0).assignment;
        counts = state.counts(0);
    }
    return Partition(B, std::move(labels));
}

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::single: return "single";
        case Strategy::multilevel: return "multilevel";
        case Strategy::ml_single: return "ml_single";
        case Strategy::shared: return "shared";
        case Strategy::ml_shared: return "ml_shared";
    }
    return "unknown";
}

Strategy parse_strategy(const std::string& name) {
    for (auto s : {Strategy::single, Strategy::multilevel, Strategy::ml_single, Strategy::shared,
                   Strategy::ml_shared})
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

bool strategy_shares(Strategy s) { return s == Strategy::shared || s == Strategy::ml_shared; }

std::vector<Partition> multilevel_partitions(std::span<const Graph> graphs,
                                             std::span<const std::size_t> num_blocks,
                                             const PipelineConfig& config) {
    check_blocks(graphs, num_blocks, 0);
    std::vector<Partition> out;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        MultilevelConfig ml = config.multilevel;
        ml.seed = mix_seed(config.mcmc.seed, k);
        out.push_back(multilevel_init(graphs[k], num_blocks[k], ml));
    }
    return out;
}

FitResult refine_shared(std::span<const Graph> graphs, std::vector<Partition> partitions,
                        std::size_t s, const PipelineConfig& config) {
    std::vector<BlockCounts> counts;
    std::vector<std::size_t> num_blocks;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        counts.push_back(compute_block_counts(graphs[k], partitions[k]));
        num_blocks.push_back(partitions[k].num_blocks);
    }
    const auto selection = select_exact(counts, s);
    auto relabeled = relabel_shared_first(partitions, selection.mapping);
    McmcConfig mcmc = config.mcmc;
    mcmc.mode = McmcMode::shared;
    return mcmc_fit(graphs, num_blocks, s, mcmc, std::move(relabeled.partitions));
}

FitResult run_pipeline(Strategy strategy, std::span<const Graph> graphs,
                       std::span<const std::size_t> num_blocks, std::size_t s,
                       const PipelineConfig& config) {
    const auto start = Clock::now();
    check_blocks(graphs, num_blocks, s);
    if (!strategy_shares(strategy) && s != 0)
        throw std::invalid_argument("strategy " + to_string(strategy) + " does not share blocks");

    FitResult result;
    McmcConfig mcmc = config.mcmc;
    switch (strategy) {
        case Strategy::single:
            mcmc.mode = McmcMode::single;
            result = mcmc_fit(graphs, num_blocks, 0, mcmc);
            break;
        case Strategy::shared:
            mcmc.mode = McmcMode::shared;
            result = mcmc_fit(graphs, num_blocks, s, mcmc);
            break;
        case Strategy::multilevel:
            result = summarize(graphs, multilevel_partitions(graphs, num_blocks, config),
                               SharedMapping::none(graphs.size()), "", mcmc.seed);
            break;
        case Strategy::ml_single:
            mcmc.mode = McmcMode::single;
            result = mcmc_fit(graphs, num_blocks, 0, mcmc, multilevel_partitions(graphs, num_blocks, config));
            break;
        case Strategy::ml_shared:
            result = refine_shared(graphs, multilevel_partitions(graphs, num_blocks, config), s, config);
            break;
    }
    result.algorithm = to_string(strategy);
    result.runtime_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return result;
}

}  // namespace ssbm
