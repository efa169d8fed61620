#include "ssbm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "ssbm/fit.hpp"
#include "ssbm/graph.hpp"
#include "ssbm/likelihood.hpp"
#include "ssbm/metrics.hpp"
#include "ssbm/partition.hpp"
#include "ssbm/select.hpp"
#include "ssbm/synth.hpp"

namespace ssbm {

namespace {

constexpr const char* kVersion = "0.1.0";

using Fields = std::vector<std::pair<std::string, std::string>>;
using Clock = std::chrono::steady_clock;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs, const char* sep = ",") {
    std::ostringstream out;
    for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? sep : "") << xs[i];
    return out.str();
}

std::vector<std::string> manifest(const std::string& command, const Fields& params) {
    std::vector<std::string> lines{std::string("ssbm ") + kVersion, "command: " + command};
    for (const auto& [k, v] : params) lines.push_back(k + ": " + v);
    return lines;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_fields(std::ostream& out, const std::vector<std::string>& header, const Fields& fields) {
    for (const auto& h : header) out << "# " << h << '\n';
    for (const auto& [k, v] : fields) out << k << '=' << v << '\n';
}

void save_fields(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const Fields& fields) {
    auto out = open_output(path);
    write_fields(out, header, fields);
}

std::vector<std::size_t> per_graph(const std::vector<std::size_t>& values, std::size_t n,
                                   const std::string& what) {
    if (values.size() == 1) return std::vector<std::size_t>(n, values.front());
    if (values.size() == n) return values;
    throw std::invalid_argument(what + " needs one value or one per graph (" + std::to_string(n) + ")");
}

/// Graph inputs shared by most subcommands.
struct GraphArgs {
    std::vector<std::string> paths;
    bool undirected = false;
    bool remap_ids = false;

    void attach(CLI::App* cmd, bool required = true) {
        auto* opt = cmd->add_option("--graph,-g", paths, "Edge-list files, one per graph");
        if (required) opt->required();
        auto* d = cmd->add_flag("--directed", "Treat edges as directed (default)");
        auto* u = cmd->add_flag("--undirected", undirected, "Treat edges as undirected");
        d->excludes(u);
        cmd->add_flag("--remap-ids", remap_ids, "Vertex tokens are names, not integer ids");
    }

    std::vector<Graph> load() const {
        std::vector<Graph> graphs;
        EdgeListOptions options;
        options.directed = !undirected;
        options.remap_ids = remap_ids;
        for (const auto& p : paths) graphs.push_back(load_edge_list(p, options));
        return graphs;
    }

    Fields describe() const {
        return {{"graphs", join(paths)}, {"directed", undirected ? "false" : "true"}};
    }
};

std::vector<Partition> load_partitions(const std::vector<std::string>& paths,
                                       const std::vector<Graph>& graphs,
                                       const std::vector<std::size_t>& num_blocks = {}) {
    if (paths.size() != graphs.size())
        throw std::invalid_argument("need one partition file per graph");
    std::vector<Partition> out;
    for (std::size_t k = 0; k < paths.size(); ++k)
        out.push_back(load_partition(paths[k], graphs[k].num_vertices(),
                                     num_blocks.empty() ? 0 : num_blocks[k], graphs[k].vertex_names()));
    return out;
}

std::vector<BlockCounts> all_counts(const std::vector<Graph>& graphs, const std::vector<Partition>& parts) {
    std::vector<BlockCounts> out;
    for (std::size_t k = 0; k < graphs.size(); ++k) out.push_back(compute_block_counts(graphs[k], parts[k]));
    return out;
}

std::vector<std::size_t> block_counts_of(const std::vector<Partition>& parts) {
    std::vector<std::size_t> out;
    for (const auto& p : parts) out.push_back(p.num_blocks);
    return out;
}

Fields score_fields(const ModelScore& score) {
    return {{"log_likelihood", num(score.log_likelihood)},
            {"num_parameters", std::to_string(score.num_parameters)},
            {"num_dyads", std::to_string(score.num_dyads)},
            {"bic", num(score.bic)}};
}

enum class Solver { exact, greedy, random };

Solver parse_solver(const std::string& name) {
    if (name == "exact") return Solver::exact;
    if (name == "greedy") return Solver::greedy;
    if (name == "random") return Solver::random;
    throw std::invalid_argument("unknown solver '" + name + "'");
}

SelectionResult run_solver(Solver solver, std::span<const BlockCounts> counts, std::size_t s,
                           std::uint64_t seed) {
    switch (solver) {
        case Solver::exact: return select_exact(counts, s);
        case Solver::greedy: return select_greedy(counts, s);
        case Solver::random: return select_random(counts, s, seed);
    }
    throw std::logic_error("unreachable");
}

/// MCMC and multilevel knobs shared by fit and bic-scan.
struct FitArgs {
    std::string strategy = "ml_shared";
    std::vector<std::size_t> blocks;
    std::size_t sweeps = 500;
    double beta_max = 1e4;
    double epsilon = 0.1;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd, bool blocks_required) {
        auto* b = cmd->add_option("--blocks,-B", blocks, "Blocks per graph (one value or one per graph)");
        if (blocks_required) b->required();
        cmd->add_option("--strategy", strategy, "single|multilevel|ml_single|shared|ml_shared")
            ->capture_default_str();
        cmd->add_option("--sweeps", sweeps, "MCMC sweeps")->capture_default_str();
        cmd->add_option("--beta-max", beta_max, "Final inverse temperature")->capture_default_str();
        cmd->add_option("--epsilon", epsilon, "Proposal smoothing")->capture_default_str();
        cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    }

    PipelineConfig config() const {
        PipelineConfig cfg;
        cfg.mcmc.sweeps = sweeps;
        cfg.mcmc.beta.final = beta_max;
        cfg.mcmc.epsilon = epsilon;
        cfg.mcmc.seed = seed;
        cfg.multilevel.epsilon = epsilon;
        return cfg;
    }

    Fields describe() const {
        return {{"strategy", strategy}, {"blocks", join(blocks)}, {"sweeps", std::to_string(sweeps)},
                {"beta_max", num(beta_max)}, {"epsilon", num(epsilon)}, {"seed", std::to_string(seed)}};
    }
};

void save_model(const std::filesystem::path& dir, const std::vector<Graph>& graphs,
                const std::vector<Partition>& parts, const SharedMapping& mapping,
                const std::vector<std::string>& header) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < parts.size(); ++k)
        save_partition(parts[k], dir / ("partition_" + std::to_string(k + 1) + ".txt"), header,
                       graphs[k].vertex_names());
    save_mapping(mapping, dir / "mapping.txt", header);
}

// ---- generate ----

struct GenerateArgs {
    std::size_t graphs = 2;
    std::vector<std::size_t> vertices{300};
    std::vector<std::size_t> blocks{5};
    std::size_t shared = 0;
    double alpha = 0.5;
    double beta = 1.0;
    bool undirected = false;
    bool balanced = false;
    double noise = 0.0;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_generate(const GenerateArgs& a) {
    PlantedParams params;
    params.num_vertices = per_graph(a.vertices, a.graphs, "--vertices");
    params.num_blocks = per_graph(a.blocks, a.graphs, "--blocks");
    params.shared = a.shared;
    params.alpha = a.alpha;
    params.beta = a.beta;
    params.directed = !a.undirected;
    params.balanced = a.balanced;
    params.seed = a.seed;
    for (std::size_t b : params.num_blocks)
        if (params.shared > b)
            throw InfeasibleError("cannot share " + std::to_string(params.shared) + " of " +
                                  std::to_string(b) + " blocks");
    const auto inst = generate(params);
    const auto header = manifest("generate", {{"graphs", std::to_string(a.graphs)},
                                              {"vertices", join(params.num_vertices)},
                                              {"blocks", join(params.num_blocks)},
                                              {"shared", std::to_string(a.shared)},
                                              {"theta_alpha", num(a.alpha)},
                                              {"theta_beta", num(a.beta)},
                                              {"directed", a.undirected ? "false" : "true"},
                                              {"balanced", a.balanced ? "true" : "false"},
                                              {"noise", num(a.noise)},
                                              {"seed", std::to_string(a.seed)}});
    save_instance(inst, a.out, header);
    if (a.noise > 0.0) {
        for (std::size_t k = 0; k < inst.graphs.size(); ++k)
            save_partition(add_noise(inst.true_partitions[k], a.noise, a.seed + 1000003 * (k + 1)),
                           std::filesystem::path(a.out) / ("noisy_" + std::to_string(k + 1) + ".txt"),
                           header);
    }
    std::cout << "wrote " << inst.graphs.size() << " graphs to " << a.out << '\n';
    return kExitOk;
}

// ---- fit ----

int cmd_fit(const GraphArgs& g, const FitArgs& f, std::optional<std::size_t> shared, const std::string& out) {
    const auto strategy = parse_strategy(f.strategy);
    if (shared && !strategy_shares(strategy))
        throw std::invalid_argument("--shared is meaningless for strategy " + f.strategy);
    const std::size_t s = shared.value_or(0);
    const auto graphs = g.load();
    const auto blocks = per_graph(f.blocks, graphs.size(), "--blocks");
    const auto result = run_pipeline(strategy, graphs, blocks, s, f.config());

    Fields params = g.describe();
    for (auto& kv : f.describe()) params.push_back(kv);
    params.emplace_back("shared", std::to_string(s));
    const auto header = manifest("fit", params);

    const std::filesystem::path dir(out);
    save_model(dir, graphs, result.partitions, result.mapping, header);
    Fields fields{{"algorithm", result.algorithm}, {"seed", std::to_string(result.seed)},
                  {"graphs", std::to_string(graphs.size())}, {"blocks", join(blocks)},
                  {"shared", std::to_string(s)}};
    for (auto& kv : score_fields(result.score)) fields.push_back(kv);
    save_fields(dir / "result.txt", header, fields);

    auto trace = open_output(dir / "trace.csv");
    for (const auto& h : header) trace << "# " << h << '\n';
    trace << "sweep,beta,log_likelihood,best_log_likelihood\n";
    for (const auto& t : result.trace)
        trace << t.sweep << ',' << num(t.beta) << ',' << num(t.log_likelihood) << ','
              << num(t.best_log_likelihood) << '\n';

    write_fields(std::cout, {}, fields);
    std::cout << "runtime_seconds=" << num(result.runtime_seconds) << '\n';
    return kExitOk;
}

// ---- select ----

int cmd_select(const GraphArgs& g, const std::vector<std::string>& partition_paths, std::size_t s,
               const std::string& solver_name, std::uint64_t seed, const std::string& out) {
    const auto solver = parse_solver(solver_name);
    const auto graphs = g.load();
    const auto parts = load_partitions(partition_paths, graphs);
    const auto counts = all_counts(graphs, parts);
    check_feasible(counts, s);
    const auto sel = run_solver(solver, counts, s, seed);
    const auto score = bic(counts, sel.mapping, !g.undirected);

    Fields params = g.describe();
    params.emplace_back("partitions", join(partition_paths));
    params.emplace_back("shared", std::to_string(s));
    params.emplace_back("solver", solver_name);
    params.emplace_back("seed", std::to_string(seed));
    const auto header = manifest("select", params);

    const std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    save_mapping(sel.mapping, dir / "mapping.txt", header);
    Fields fields{{"solver", sel.solver},
                  {"shared", std::to_string(s)},
                  {"llh_loss_vs_unshared", num(sel.llh_loss_vs_unshared)},
                  {"work", std::to_string(sel.work)}};
    for (auto& kv : score_fields(score)) fields.push_back(kv);
    save_fields(dir / "result.txt", header, fields);
    write_fields(std::cout, {}, fields);
    std::cout << "runtime_seconds=" << num(sel.runtime_seconds) << '\n';
    return kExitOk;
}

// ---- evaluate ----

struct EvaluateArgs {
    std::vector<std::string> partitions;
    std::string mapping;
    std::vector<std::string> truth;
    std::string truth_mapping;
    std::string out;
};

int cmd_evaluate(const GraphArgs& g, const EvaluateArgs& a) {
    const auto graphs = g.load();
    const auto parts = load_partitions(a.partitions, graphs);
    const auto truth = load_partitions(a.truth, graphs);
    const auto n = graphs.size();
    const auto mapping = a.mapping.empty() ? SharedMapping::none(n) : load_mapping(a.mapping, n);
    const auto truth_mapping = a.truth_mapping.empty() ? SharedMapping::none(n) : load_mapping(a.truth_mapping, n);
    mapping.validate(block_counts_of(parts));
    truth_mapping.validate(block_counts_of(truth));

    const auto report = evaluate(parts, mapping, truth, truth_mapping);
    const auto counts = all_counts(graphs, parts);
    const auto score = bic(counts, mapping, !g.undirected);
    Fields fields{{"shared_ari", num(report.shared_ari)},
                  {"mean_partition_ari", num(report.mean_partition_ari)}};
    for (std::size_t k = 0; k < n; ++k)
        fields.emplace_back("partition_ari_" + std::to_string(k + 1), num(report.partition_ari[k]));
    for (auto& kv : score_fields(score)) fields.push_back(kv);

    if (!a.out.empty()) {
        Fields params = g.describe();
        params.emplace_back("partitions", join(a.partitions));
        params.emplace_back("mapping", a.mapping);
        params.emplace_back("truth", join(a.truth));
        params.emplace_back("truth_mapping", a.truth_mapping);
        save_fields(a.out, manifest("evaluate", params), fields);
    }
    write_fields(std::cout, {}, fields);
    return kExitOk;
}

// ---- bic-scan ----

struct ScanArgs {
    std::vector<std::string> partitions;
    std::size_t s_min = 0;
    std::optional<std::size_t> s_max;
    std::string solver = "exact";
    std::string out;
};

int cmd_bic_scan(const GraphArgs& g, const FitArgs& f, bool strategy_given, const ScanArgs& a) {
    const auto solver = parse_solver(a.solver);
    const auto graphs = g.load();
    const bool directed = !g.undirected;

    std::vector<Partition> fixed;
    std::optional<Strategy> per_s_strategy;
    if (!a.partitions.empty()) {
        if (strategy_given) throw std::invalid_argument("give either --partition or --strategy, not both");
        fixed = load_partitions(a.partitions, graphs);
    } else {
        if (f.blocks.empty()) throw std::invalid_argument("--blocks is required without --partition");
        const auto strategy = strategy_given ? parse_strategy(f.strategy) : Strategy::ml_single;
        const auto blocks = per_graph(f.blocks, graphs.size(), "--blocks");
        if (strategy_shares(strategy))
            per_s_strategy = strategy;
        else
            fixed = run_pipeline(strategy, graphs, blocks, 0, f.config()).partitions;
    }
    const auto blocks = fixed.empty() ? per_graph(f.blocks, graphs.size(), "--blocks") : block_counts_of(fixed);
    const std::size_t min_b = *std::min_element(blocks.begin(), blocks.end());
    const std::size_t s_max = a.s_max.value_or(min_b);
    if (s_max > min_b)
        throw InfeasibleError("cannot share " + std::to_string(s_max) + " of " + std::to_string(min_b) + " blocks");
    if (a.s_min > s_max) throw std::invalid_argument("empty range of shared block counts");

    std::vector<std::pair<std::size_t, ModelScore>> rows;
    if (per_s_strategy) {
        for (std::size_t s = a.s_min; s <= s_max; ++s)
            rows.emplace_back(s, run_pipeline(*per_s_strategy, graphs, blocks, s, f.config()).score);
    } else {
        const auto counts = all_counts(graphs, fixed);
        for (std::size_t s = a.s_min; s <= s_max; ++s)
            rows.emplace_back(s, bic(counts, run_solver(solver, counts, s, f.seed).mapping, directed));
    }

    Fields params = g.describe();
    if (!a.partitions.empty()) params.emplace_back("partitions", join(a.partitions));
    else for (auto& kv : f.describe()) params.push_back(kv);
    params.emplace_back("solver", a.solver);
    params.emplace_back("s_range", std::to_string(a.s_min) + ".." + std::to_string(s_max));

    std::ofstream file;
    if (!a.out.empty()) file = open_output(a.out);
    std::ostream& out = a.out.empty() ? std::cout : file;
    for (const auto& h : manifest("bic-scan", params)) out << "# " << h << '\n';
    out << "s,log_likelihood,num_parameters,num_dyads,bic\n";
    std::size_t best = rows.front().first;
    double best_bic = rows.front().second.bic;
    for (const auto& [s, score] : rows) {
        out << s << ',' << num(score.log_likelihood) << ',' << score.num_parameters << ','
            << score.num_dyads << ',' << num(score.bic) << '\n';
        if (score.bic < best_bic) {
            best_bic = score.bic;
            best = s;
        }
    }
    if (!a.out.empty()) std::cout << "best_shared=" << best << "\nbest_bic=" << num(best_bic) << '\n';
    return kExitOk;
}

// ---- benchmark ----

struct BenchArgs {
    std::string kind = "selectors";
    std::size_t seeds = 3;
    std::uint64_t seed = 1;
    std::size_t max_graphs = 5;
    std::size_t vertices = 200;
    std::size_t blocks = 4;
    std::size_t shared = 2;
    std::vector<std::size_t> edges{100000, 200000};
    std::size_t sweeps = 3;
    std::vector<double> noise{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::string out;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Random simple directed graph with about `edges` edges and average
/// total degree 20.
Graph random_graph(std::size_t edges, std::uint64_t seed) {
    const std::size_t n = std::max<std::size_t>(edges / 10, 2);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(n - 1));
    std::vector<std::pair<Vertex, Vertex>> list;
    list.reserve(edges);
    while (list.size() < edges) {
        const Vertex u = pick(rng);
        const Vertex v = pick(rng);
        if (u != v) list.emplace_back(u, v);
    }
    return Graph::from_edges(n, std::move(list), true);
}

int cmd_benchmark(const BenchArgs& a) {
    if (a.seeds == 0) throw std::invalid_argument("--seeds must be positive");
    Fields params{{"kind", a.kind}, {"seeds", std::to_string(a.seeds)}, {"seed", std::to_string(a.seed)}};
    auto out = open_output(a.out);

    if (a.kind == "selectors") {
        params.insert(params.end(), {{"max_graphs", std::to_string(a.max_graphs)},
                                     {"vertices", std::to_string(a.vertices)},
                                     {"blocks", std::to_string(a.blocks)},
                                     {"shared", std::to_string(a.shared)}});
        for (const auto& h : manifest("benchmark", params)) out << "# " << h << '\n';
        out << "graphs,seed,solver,seconds,log_likelihood,work\n";
        for (std::size_t n = 2; n <= a.max_graphs; ++n) {
            for (std::size_t i = 0; i < a.seeds; ++i) {
                const auto inst = generate(PlantedParams::uniform(n, a.vertices, a.blocks, a.shared, a.seed + i));
                const auto counts = all_counts(inst.graphs, inst.true_partitions);
                for (auto solver : {Solver::exact, Solver::greedy, Solver::random}) {
                    const auto sel = run_solver(solver, counts, a.shared, a.seed + i);
                    out << n << ',' << a.seed + i << ',' << sel.solver << ',' << num(sel.runtime_seconds)
                        << ',' << num(sel.log_likelihood) << ',' << sel.work << '\n';
                }
            }
        }
    } else if (a.kind == "edges") {
        params.emplace_back("edges", join(a.edges));
        params.emplace_back("sweeps", std::to_string(a.sweeps));
        params.emplace_back("blocks", std::to_string(a.blocks));
        for (const auto& h : manifest("benchmark", params)) out << "# " << h << '\n';
        out << "edges,vertices,seed,seconds_per_sweep\n";
        for (std::size_t e : a.edges) {
            for (std::size_t i = 0; i < a.seeds; ++i) {
                const Graph g = random_graph(e, a.seed + i);
                McmcConfig cfg;
                cfg.sweeps = a.sweeps;
                cfg.seed = a.seed + i;
                cfg.mode = McmcMode::single;
                cfg.greedy_finish = false;
                cfg.record_trace = false;
                const std::vector<std::size_t> blocks{a.blocks};
                const auto start = Clock::now();
                mcmc_fit(std::span<const Graph>(&g, 1), blocks, 0, cfg);
                out << g.num_edges() << ',' << g.num_vertices() << ',' << a.seed + i << ','
                    << num(seconds_since(start) / static_cast<double>(a.sweeps)) << '\n';
            }
        }
    } else if (a.kind == "noise") {
        params.emplace_back("noise", join(a.noise));
        params.emplace_back("vertices", std::to_string(a.vertices));
        params.emplace_back("blocks", std::to_string(a.blocks));
        params.emplace_back("shared", std::to_string(a.shared));
        for (const auto& h : manifest("benchmark", params)) out << "# " << h << '\n';
        out << "noise,seed,solver,shared_ari,log_likelihood\n";
        for (double level : a.noise) {
            for (std::size_t i = 0; i < a.seeds; ++i) {
                const auto inst = generate(PlantedParams::uniform(2, a.vertices, a.blocks, a.shared, a.seed + i));
                std::vector<Partition> noisy;
                for (std::size_t k = 0; k < inst.graphs.size(); ++k)
                    noisy.push_back(add_noise(inst.true_partitions[k], level, a.seed + i + 7919 * (k + 1)));
                const auto counts = all_counts(inst.graphs, noisy);
                for (auto solver : {Solver::exact, Solver::greedy, Solver::random}) {
                    const auto sel = run_solver(solver, counts, a.shared, a.seed + i);
                    out << num(level) << ',' << a.seed + i << ',' << sel.solver << ','
                        << num(shared_ari(noisy, sel.mapping, inst.true_partitions, inst.true_mapping)) << ','
                        << num(sel.log_likelihood) << '\n';
                }
            }
        }
    } else {
        throw std::invalid_argument("unknown benchmark kind '" + a.kind + "'");
    }
    std::cout << "wrote " << a.out << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Stochastic block models with shared blocks across unaligned graphs"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "Generate a planted instance bundle");
    generate_cmd->add_option("--graphs,-n", gen.graphs, "Number of graphs")->capture_default_str();
    generate_cmd->add_option("--vertices,-N", gen.vertices, "Vertices per graph")->capture_default_str();
    generate_cmd->add_option("--blocks,-B", gen.blocks, "Blocks per graph")->capture_default_str();
    generate_cmd->add_option("--shared,-s", gen.shared, "Shared blocks")->capture_default_str();
    generate_cmd->add_option("--theta-alpha", gen.alpha, "Beta prior alpha of edge probabilities")
        ->capture_default_str();
    generate_cmd->add_option("--theta-beta", gen.beta, "Beta prior beta of edge probabilities")
        ->capture_default_str();
    {
        auto* d = generate_cmd->add_flag("--directed", "Directed graphs (default)");
        auto* u = generate_cmd->add_flag("--undirected", gen.undirected, "Undirected graphs");
        d->excludes(u);
    }
    generate_cmd->add_flag("--balanced", gen.balanced, "Equal block sizes instead of uniform labels");
    generate_cmd->add_option("--noise", gen.noise, "Also write noisy copies of the truth")
        ->check(CLI::Range(0.0, 1.0));
    generate_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    generate_cmd->add_option("--out,-o", gen.out, "Output directory")->required();

    GraphArgs fit_graphs;
    FitArgs fit_args;
    std::size_t fit_shared = 0;
    std::string fit_out;
    auto* fit_cmd = app.add_subcommand("fit", "Fit partitions and a shared model");
    fit_graphs.attach(fit_cmd);
    fit_args.attach(fit_cmd, true);
    auto* fit_shared_opt = fit_cmd->add_option("--shared,-s", fit_shared, "Shared blocks");
    fit_cmd->add_option("--out,-o", fit_out, "Output directory")->required();

    GraphArgs sel_graphs;
    std::vector<std::string> sel_parts;
    std::size_t sel_shared = 0;
    std::string sel_solver = "exact";
    std::uint64_t sel_seed = 1;
    std::string sel_out;
    auto* select_cmd = app.add_subcommand("select", "Choose shared blocks for fixed partitions");
    sel_graphs.attach(select_cmd);
    select_cmd->add_option("--partition,-p", sel_parts, "Partition files, one per graph")->required();
    select_cmd->add_option("--shared,-s", sel_shared, "Shared blocks")->required();
    select_cmd->add_option("--solver", sel_solver, "exact|greedy|random")->capture_default_str();
    select_cmd->add_option("--seed", sel_seed, "Seed of the random solver")->capture_default_str();
    select_cmd->add_option("--out,-o", sel_out, "Output directory")->required();

    GraphArgs eval_graphs;
    EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Compare a fitted model with ground truth");
    eval_graphs.attach(eval_cmd);
    eval_cmd->add_option("--partition,-p", eval.partitions, "Inferred partitions")->required();
    eval_cmd->add_option("--mapping", eval.mapping, "Inferred mapping (default: nothing shared)");
    eval_cmd->add_option("--truth", eval.truth, "True partitions")->required();
    eval_cmd->add_option("--truth-mapping", eval.truth_mapping, "True mapping (default: nothing shared)");
    eval_cmd->add_option("--out,-o", eval.out, "Result file");

    GraphArgs scan_graphs;
    FitArgs scan_fit;
    ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("bic-scan", "BIC over a range of shared block counts");
    scan_graphs.attach(scan_cmd);
    scan_fit.attach(scan_cmd, false);
    scan_cmd->add_option("--partition,-p", scan.partitions, "Fixed partitions, one per graph");
    scan_cmd->add_option("--s-min", scan.s_min, "Smallest shared block count")->capture_default_str();
    scan_cmd->add_option("--s-max", scan.s_max, "Largest shared block count (default: min blocks)");
    scan_cmd->add_option("--solver", scan.solver, "exact|greedy|random")->capture_default_str();
    scan_cmd->add_option("--out,-o", scan.out, "CSV file (default: stdout)");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("benchmark", "Runtime and robustness experiments as CSV");
    bench_cmd->add_option("--kind", bench.kind, "selectors|edges|noise")->capture_default_str();
    bench_cmd->add_option("--seeds", bench.seeds, "Repetitions per setting")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "First seed")->capture_default_str();
    bench_cmd->add_option("--max-graphs", bench.max_graphs, "Largest number of graphs")->capture_default_str();
    bench_cmd->add_option("--vertices,-N", bench.vertices, "Vertices per graph")->capture_default_str();
    bench_cmd->add_option("--blocks,-B", bench.blocks, "Blocks per graph")->capture_default_str();
    bench_cmd->add_option("--shared,-s", bench.shared, "Shared blocks")->capture_default_str();
    bench_cmd->add_option("--edges", bench.edges, "Edge counts for the scaling run")->capture_default_str();
    bench_cmd->add_option("--sweeps", bench.sweeps, "Sweeps per scaling run")->capture_default_str();
    bench_cmd->add_option("--noise", bench.noise, "Noise levels")->capture_default_str();
    bench_cmd->add_option("--out,-o", bench.out, "CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitBadArguments;
    }

    try {
        if (generate_cmd->parsed()) return cmd_generate(gen);
        if (fit_cmd->parsed())
            return cmd_fit(fit_graphs, fit_args,
                           fit_shared_opt->count() > 0 ? std::optional<std::size_t>(fit_shared) : std::nullopt,
                           fit_out);
        if (select_cmd->parsed()) return cmd_select(sel_graphs, sel_parts, sel_shared, sel_solver, sel_seed, sel_out);
        if (eval_cmd->parsed()) return cmd_evaluate(eval_graphs, eval);
        if (scan_cmd->parsed())
            return cmd_bic_scan(scan_graphs, scan_fit, scan_cmd->get_option("--strategy")->count() > 0, scan);
        if (bench_cmd->parsed()) return cmd_benchmark(bench);
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParseFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadArguments;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadArguments;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitBadArguments;
}

}  // namespace ssbm
