#include "ssbm/select.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <random>

namespace ssbm {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();
/// Loss differences below this are treated as ties.
constexpr double kTieTolerance = 1e-10;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

SharedMapping mapping_from_tuples(const TupleSpace& tuples, std::span<const std::size_t> chosen) {
    SharedMapping m;
    m.shared = chosen.size();
    m.maps.assign(tuples.num_graphs(), {});
    for (std::size_t k = 0; k < tuples.num_graphs(); ++k)
        for (std::size_t r : chosen) m.maps[k].push_back(tuples.coord(r, k));
    return m;
}

SelectionResult finish(std::span<const BlockCounts> all_counts, SharedMapping mapping,
                       std::string solver, Clock::time_point start, std::uint64_t work) {
    SelectionResult result;
    result.log_likelihood = shared_log_likelihood(all_counts, mapping);
    const double unshared = shared_log_likelihood(all_counts, SharedMapping::none(all_counts.size()));
    result.llh_loss_vs_unshared = std::max(0.0, unshared - result.log_likelihood);
    result.mapping = std::move(mapping);
    result.solver = std::move(solver);
    result.work = work;
    result.runtime_seconds = seconds_since(start);
    return result;
}

/// Tracks which blocks of each graph are already taken by chosen tuples.
class UsedBlocks {
public:
    UsedBlocks(const TupleSpace& tuples, std::span<const BlockCounts> all_counts) : tuples_(tuples) {
        for (const auto& c : all_counts) used_.emplace_back(c.num_blocks(), false);
    }

    bool free(std::size_t r) const {
        for (std::size_t k = 0; k < used_.size(); ++k)
            if (used_[k][tuples_.coord(r, k)]) return false;
        return true;
    }

    void set(std::size_t r, bool value) {
        for (std::size_t k = 0; k < used_.size(); ++k) used_[k][tuples_.coord(r, k)] = value;
    }

private:
    const TupleSpace& tuples_;
    std::vector<std::vector<bool>> used_;
};

struct GreedyOutcome {
    std::vector<std::size_t> chosen;
    double loss = 0.0;
};

GreedyOutcome run_greedy(const PairScores& scores, std::span<const BlockCounts> all_counts,
                         std::size_t s) {
    const auto& tuples = scores.tuples();
    const std::size_t T = tuples.size();
    std::vector<double> acc(T);
    for (std::size_t r = 0; r < T; ++r) acc[r] = scores.self_loss(r);
    std::vector<bool> alive(T, true);
    UsedBlocks used(tuples, all_counts);

    GreedyOutcome out;
    for (std::size_t step = 0; step < s; ++step) {
        std::size_t best = T;
        for (std::size_t r = 0; r < T; ++r) {
            if (!alive[r]) continue;
            if (best == T || acc[r] < acc[best]) best = r;
        }
        out.chosen.push_back(best);
        out.loss += acc[best];
        used.set(best, true);
        for (std::size_t r = 0; r < T; ++r) {
            if (!alive[r]) continue;
            if (!used.free(r)) {
                alive[r] = false;
                continue;
            }
            acc[r] += scores.pair_loss(best, r);
        }
    }
    return out;
}

/// Depth-first branch and bound. Chosen tuples have strictly increasing
/// first coordinates, so every tuple set is visited once. acc_[d][r] holds
/// the loss of adding r at depth d: its self loss plus its pair losses with
/// the tuples already chosen.
class BranchAndBound {
public:
    BranchAndBound(const PairScores& scores, std::span<const BlockCounts> all_counts, std::size_t s)
        : scores_(scores),
          tuples_(scores.tuples()),
          s_(s),
          num_first_(all_counts.front().num_blocks()),
          used_(tuples_, all_counts),
          acc_(s + 1, std::vector<double>(tuples_.size(), 0.0)) {}

    void seed_incumbent(std::vector<std::size_t> chosen, double loss) {
        // Slack lets the lexicographically first solution of equal loss
        // replace the incumbent.
        best_ = std::move(chosen);
        best_loss_ = loss + 2 * kTieTolerance;
    }

    void run() {
        for (std::size_t r = 0; r < tuples_.size(); ++r) acc_[0][r] = scores_.self_loss(r);
        chosen_.clear();
        search(0, 0, 0.0);
    }

    const std::vector<std::size_t>& best() const { return best_; }
    std::uint64_t nodes() const { return nodes_; }

private:
    /// Lower bound on adding m more tuples whose first coordinate is >= first.
    double bound(std::size_t depth, std::size_t first, std::size_t m) {
        mins_.clear();
        const std::size_t stride = tuples_.first_stride();
        const auto& acc = acc_[depth];
        for (std::size_t f = first; f < num_first_; ++f) {
            double best = kInf;
            for (std::size_t r = f * stride; r < (f + 1) * stride; ++r)
                if (acc[r] < best && used_.free(r)) best = acc[r];
            if (best < kInf) mins_.push_back(best);
        }
        if (mins_.size() < m) return kInf;
        std::partial_sort(mins_.begin(), mins_.begin() + static_cast<std::ptrdiff_t>(m), mins_.end());
        return std::accumulate(mins_.begin(), mins_.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
    }

    void search(std::size_t depth, std::size_t first, double loss) {
        ++nodes_;
        const std::size_t m = s_ - depth;
        if (m == 0) {
            if (loss < best_loss_ - kTieTolerance) {
                best_loss_ = loss;
                best_ = chosen_;
            }
            return;
        }
        if (loss + bound(depth, first, m) >= best_loss_ - kTieTolerance) return;

        const std::size_t stride = tuples_.first_stride();
        const auto& acc = acc_[depth];
        const std::size_t end = tuples_.size();
        if (m == 1) {
            std::size_t pick = end;
            for (std::size_t r = first * stride; r < end; ++r)
                if (used_.free(r) && (pick == end || acc[r] < acc[pick])) pick = r;
            chosen_.push_back(pick);
            search(depth + 1, end, loss + acc[pick]);
            chosen_.pop_back();
            return;
        }
        for (std::size_t r = first * stride; r < end; ++r) {
            if (!used_.free(r)) continue;
            const std::size_t f = tuples_.coord(r, 0);
            if (num_first_ - f < m) break;
            const double next_loss = loss + acc[r];
            if (next_loss >= best_loss_ - kTieTolerance) continue;
            used_.set(r, true);
            auto& next = acc_[depth + 1];
            for (std::size_t t = (f + 1) * stride; t < end; ++t)
                next[t] = acc[t] + scores_.pair_loss(r, t);
            chosen_.push_back(r);
            search(depth + 1, f + 1, next_loss);
            chosen_.pop_back();
            used_.set(r, false);
        }
    }

    const PairScores& scores_;
    const TupleSpace& tuples_;
    std::size_t s_;
    std::size_t num_first_;
    UsedBlocks used_;
    std::vector<std::vector<double>> acc_;
    std::vector<double> mins_;
    std::vector<std::size_t> chosen_;
    std::vector<std::size_t> best_;
    double best_loss_ = kInf;
    std::uint64_t nodes_ = 0;
};

}  // namespace

TupleSpace::TupleSpace(std::vector<std::size_t> num_blocks) : radices_(std::move(num_blocks)) {
    strides_.assign(radices_.size(), 1);
    for (std::size_t k = radices_.size(); k-- > 0;) {
        strides_[k] = size_;
        size_ *= radices_[k];
    }
    coords_.resize(size_ * radices_.size());
    for (std::size_t idx = 0; idx < size_; ++idx)
        for (std::size_t k = 0; k < radices_.size(); ++k)
            coords_[idx * radices_.size() + k] = static_cast<Block>((idx / strides_[k]) % radices_[k]);
}

std::vector<Block> TupleSpace::tuple(std::size_t index) const {
    const auto n = radices_.size();
    return {coords_.begin() + static_cast<std::ptrdiff_t>(index * n),
            coords_.begin() + static_cast<std::ptrdiff_t>((index + 1) * n)};
}

std::size_t TupleSpace::index_of(std::span<const Block> tuple) const {
    if (tuple.size() != radices_.size()) throw std::invalid_argument("tuple has wrong length");
    std::size_t idx = 0;
    for (std::size_t k = 0; k < radices_.size(); ++k) {
        if (tuple[k] >= radices_[k]) throw std::out_of_range("tuple coordinate out of range");
        idx += tuple[k] * strides_[k];
    }
    return idx;
}

PairScores::PairScores(std::span<const BlockCounts> all_counts, std::size_t materialize_cap)
    : counts_(all_counts.begin(), all_counts.end()),
      directed_(all_counts.empty() || all_counts.front().directed()),
      tuples_([&] {
          std::vector<std::size_t> blocks;
          for (const auto& c : all_counts) blocks.push_back(c.num_blocks());
          return TupleSpace(std::move(blocks));
      }()) {
    CompensatedSum total;
    for (const auto& c : counts_) {
        const auto B = c.num_blocks();
        auto& u = unshared_.emplace_back(B * B, 0.0);
        for (Block i = 0; i < B; ++i) {
            for (Block j = 0; j < B; ++j) {
                u[i * B + j] = mle_term(c.edges(i, j), c.non_edges(i, j));
                if (directed_ || i <= j) total += u[i * B + j];
            }
        }
    }
    unshared_total_ = total.value();

    const std::size_t T = tuples_.size();
    self_loss_.resize(T);
    for (std::size_t r = 0; r < T; ++r) {
        double separate = 0.0;
        for (std::size_t k = 0; k < counts_.size(); ++k) {
            const Block b = tuples_.coord(r, k);
            separate += unshared(k, b, b);
        }
        self_loss_[r] = std::max(0.0, separate - q(r, r));
    }

    if (T <= materialize_cap / std::max<std::size_t>(T, 1)) {
        pair_table_.resize(T * T);
        for (std::size_t r = 0; r < T; ++r) {
            pair_table_[r * T + r] = 0.0;
            for (std::size_t t = r + 1; t < T; ++t)
                pair_table_[r * T + t] = pair_table_[t * T + r] = compute_pair_loss(r, t);
        }
    }
}

double PairScores::q(std::size_t r, std::size_t t) const {
    Count edges = 0;
    Count dyads = 0;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
        const Block i = tuples_.coord(r, k);
        const Block j = tuples_.coord(t, k);
        edges += counts_[k].edges(i, j);
        dyads += counts_[k].dyads(i, j);
    }
    return mle_term(edges, dyads - edges);
}

double PairScores::compute_pair_loss(std::size_t r, std::size_t t) const {
    auto one_way = [&](std::size_t a, std::size_t b) {
        double separate = 0.0;
        for (std::size_t k = 0; k < counts_.size(); ++k)
            separate += unshared(k, tuples_.coord(a, k), tuples_.coord(b, k));
        return std::max(0.0, separate - q(a, b));
    };
    return directed_ ? one_way(r, t) + one_way(t, r) : one_way(r, t);
}

double PairScores::pair_loss(std::size_t r, std::size_t t) const {
    if (!pair_table_.empty()) return pair_table_[r * tuples_.size() + t];
    return compute_pair_loss(r, t);
}

void check_feasible(std::span<const BlockCounts> all_counts, std::size_t s) {
    if (all_counts.empty()) throw std::invalid_argument("no graphs given");
    for (std::size_t k = 0; k < all_counts.size(); ++k)
        if (s > all_counts[k].num_blocks())
            throw InfeasibleError("cannot share " + std::to_string(s) + " blocks: graph " +
                                  std::to_string(k + 1) + " has only " +
                                  std::to_string(all_counts[k].num_blocks()));
}

SelectionResult select_exact(std::span<const BlockCounts> all_counts, std::size_t s,
                             const SelectOptions& options) {
    const auto start = Clock::now();
    check_feasible(all_counts, s);
    if (s == 0) return finish(all_counts, SharedMapping::none(all_counts.size()), "exact", start, 0);
    const PairScores scores(all_counts, options.materialize_cap);
    const auto greedy = run_greedy(scores, all_counts, s);
    BranchAndBound search(scores, all_counts, s);
    auto incumbent = greedy.chosen;
    std::sort(incumbent.begin(), incumbent.end());
    search.seed_incumbent(std::move(incumbent), greedy.loss);
    search.run();
    return finish(all_counts, mapping_from_tuples(scores.tuples(), search.best()), "exact", start,
                  search.nodes());
}

SelectionResult select_greedy(std::span<const BlockCounts> all_counts, std::size_t s,
                              const SelectOptions& options) {
    const auto start = Clock::now();
    check_feasible(all_counts, s);
    if (s == 0) return finish(all_counts, SharedMapping::none(all_counts.size()), "greedy", start, 0);
    const PairScores scores(all_counts, options.materialize_cap);
    const auto outcome = run_greedy(scores, all_counts, s);
    return finish(all_counts, mapping_from_tuples(scores.tuples(), outcome.chosen), "greedy", start, s);
}

SelectionResult select_random(std::span<const BlockCounts> all_counts, std::size_t s,
                              std::uint64_t seed) {
    const auto start = Clock::now();
    check_feasible(all_counts, s);
    std::mt19937_64 rng(seed);
    SharedMapping m;
    m.shared = s;
    for (const auto& c : all_counts) {
        std::vector<Block> blocks(c.num_blocks());
        std::iota(blocks.begin(), blocks.end(), Block{0});
        std::shuffle(blocks.begin(), blocks.end(), rng);
        blocks.resize(s);
        m.maps.push_back(std::move(blocks));
    }
    return finish(all_counts, std::move(m), "random", start, 1);
}

RelabeledModel relabel_shared_first(std::span<const Partition> partitions, const SharedMapping& mapping) {
    std::vector<std::size_t> blocks;
    for (const auto& p : partitions) blocks.push_back(p.num_blocks);
    mapping.validate(blocks);
    RelabeledModel out;
    out.mapping = SharedMapping::identity_prefix(partitions.size(), mapping.shared);
    for (std::size_t k = 0; k < partitions.size(); ++k) {
        const std::size_t B = partitions[k].num_blocks;
        constexpr Block unset = ~Block{0};
        std::vector<Block> perm(B, unset);
        for (std::size_t l = 0; l < mapping.shared; ++l) perm[mapping.maps[k][l]] = static_cast<Block>(l);
        Block next = static_cast<Block>(mapping.shared);
        for (Block b = 0; b < B; ++b)
            if (perm[b] == unset) perm[b] = next++;
        out.partitions.push_back(permute_blocks(partitions[k], perm));
        out.permutations.push_back(std::move(perm));
    }
    return out;
}

std::vector<Block> invert_permutation(std::span<const Block> perm) {
    std::vector<Block> inverse(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = static_cast<Block>(i);
    return inverse;
}

}  // namespace ssbm
