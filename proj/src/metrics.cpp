#include "ssbm/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace ssbm {

namespace {

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double ari(std::span<const Block> a, std::span<const Block> b) {
    if (a.size() != b.size()) throw std::invalid_argument("labelings differ in length");
    if (a.size() < 2) throw std::invalid_argument("ARI needs at least two items");

    std::map<std::pair<Block, Block>, double> cells;
    std::map<Block, double> rows;
    std::map<Block, double> cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cells[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    double index = 0.0;
    for (const auto& [key, c] : cells) index += choose2(c);
    double sum_rows = 0.0;
    for (const auto& [key, c] : rows) sum_rows += choose2(c);
    double sum_cols = 0.0;
    for (const auto& [key, c] : cols) sum_cols += choose2(c);

    const double total = choose2(static_cast<double>(a.size()));
    const double expected = sum_rows * sum_cols / total;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    const double denom = max_index - expected;
    if (denom == 0.0) return 1.0;
    return (index - expected) / denom;
}

double ari(const Partition& a, const Partition& b) { return ari(a.assignment, b.assignment); }

std::vector<Block> shared_labels(std::span<const Partition> partitions, const SharedMapping& mapping) {
    if (mapping.num_graphs() != partitions.size())
        throw std::invalid_argument("mapping and partitions disagree on the number of graphs");
    std::vector<Block> labels;
    for (std::size_t k = 0; k < partitions.size(); ++k) {
        std::vector<bool> shared(partitions[k].num_blocks, false);
        for (Block b : mapping.maps[k]) {
            if (b >= shared.size()) throw std::out_of_range("mapping refers to a missing block");
            shared[b] = true;
        }
        for (Block b : partitions[k].assignment) labels.push_back(shared[b] ? 1 : 0);
    }
    return labels;
}

double shared_ari(std::span<const Partition> partitions, const SharedMapping& mapping,
                  std::span<const Partition> true_partitions, const SharedMapping& true_mapping) {
    if (partitions.size() != true_partitions.size())
        throw std::invalid_argument("inferred and true models differ in the number of graphs");
    for (std::size_t k = 0; k < partitions.size(); ++k)
        if (partitions[k].num_vertices() != true_partitions[k].num_vertices())
            throw std::invalid_argument("graph " + std::to_string(k + 1) + " differs in vertex count");
    const auto inferred = shared_labels(partitions, mapping);
    const auto truth = shared_labels(true_partitions, true_mapping);
    const auto constant = [](const std::vector<Block>& xs) {
        return std::all_of(xs.begin(), xs.end(), [&](Block x) { return x == xs.front(); });
    };
    if (constant(inferred) && constant(truth)) return inferred == truth ? 1.0 : 0.0;
    return ari(inferred, truth);
}

EvalReport evaluate(std::span<const Partition> partitions, const SharedMapping& mapping,
                    std::span<const Partition> true_partitions, const SharedMapping& true_mapping) {
    EvalReport report;
    report.shared_ari = shared_ari(partitions, mapping, true_partitions, true_mapping);
    for (std::size_t k = 0; k < partitions.size(); ++k)
        report.partition_ari.push_back(ari(partitions[k], true_partitions[k]));
    report.mean_partition_ari = mean(report.partition_ari);
    return report;
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of an empty set");
    std::sort(xs.begin(), xs.end());
    const std::size_t m = xs.size() / 2;
    return xs.size() % 2 == 1 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

}  // namespace ssbm
