#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "properties.hpp"
#include "ssbm/synth.hpp"

using namespace ssbm;

TEST_CASE("parameters are validated") {
    auto p = PlantedParams::uniform(2, 10, 3, 4, 1);
    CHECK_THROWS_AS(generate(p), std::invalid_argument);
    p = PlantedParams::uniform(2, 2, 3, 0, 1);
    CHECK_THROWS_AS(generate(p), std::invalid_argument);
    p = PlantedParams::uniform(2, 10, 3, 1, 1);
    p.alpha = 0.0;
    CHECK_THROWS_AS(generate(p), std::invalid_argument);
    p = PlantedParams::uniform(2, 10, 3, 1, 1);
    p.fixed_theta = 1.5;
    CHECK_THROWS_AS(generate(p), std::invalid_argument);
}

TEST_CASE("full sharing copies the whole theta matrix") {
    const auto inst = generate(PlantedParams::uniform(3, 50, 4, 4, 7));
    for (std::size_t k = 1; k < 3; ++k) CHECK(inst.true_thetas[k].values == inst.true_thetas[0].values);
    CHECK(inst.true_mapping == SharedMapping::identity_prefix(3, 4));
}

TEST_CASE("theta is symmetric exactly when undirected") {
    for (bool directed : {true, false}) {
        auto p = PlantedParams::uniform(1, 10, 6, 0, 5);
        p.directed = directed;
        const auto theta = generate(p).true_thetas[0];
        bool symmetric = true;
        for (Block i = 0; i < 6; ++i)
            for (Block j = 0; j < 6; ++j) symmetric = symmetric && theta(i, j) == theta(j, i);
        CHECK(symmetric == !directed);
    }
}

TEST_CASE("forced unit theta gives complete graphs") {
    for (bool directed : {true, false}) {
        auto p = PlantedParams::uniform(2, 12, 3, 1, 3);
        p.fixed_theta = 1.0;
        p.directed = directed;
        const auto inst = generate(p);
        for (const auto& g : inst.graphs) CHECK(g.num_edges() == (directed ? 12 * 11 : 12 * 11 / 2));
    }
}

TEST_CASE("edge densities concentrate around the planted thetas") {
    auto p = PlantedParams::uniform(1, 60, 2, 0, 1);
    p.fixed_theta = 0.3;
    p.balanced = true;
    Count edges = 0;
    Count dyads = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        p.seed = seed;
        const auto inst = generate(p);
        const auto c = compute_block_counts(inst.graphs[0], inst.true_partitions[0]);
        edges += c.edges(0, 0);
        dyads += c.dyads(0, 0);
    }
    const double sigma = std::sqrt(0.3 * 0.7 / static_cast<double>(dyads));
    CHECK(std::abs(static_cast<double>(edges) / static_cast<double>(dyads) - 0.3) <= 3 * sigma);

    // With Beta thetas, every block pair's density sits within 3 sigma of its own theta.
    int outside = 0;
    int total = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto inst = generate(PlantedParams::uniform(1, 80, 3, 0, seed));
        const auto c = compute_block_counts(inst.graphs[0], inst.true_partitions[0]);
        for (Block i = 0; i < 3; ++i)
            for (Block j = 0; j < 3; ++j) {
                const double t = inst.true_thetas[0](i, j);
                const double d = static_cast<double>(c.dyads(i, j));
                if (d == 0 || t == 0.0 || t == 1.0) continue;
                ++total;
                outside += std::abs(c.edges(i, j) / d - t) > 3 * std::sqrt(t * (1 - t) / d);
            }
    }
    CHECK(outside <= total / 100 + 2);
}

TEST_CASE("balanced assignment gives near-equal block sizes") {
    auto p = PlantedParams::uniform(1, 103, 5, 0, 2);
    p.balanced = true;
    const auto inst = generate(p);
    for (Count n : inst.true_partitions[0].block_sizes) CHECK((n == 20 || n == 21));
}

TEST_CASE("distinct seeds give distinct graphs") {
    const auto a = generate(PlantedParams::uniform(1, 50, 3, 0, 1));
    const auto b = generate(PlantedParams::uniform(1, 50, 3, 0, 2));
    CHECK(a.graphs[0].edges() != b.graphs[0].edges());
}

TEST_CASE("noise extremes") {
    const Partition p(4, {0, 1, 2, 3, 0, 1});
    CHECK(add_noise(p, 0.0, 5) == p);
    const Partition one(1, {0, 0, 0});
    CHECK(add_noise(one, 1.0, 5) == one);
    CHECK_THROWS_AS(add_noise(p, 1.5, 5), std::invalid_argument);
}

TEST_CASE("noise changes the expected fraction of labels") {
    const std::size_t n = 2000;
    std::vector<Block> labels(n);
    for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<Block>(v % 5);
    const Partition p(5, labels);
    double changed = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto q = add_noise(p, 0.3, seed);
        for (std::size_t v = 0; v < n; ++v) changed += q[v] != p[v];
    }
    const double trials = 50.0 * n;
    const double expect = 0.3 * (1.0 - 1.0 / 5.0);
    CHECK(std::abs(changed / trials - expect) <= 4 * std::sqrt(expect * (1 - expect) / trials));
}

TEST_CASE("bundles are written and reloaded") {
    const auto dir = std::filesystem::temp_directory_path() / "ssbm_synth_bundle";
    std::filesystem::remove_all(dir);
    const auto inst = generate(PlantedParams::uniform(2, 30, 3, 2, 9));
    save_instance(inst, dir, {"test"});
    for (std::size_t k = 0; k < 2; ++k) {
        const auto g = load_edge_list(dir / ("graph_" + std::to_string(k + 1) + ".txt"));
        CHECK(g.edges() == inst.graphs[k].edges());
        CHECK(g.num_vertices() == 30);
        CHECK(load_partition(dir / ("truth_" + std::to_string(k + 1) + ".txt"), 30) == inst.true_partitions[k]);
    }
    CHECK(load_mapping(dir / "mapping.txt", 2) == inst.true_mapping);
    CHECK(std::filesystem::exists(dir / "manifest.txt"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("property: planted instances are consistent") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) CHECK(props::planted_instances_are_consistent(seed) == "");
}
