#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "properties.hpp"
#include "ssbm/partition.hpp"

using namespace ssbm;

namespace {

void check_against_tally(const BlockCounts& c, const oracle::Tally& t) {
    for (Block i = 0; i < t.blocks; ++i) {
        for (Block j = t.directed ? 0 : i; j < t.blocks; ++j) {
            CHECK(c.edges(i, j) == t.edges[i][j]);
            CHECK(c.dyads(i, j) == t.dyads[i][j]);
            CHECK(c.edges(i, j) + c.non_edges(i, j) == c.dyads(i, j));
        }
    }
}

}  // namespace

TEST_CASE("complete directed triangle in one block") {
    const auto g = Graph::from_edges(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}}, true);
    const auto c = compute_block_counts(g, Partition(1, {0, 0, 0}));
    CHECK(c.edges(0, 0) == 6);
    CHECK(c.non_edges(0, 0) == 0);
}

TEST_CASE("empty undirected graph with two blocks of two") {
    const auto g = Graph::from_edges(4, {}, false);
    const auto c = compute_block_counts(g, Partition(2, {0, 0, 1, 1}));
    CHECK(c.edges(0, 1) == 0);
    CHECK(c.non_edges(0, 0) == 1);
    CHECK(c.non_edges(0, 1) == 4);
    CHECK(c.non_edges(1, 1) == 1);
}

TEST_CASE("counts match a dyad-loop tally") {
    oracle::Rng rng(11);
    for (bool directed : {true, false}) {
        for (int rep = 0; rep < 5; ++rep) {
            const auto g = oracle::random_graph(8, 0.5, directed, rng);
            const auto p = oracle::random_partition(8, 3, rng);
            check_against_tally(compute_block_counts(g, p), oracle::brute_tally(g, p));
        }
    }
}

TEST_CASE("labels out of range are rejected") {
    CHECK_THROWS_AS(Partition(2, {0, 2}), std::out_of_range);
    const auto g = Graph::from_edges(3, {{0, 1}}, true);
    CHECK_THROWS_AS(compute_block_counts(g, Partition(1, {0, 0})), std::invalid_argument);
    auto p = Partition(2, {0, 0, 1});
    auto c = compute_block_counts(g, p);
    CHECK_THROWS_AS(move_vertex(g, p, c, 0, 2), std::out_of_range);
}

TEST_CASE("moving the only vertex empties its block") {
    const auto g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, true);
    Partition p(3, {0, 0, 1, 2});
    auto c = compute_block_counts(g, p);
    move_vertex(g, p, c, 3, 1);
    CHECK(c.block_size(2) == 0);
    for (Block x = 0; x < 3; ++x) {
        CHECK(c.dyads(2, x) == 0);
        CHECK(c.dyads(x, 2) == 0);
    }
    CHECK(c == compute_block_counts(g, p));
}

TEST_CASE("a move followed by its reverse restores the counts") {
    oracle::Rng rng(3);
    for (bool directed : {true, false}) {
        const auto g = oracle::random_graph(15, 0.3, directed, rng);
        auto p = oracle::random_partition(15, 4, rng);
        auto c = compute_block_counts(g, p);
        const auto before = c;
        const Block from = p[5];
        move_vertex(g, p, c, 5, (from + 1) % 4);
        move_vertex(g, p, c, 5, from);
        CHECK(c == before);
    }
}

TEST_CASE("twenty random moves match a recount") {
    oracle::Rng rng(5);
    for (bool directed : {true, false}) {
        const auto g = oracle::random_graph(25, 0.25, directed, rng);
        auto p = oracle::random_partition(25, 5, rng);
        auto c = compute_block_counts(g, p);
        std::uniform_int_distribution<Vertex> vertex(0, 24);
        std::uniform_int_distribution<Block> block(0, 4);
        for (int i = 0; i < 20; ++i) move_vertex(g, p, c, vertex(rng), block(rng));
        CHECK(c == compute_block_counts(g, p));
        check_against_tally(c, oracle::brute_tally(g, p));
    }
}

TEST_CASE("edges_after_move predicts the moved counts") {
    oracle::Rng rng(17);
    for (bool directed : {true, false}) {
        const auto g = oracle::random_graph(20, 0.3, directed, rng);
        auto p = oracle::random_partition(20, 4, rng);
        auto c = compute_block_counts(g, p);
        NeighborTally tally;
        for (Vertex v = 0; v < 20; ++v) {
            tally_neighbors(g, p, v, tally);
            const Block from = p[v];
            const Block to = (from + 1 + v % 3) % 4;
            auto p2 = p;
            auto c2 = c;
            move_vertex(g, p2, c2, v, to);
            for (Block i = 0; i < 4; ++i)
                for (Block j = 0; j < 4; ++j) CHECK(c.edges_after_move(i, j, from, to, tally) == c2.edges(i, j));
        }
    }
}

TEST_CASE("merging blocks matches relabeling") {
    oracle::Rng rng(23);
    for (bool directed : {true, false}) {
        const auto g = oracle::random_graph(20, 0.3, directed, rng);
        const auto p = oracle::random_partition(20, 4, rng);
        const auto merged = merge_blocks(compute_block_counts(g, p), 1, 3);
        auto labels = p.assignment;
        for (auto& b : labels)
            if (b == 1) b = 3;
        CHECK(merged == compute_block_counts(g, Partition(4, labels)));
    }
}

TEST_CASE("partition files are 1-based and complete") {
    const Partition p(3, {2, 0, 1, 0});
    std::stringstream buf;
    write_partition(p, buf, {"note"});
    CHECK(buf.str() == "# note\n0 3\n1 1\n2 2\n3 1\n");
    CHECK(parse_partition(buf, 4) == p);

    std::istringstream missing("0 1\n1 1\n");
    CHECK_THROWS_AS(parse_partition(missing, 3), ParseError);
    std::istringstream twice("0 1\n0 2\n1 1\n");
    CHECK_THROWS_AS(parse_partition(twice, 2), ParseError);
    std::istringstream zero("0 0\n");
    CHECK_THROWS_AS(parse_partition(zero, 1), ParseError);
}

TEST_CASE("mapping files round trip") {
    SharedMapping m;
    m.shared = 2;
    m.maps = {{0, 3}, {2, 1}};
    std::stringstream buf;
    write_mapping(m, buf);
    CHECK(parse_mapping(buf, 2) == m);

    std::istringstream empty("# nothing shared\n");
    const auto none = parse_mapping(empty, 3);
    CHECK(none.shared == 0);
    CHECK(none.num_graphs() == 3);
}

TEST_CASE("mapping validation") {
    SharedMapping m;
    m.shared = 2;
    m.maps = {{0, 0}, {0, 1}};
    CHECK_THROWS_AS(m.validate({3, 3}), std::invalid_argument);
    m.maps = {{0, 2}, {0, 1}};
    CHECK_NOTHROW(m.validate({3, 3}));
    CHECK_THROWS_AS(m.validate({2, 3}), std::invalid_argument);
}

TEST_CASE("property: counts stay consistent under moves") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(props::counts_consistent_under_moves(seed) == "");
}

TEST_CASE("property: edge lists round trip") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(props::edge_list_round_trip(seed) == "");
}
