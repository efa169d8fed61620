#include <doctest.h>

#include "oracles.hpp"
#include "properties.hpp"
#include "ssbm/metrics.hpp"

using namespace ssbm;
using doctest::Approx;

TEST_CASE("identical and relabeled labelings score one") {
    const std::vector<Block> a{0, 0, 1, 1, 2};
    const std::vector<Block> b{2, 2, 0, 0, 1};
    CHECK(ari(a, a) == Approx(1.0));
    CHECK(ari(a, b) == Approx(1.0));
}

TEST_CASE("four-item example matches pair enumeration") {
    const std::vector<Block> a{1, 1, 2, 2};
    const std::vector<Block> b{1, 2, 1, 2};
    CHECK(ari(a, b) == Approx(oracle::pair_ari(a, b)));
    CHECK(ari(a, b) == Approx(-0.5));
}

TEST_CASE("ari input checks") {
    const std::vector<Block> a{0, 1, 0};
    const std::vector<Block> b{0, 1};
    CHECK_THROWS_AS(ari(a, b), std::invalid_argument);
    const std::vector<Block> single{0};
    CHECK_THROWS_AS(ari(single, single), std::invalid_argument);
}

TEST_CASE("constant against varied labels scores zero") {
    const std::vector<Block> a{0, 0, 0, 0};
    const std::vector<Block> b{0, 1, 0, 1};
    CHECK(ari(a, b) == Approx(0.0));
}

TEST_CASE("independent random labelings average near zero") {
    oracle::Rng rng(3);
    std::uniform_int_distribution<Block> label(0, 3);
    double sum = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<Block> a(100), b(100);
        for (auto& x : a) x = label(rng);
        for (auto& x : b) x = label(rng);
        sum += ari(a, b);
    }
    CHECK(std::abs(sum / 200) < 0.01);
}

TEST_CASE("shared ARI of the truth is one") {
    const auto inst = generate(PlantedParams::uniform(2, 40, 4, 2, 5));
    CHECK(shared_ari(inst.true_partitions, inst.true_mapping, inst.true_partitions, inst.true_mapping) == 1.0);
}

TEST_CASE("shared ARI with everything shared") {
    const auto inst = generate(PlantedParams::uniform(2, 20, 3, 3, 5));
    const auto all = SharedMapping::identity_prefix(2, 3);
    CHECK(shared_ari(inst.true_partitions, all, inst.true_partitions, all) == 1.0);
    const auto none = SharedMapping::none(2);
    CHECK(shared_ari(inst.true_partitions, none, inst.true_partitions, all) == 0.0);
}

TEST_CASE("shared labels pool graphs") {
    const std::vector<Partition> ps{Partition(3, {0, 1, 2}), Partition(2, {1, 0})};
    SharedMapping m;
    m.shared = 1;
    m.maps = {{2}, {0}};
    CHECK(shared_labels(ps, m) == std::vector<Block>{0, 0, 1, 0, 1});
}

TEST_CASE("exact selection on true partitions recovers the shared blocks") {
    int perfect = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto inst = generate(PlantedParams::uniform(2, 300, 5, 3, seed));
        const auto counts = props::counts_of(inst.graphs, inst.true_partitions);
        const auto sel = select_exact(counts, 3);
        perfect += shared_ari(inst.true_partitions, sel.mapping, inst.true_partitions, inst.true_mapping) == 1.0;
    }
    CHECK(perfect >= 4);
}

TEST_CASE("evaluation report") {
    const auto inst = generate(PlantedParams::uniform(2, 30, 3, 1, 7));
    const auto r = evaluate(inst.true_partitions, inst.true_mapping, inst.true_partitions, inst.true_mapping);
    CHECK(r.partition_ari == std::vector<double>{1.0, 1.0});
    CHECK(r.mean_partition_ari == 1.0);
    CHECK(r.shared_ari == 1.0);
}

TEST_CASE("aggregates") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK_THROWS_AS(median({}), std::invalid_argument);
    const std::vector<double> xs{1.0, 2.0, 6.0};
    CHECK(mean(xs) == 3.0);
}

TEST_CASE("property: ARI axioms") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) CHECK(props::ari_axioms(seed) == "");
}

TEST_CASE("property: shared ARI ignores role order") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(props::shared_ari_ignores_role_order(seed) == "");
}
