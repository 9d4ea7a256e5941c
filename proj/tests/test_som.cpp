#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "dsom/som.hpp"
#include "oracles.hpp"

using namespace dsom;

namespace {

// Path 0 - 1 with observations 0, 1, 2 on a line: d(0,1)=1, d(1,2)=4, d(0,2)=9.
DissimMatrix three_points() {
    DissimMatrix m(3);
    m.set_symmetric(0, 1, 1.0);
    m.set_symmetric(1, 2, 4.0);
    m.set_symmetric(0, 2, 9.0);
    return m;
}

SomState state(std::vector<NeuronId> f, PrototypeSets p) {
    SomState s;
    s.assignment = std::move(f);
    s.prototypes = std::move(p);
    return s;
}

}  // namespace

TEST_CASE("init_prototypes draws disjoint sets") {
    SUBCASE("N = M = 4 gives a permutation") {
        const auto sets = init_prototypes(7, 4, 4, 1);
        std::set<std::size_t> seen;
        for (const auto& s : sets) {
            REQUIRE(s.size() == 1);
            seen.insert(s[0]);
        }
        CHECK(seen == std::set<std::size_t>{0, 1, 2, 3});
    }
    SUBCASE("N=10, M=3, q=2") {
        const auto sets = init_prototypes(11, 10, 3, 2);
        std::set<std::size_t> seen;
        for (const auto& s : sets) {
            CHECK(s.size() == 2);
            seen.insert(s.begin(), s.end());
        }
        CHECK(seen.size() == 6);
        CHECK_NOTHROW(check_prototypes(sets, 10, 3));
    }
    SUBCASE("same seed, same sets; other seed usually differs") {
        CHECK(init_prototypes(5, 50, 6, 3) == init_prototypes(5, 50, 6, 3));
        CHECK(init_prototypes(5, 50, 6, 3) != init_prototypes(6, 50, 6, 3));
    }
    SUBCASE("too many prototypes") { CHECK_THROWS_AS(init_prototypes(1, 5, 3, 2), std::invalid_argument); }
}

TEST_CASE("init_prototypes samples every index about equally often") {
    std::vector<int> hits(8, 0);
    for (std::uint64_t seed = 0; seed < 4000; ++seed) {
        for (const auto& s : init_prototypes(seed, 8, 2, 1)) ++hits[s[0]];
    }
    for (int h : hits) CHECK(std::abs(h - 1000) < 150);
}

TEST_CASE("uniform_below stays in range") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 1000; ++k) CHECK(uniform_below(rng, 7) < 7);
    CHECK_THROWS(uniform_below(rng, 0));
}

TEST_CASE("check_prototypes rejects broken sets") {
    CHECK_THROWS_AS(check_prototypes({{0}, {0}}, 3, 2), std::invalid_argument);
    CHECK_THROWS_AS(check_prototypes({{0}, {5}}, 3, 2), std::invalid_argument);
    CHECK_THROWS_AS(check_prototypes({{0}, {1, 2}}, 3, 2), std::invalid_argument);
    CHECK_THROWS_AS(check_prototypes({{0}}, 3, 2), std::invalid_argument);
}

TEST_CASE("gamma on the three point instance") {
    const DissimMatrix m = three_points();
    const MapGraph g = build_grid(1, 2);
    const SomState s = state({0, 0, 1}, {{0}, {2}});
    const double expected = 1.0 + 4.0 * std::exp(-1.0);
    CHECK(gamma(1, 0, s, m, g, KernelKind::gaussian, 1.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(2.47152).epsilon(1e-5));
    CHECK(gamma(1, 0, s, m, g, KernelKind::gaussian, 1.0) ==
          doctest::Approx(oracle::gamma(m, g, s.prototypes, KernelKind::gaussian, 1.0, 1, 0)));
}

TEST_CASE("gamma special cases") {
    const DissimMatrix m = three_points();
    SUBCASE("single neuron sums the prototype set") {
        const MapGraph g = build_grid(1, 1);
        const SomState s = state({0, 0, 0}, {{0, 2}});
        CHECK(gamma(1, 0, s, m, g, KernelKind::gaussian, 0.7) == doctest::Approx(5.0));
    }
    SUBCASE("threshold kernel keeps the own term") {
        const MapGraph g = build_grid(1, 2);
        const SomState s = state({0, 0, 1}, {{0}, {2}});
        CHECK(gamma(1, 0, s, m, g, KernelKind::threshold, 1.0) == 1.0);
        CHECK(gamma(1, 1, s, m, g, KernelKind::threshold, 1.0) == 4.0);
    }
}

TEST_CASE("energy of the three point instance") {
    const DissimMatrix m = three_points();
    const MapGraph g = build_grid(1, 2);
    const SomState s = state({0, 0, 1}, {{0}, {2}});
    const double e = energy(s, m, g, KernelKind::gaussian, 1.0);
    CHECK(e == doctest::Approx(1.0 + 22.0 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(e == doctest::Approx(9.09334).epsilon(1e-5));
    double by_gamma = 0.0;
    for (std::size_t i = 0; i < 3; ++i) by_gamma += gamma(i, s.assignment[i], s, m, g, KernelKind::gaussian, 1.0);
    CHECK(e == doctest::Approx(by_gamma).epsilon(1e-12));
    CHECK(e == doctest::Approx(oracle::energy(m, g, s, KernelKind::gaussian, 1.0)).epsilon(1e-12));
}

TEST_CASE("energy special cases") {
    SUBCASE("zero matrix") {
        const DissimMatrix m(5);
        const MapGraph g = build_grid(2, 2);
        const SomState s = state({0, 1, 2, 3, 0}, {{0}, {1}, {2}, {3}});
        const auto parts = energy_components(s, m, g, KernelKind::gaussian, 2.0);
        CHECK(parts.quantization == 0.0);
        CHECK(parts.topology == 0.0);
    }
    SUBCASE("every observation its own prototype, threshold kernel") {
        std::mt19937_64 rng(1);
        const DissimMatrix m = oracle::random_matrix(rng, 4);
        const MapGraph g = build_grid(2, 2);
        const SomState s = state({0, 1, 2, 3}, {{0}, {1}, {2}, {3}});
        CHECK(energy(s, m, g, KernelKind::threshold, 1.0) == 0.0);
    }
    SUBCASE("threshold kernel has no topology term") {
        std::mt19937_64 rng(2);
        const DissimMatrix m = oracle::random_matrix(rng, 9);
        const MapGraph g = build_grid(1, 3);
        const SomState s = state({0, 1, 2, 0, 1, 2, 0, 1, 2}, {{3}, {4}, {8}});
        const auto parts = energy_components(s, m, g, KernelKind::threshold, 0.5);
        CHECK(parts.topology == 0.0);
        CHECK(parts.quantization == doctest::Approx(oracle::quantization(m, s)));
    }
    SUBCASE("single neuron, q = 1") {
        std::mt19937_64 rng(3);
        const DissimMatrix m = oracle::random_matrix(rng, 6);
        const MapGraph g = build_grid(1, 1);
        const SomState s = state({0, 0, 0, 0, 0, 0}, {{2}});
        double expected = 0.0;
        for (std::size_t i = 0; i < 6; ++i) expected += m(i, 2);
        const auto parts = energy_components(s, m, g, KernelKind::gaussian, 1.0);
        CHECK(parts.quantization == doctest::Approx(expected));
        CHECK(parts.topology == 0.0);
    }
}

TEST_CASE("energy decomposition matches brute force on random states") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 6 + rng() % 20;
        const std::size_t num = 1 + rng() % 5;
        const std::size_t q = 1 + rng() % 2;
        if (num * q > n) continue;
        const DissimMatrix m = oracle::random_matrix(rng, n, 10.0);
        const MapGraph g = oracle::random_graph(rng, num);
        SomState s;
        s.prototypes = init_prototypes(rng(), n, num, q);
        for (std::size_t i = 0; i < n; ++i) s.assignment.push_back(rng() % num);
        const double t = 0.2 + (rng() % 100) / 25.0;
        const auto parts = energy_components(s, m, g, KernelKind::gaussian, t);
        const double e = oracle::energy(m, g, s, KernelKind::gaussian, t);
        CHECK(parts.total() == doctest::Approx(e).epsilon(1e-9));
        CHECK(parts.quantization == doctest::Approx(oracle::quantization(m, s)).epsilon(1e-9));
        CHECK(parts.topology >= 0.0);
    }
}

TEST_CASE("assign_all") {
    SUBCASE("all ties go to neuron 0") {
        const DissimMatrix m(6);
        const MapGraph g = build_grid(2, 2);
        const SomState s = state({}, {{0}, {1}, {2}, {3}});
        CHECK(assign_all(s, m, g, KernelKind::gaussian, 1.0) == std::vector<NeuronId>(6, 0));
    }
    SUBCASE("a sole prototype lands on its neuron under the threshold kernel") {
        std::mt19937_64 rng(9);
        const DissimMatrix m = oracle::random_matrix(rng, 8);
        const MapGraph g = build_grid(1, 4);
        const SomState s = state({}, {{5}, {2}, {7}, {0}});
        const auto f = assign_all(s, m, g, KernelKind::threshold, 1.0);
        CHECK(f[5] == 0);
        CHECK(f[2] == 1);
        CHECK(f[7] == 2);
        CHECK(f[0] == 3);
    }
    SUBCASE("six points, two neurons against enumeration") {
        std::mt19937_64 rng(10);
        for (int trial = 0; trial < 20; ++trial) {
            const DissimMatrix m = oracle::random_matrix(rng, 6);
            const MapGraph g = build_grid(1, 2);
            const SomState s = state({}, init_prototypes(rng(), 6, 2, 1));
            CHECK(assign_all(s, m, g, KernelKind::gaussian, 0.8) ==
                  oracle::assign(m, g, s.prototypes, KernelKind::gaussian, 0.8));
        }
    }
}

TEST_CASE("represent_all") {
    SUBCASE("single neuron picks the medoid") {
        std::mt19937_64 rng(12);
        const DissimMatrix m = oracle::random_matrix(rng, 9);
        const MapGraph g = build_grid(1, 1);
        const SomState s = state(std::vector<NeuronId>(9, 0), {{0}});
        std::size_t medoid = 0;
        double best = 1e300;
        for (std::size_t x = 0; x < 9; ++x) {
            double sum = 0.0;
            for (std::size_t i = 0; i < 9; ++i) sum += m(i, x);
            if (sum < best) {
                best = sum;
                medoid = x;
            }
        }
        CHECK(represent_all(s, m, g, KernelKind::gaussian, 1.0) == PrototypeSets{{medoid}});
    }
    SUBCASE("equal costs hand out indices in order") {
        const DissimMatrix m(8);
        const MapGraph g = build_grid(1, 3);
        const SomState s = state({0, 1, 2, 0, 1, 2, 0, 1}, {{7, 6}, {5, 4}, {3, 2}});
        CHECK(represent_all(s, m, g, KernelKind::gaussian, 1.0) == PrototypeSets{{0, 1}, {2, 3}, {4, 5}});
    }
    SUBCASE("N=7, M=2, q=2 against exhaustive search") {
        std::mt19937_64 rng(13);
        for (int trial = 0; trial < 20; ++trial) {
            const DissimMatrix m = oracle::random_matrix(rng, 7);
            const MapGraph g = build_grid(1, 2);
            std::vector<NeuronId> f;
            for (int i = 0; i < 7; ++i) f.push_back(rng() % 2);
            const SomState s = state(f, {{0, 1}, {2, 3}});
            CHECK(oracle::sorted_sets(represent_all(s, m, g, KernelKind::gaussian, 0.9)) ==
                  oracle::represent(m, g, f, 2, KernelKind::gaussian, 0.9));
        }
    }
    SUBCASE("sets keep the cheapest first") {
        std::mt19937_64 rng(14);
        const DissimMatrix m = oracle::random_matrix(rng, 12);
        const MapGraph g = build_grid(1, 2);
        std::vector<NeuronId> f;
        for (int i = 0; i < 12; ++i) f.push_back(i % 2);
        const SomState s = state(f, {{0, 1, 2}, {3, 4, 5}});
        const auto sets = represent_all(s, m, g, KernelKind::gaussian, 1.0);
        const auto costs = representation_costs(f, m, g, KernelKind::gaussian, 1.0);
        for (NeuronId c = 0; c < 2; ++c) {
            for (std::size_t k = 1; k < sets[c].size(); ++k) {
                CHECK(costs[c * 12 + sets[c][k - 1]] <= costs[c * 12 + sets[c][k]]);
            }
        }
    }
}

TEST_CASE("partial-sum costs equal the triple loop") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + rng() % 60;
        const std::size_t num = 1 + rng() % 9;
        const DissimMatrix m = oracle::random_matrix(rng, n, 5.0);
        const MapGraph g = oracle::random_graph(rng, num);
        std::vector<NeuronId> f;
        for (std::size_t i = 0; i < n; ++i) f.push_back(rng() % num);
        const auto fast = representation_costs(f, m, g, KernelKind::gaussian, 1.3);
        for (NeuronId c = 0; c < num; ++c) {
            for (std::size_t x = 0; x < n; ++x) {
                CHECK(fast[c * n + x] ==
                      doctest::Approx(oracle::candidate_cost(m, g, f, KernelKind::gaussian, 1.3, c, x))
                          .epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("assignment never raises the energy") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 6 + rng() % 20;
        const std::size_t num = 2 + rng() % 4;
        const DissimMatrix m = oracle::random_matrix(rng, n);
        const MapGraph g = oracle::random_graph(rng, num);
        const double t = 0.5 + (rng() % 10) / 5.0;
        SomState s = state({}, init_prototypes(rng(), n, num, 1));
        for (std::size_t i = 0; i < n; ++i) s.assignment.push_back(rng() % num);
        for (int step = 0; step < 5; ++step) {
            const double before = energy(s, m, g, KernelKind::gaussian, t);
            s.assignment = assign_all(s, m, g, KernelKind::gaussian, t);
            CHECK(energy(s, m, g, KernelKind::gaussian, t) <= before + 1e-9);
            s.prototypes = represent_all(s, m, g, KernelKind::gaussian, t);
        }
    }
}

TEST_CASE("representation without claim collisions never raises the energy") {
    // When every neuron's unconstrained best q-set is free, sequential claiming
    // changes nothing and the step is exact minimisation.
    std::mt19937_64 rng(22);
    int collision_free = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 8 + rng() % 20;
        const std::size_t num = 2 + rng() % 3;
        const std::size_t q = 1 + rng() % 2;
        const DissimMatrix m = oracle::random_matrix(rng, n);
        const MapGraph g = oracle::random_graph(rng, num);
        SomState s = state({}, init_prototypes(rng(), n, num, q));
        s.assignment = assign_all(s, m, g, KernelKind::gaussian, 1.0);
        const auto costs = representation_costs(s.assignment, m, g, KernelKind::gaussian, 1.0);
        std::set<std::size_t> wanted;
        for (NeuronId c = 0; c < num; ++c) {
            std::vector<std::size_t> order(n);
            for (std::size_t x = 0; x < n; ++x) order[x] = x;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return costs[c * n + a] < costs[c * n + b];
            });
            wanted.insert(order.begin(), order.begin() + q);
        }
        if (wanted.size() != num * q) continue;
        ++collision_free;
        const double before = energy(s, m, g, KernelKind::gaussian, 1.0);
        s.prototypes = represent_all(s, m, g, KernelKind::gaussian, 1.0);
        CHECK(energy(s, m, g, KernelKind::gaussian, 1.0) <= before + 1e-9);
    }
    CHECK(collision_free > 10);
}

TEST_CASE("train") {
    SUBCASE("N = M*q under the threshold kernel reaches zero and stays there") {
        std::mt19937_64 rng(17);
        const DissimMatrix m = oracle::random_matrix(rng, 6);
        const MapGraph g = build_grid(2, 3);
        TrainConfig cfg;
        cfg.kernel = KernelKind::threshold;
        cfg.num_steps = 5;
        cfg.restarts = 2;
        const TrainedMap map = train(m, g, cfg);
        CHECK(map.energy == 0.0);
        for (double e : map.energy_trace) CHECK(e == 0.0);
    }
    SUBCASE("constant temperature gives a non-increasing trace that settles") {
        std::mt19937_64 rng(18);
        const DissimMatrix m = oracle::random_matrix(rng, 25);
        const MapGraph g = build_grid(2, 3);
        TrainConfig cfg;
        cfg.t_init = 0.8;
        cfg.t_final = 0.8;
        cfg.num_steps = 40;
        cfg.restarts = 1;
        const TrainedMap map = train(m, g, cfg);
        for (std::size_t l = 1; l < map.energy_trace.size(); ++l) {
            CHECK(map.energy_trace[l] <= map.energy_trace[l - 1] + 1e-9);
        }
        CHECK(map.energy_trace.back() == map.energy_trace[map.energy_trace.size() - 2]);
    }
    SUBCASE("stored energy matches a fresh evaluation") {
        std::mt19937_64 rng(19);
        const DissimMatrix m = oracle::random_matrix(rng, 30);
        const MapGraph g = build_grid(2, 2);
        TrainConfig cfg;
        cfg.num_steps = 15;
        cfg.q = 2;
        const TrainedMap map = train(m, g, cfg);
        CHECK(map.energy ==
              doctest::Approx(oracle::energy(m, g, map.state, cfg.kernel, cfg.t_final)).epsilon(1e-9));
        CHECK(map.components.total() == doctest::Approx(map.energy).epsilon(1e-9));
        CHECK(map.energy_trace.size() == 15);
        CHECK(map.state.temperature == cfg.t_final);
        CHECK_NOTHROW(check_prototypes(map.state.prototypes, 30, 4));
    }
    SUBCASE("keeps the best restart") {
        std::mt19937_64 rng(20);
        const DissimMatrix m = oracle::random_matrix(rng, 30);
        const MapGraph g = build_grid(2, 2);
        TrainConfig cfg;
        cfg.num_steps = 10;
        cfg.restarts = 4;
        const TrainedMap best = train(m, g, cfg);
        for (std::size_t r = 0; r < 4; ++r) {
            TrainConfig one = cfg;
            one.restarts = 1;
            one.seed = cfg.seed + r;
            const TrainedMap single = train(m, g, one);
            CHECK(best.energy <= single.energy);
            if (r == best.restart) CHECK(single.state == best.state);
        }
    }
    SUBCASE("deterministic") {
        std::mt19937_64 rng(21);
        const DissimMatrix m = oracle::random_matrix(rng, 40);
        const MapGraph g = build_grid(3, 3);
        TrainConfig cfg;
        cfg.num_steps = 10;
        const TrainedMap a = train(m, g, cfg);
        const TrainedMap b = train(m, g, cfg);
        CHECK(a.state == b.state);
        CHECK(a.energy_trace == b.energy_trace);
    }
    SUBCASE("rejects bad input") {
        DissimMatrix bad(4);
        bad(0, 1) = 1.0;
        bad(1, 0) = 2.0;
        TrainConfig cfg;
        CHECK_THROWS_AS(train(bad, build_grid(1, 2), cfg), std::invalid_argument);
        CHECK_THROWS_AS(train(DissimMatrix(3), build_grid(2, 2), cfg), std::invalid_argument);
        cfg.restarts = 0;
        CHECK_THROWS_AS(train(DissimMatrix(5), build_grid(1, 2), cfg), std::invalid_argument);
    }
    SUBCASE("default initial temperature is half the diameter") {
        TrainConfig cfg;
        CHECK(cfg.schedule(build_grid(5, 4)).t_init == 3.5);
        CHECK(cfg.schedule(build_grid(1, 1)).t_init == cfg.t_final);
    }
}

TEST_CASE("rank correlation") {
    CHECK(rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(rank_correlation({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(rank_correlation({1, 1, 1}, {1, 2, 3}) == 0.0);
    // Ties use average ranks: x ranks (1.5, 1.5, 3), y ranks (1, 2, 3).
    CHECK(rank_correlation({5, 5, 9}, {1, 2, 3}) == doctest::Approx(0.8660254037844386));
}

TEST_CASE("topographic correlation of a perfectly ordered chain") {
    // Points on a line, one prototype per neuron in order.
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 6; ++i) pts.push_back({static_cast<double>(i)});
    const DissimMatrix m = squared_euclidean_matrix(pts);
    const MapGraph g = build_grid(1, 6);
    const SomState s = state({0, 1, 2, 3, 4, 5}, {{0}, {1}, {2}, {3}, {4}, {5}});
    CHECK(topographic_correlation(s, m, g) == doctest::Approx(1.0));
    CHECK(class_sizes(s, 6) == std::vector<std::size_t>(6, 1));
}

TEST_CASE("relabelling observations relabels the trained map") {
    std::mt19937_64 rng(30);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 12 + rng() % 20;
        const DissimMatrix m = oracle::random_matrix(rng, n);
        const MapGraph g = build_grid(2, 3);
        std::vector<std::size_t> pi(n);
        for (std::size_t i = 0; i < n; ++i) pi[i] = i;
        std::shuffle(pi.begin(), pi.end(), rng);
        DissimMatrix mp(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) mp(pi[i], pi[j]) = m(i, j);

        TrainConfig cfg;
        cfg.num_steps = 20;
        cfg.q = 1 + trial % 2;
        cfg.initial_prototypes = init_prototypes(rng(), n, g.num_neurons(), cfg.q);
        TrainConfig cfgp = cfg;
        for (auto& set : *cfgp.initial_prototypes)
            for (auto& j : set) j = pi[j];

        const TrainedMap a = train(m, g, cfg);
        const TrainedMap b = train(mp, g, cfgp);
        for (std::size_t i = 0; i < n; ++i) CHECK(b.state.assignment[pi[i]] == a.state.assignment[i]);
        for (NeuronId c = 0; c < g.num_neurons(); ++c) {
            std::vector<std::size_t> mapped;
            for (std::size_t j : a.state.prototypes[c]) mapped.push_back(pi[j]);
            CHECK(mapped == b.state.prototypes[c]);
        }
        CHECK(b.energy == doctest::Approx(a.energy).epsilon(1e-12));
    }
}

TEST_CASE("every step keeps disjoint prototypes and a partition") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 10 + rng() % 30;
        const std::size_t num = 1 + rng() % 6;
        const std::size_t q = 1 + rng() % 3;
        if (num * q > n) continue;
        const DissimMatrix m = oracle::random_matrix(rng, n);
        const MapGraph g = oracle::random_graph(rng, num);
        SomState s = state({}, init_prototypes(rng(), n, num, q));
        for (int step = 0; step < 8; ++step) {
            batch_iteration(s, m, g, step % 2 ? KernelKind::threshold : KernelKind::gaussian, 2.0 / (step + 1));
            CHECK_NOTHROW(check_prototypes(s.prototypes, n, num));
            REQUIRE(s.assignment.size() == n);
            for (NeuronId f : s.assignment) CHECK(f < num);
            for (const auto& set : s.prototypes) CHECK(set.size() == q);
        }
    }
}
