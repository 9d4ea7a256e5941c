#include <doctest.h>

#include <random>

#include "dsom/batch_som.hpp"

using namespace dsom;

TEST_CASE("single neuron lands on the mean after one step") {
    const std::vector<Vector> pts{{0, 0}, {2, 0}, {4, 6}};
    TrainConfig cfg;
    cfg.num_steps = 1;
    const auto r = classic_batch_som(pts, build_grid(1, 1), cfg);
    CHECK(r.prototypes[0][0] == doctest::Approx(2.0));
    CHECK(r.prototypes[0][1] == doctest::Approx(2.0));
    CHECK(r.assignment == std::vector<NeuronId>{0, 0, 0});
}

TEST_CASE("data equal to the prototypes is a fixed point") {
    const std::vector<Vector> pts{{0.0}, {10.0}, {20.0}};
    TrainConfig cfg;
    cfg.num_steps = 5;
    cfg.kernel = KernelKind::threshold;
    const auto r = classic_batch_som(pts, build_grid(1, 3), cfg, std::vector<Vector>{{0.0}, {10.0}, {20.0}});
    CHECK(r.assignment == std::vector<NeuronId>{0, 1, 2});
    CHECK(r.prototypes == pts);
    for (double e : r.energy_trace) CHECK(e == 0.0);
}

TEST_CASE("two separated clusters") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vector> pts;
    for (int k = 0; k < 10; ++k) pts.push_back({u(rng), u(rng)});
    for (int k = 0; k < 10; ++k) pts.push_back({100 + u(rng), 100 + u(rng)});
    TrainConfig cfg;
    cfg.num_steps = 30;
    cfg.t_init = 1.0;
    cfg.t_final = 0.1;
    const auto r = classic_batch_som(pts, build_grid(1, 2), cfg);
    auto inside = [](const Vector& p, double lo) {
        return p[0] >= lo && p[0] <= lo + 1 && p[1] >= lo && p[1] <= lo + 1;
    };
    const bool split = (inside(r.prototypes[0], 0) && inside(r.prototypes[1], 100)) ||
                       (inside(r.prototypes[0], 100) && inside(r.prototypes[1], 0));
    CHECK(split);
    CHECK(r.energy_trace.size() == 30);
}

TEST_CASE("bad input") {
    TrainConfig cfg;
    CHECK_THROWS_AS(classic_batch_som({}, build_grid(1, 1), cfg), std::invalid_argument);
    CHECK_THROWS_AS(classic_batch_som({{1.0}, {1.0, 2.0}}, build_grid(1, 1), cfg), std::invalid_argument);
    CHECK_THROWS_AS(classic_batch_som({{1.0}}, build_grid(1, 2), cfg), std::invalid_argument);
}
