#include "dsom/cylinder.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace dsom {

namespace {

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PointSet sample_cylinder(std::size_t n, double radius, double height, std::uint64_t seed) {
    if (!(radius > 0.0) || !(height > 0.0)) throw std::invalid_argument("cylinder needs positive size");
    std::mt19937_64 rng(seed);
    PointSet set;
    set.labels.reserve(n);
    set.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double angle = 2.0 * std::numbers::pi * unit_uniform(rng);
        const double z = height * unit_uniform(rng);
        set.labels.push_back("p" + std::to_string(i));
        set.points.push_back({radius * std::cos(angle), radius * std::sin(angle), z});
    }
    return set;
}

CylinderDemoResult run_cylinder_demo(const CylinderDemoOptions& options) {
    PointSet points = sample_cylinder(options.n, options.radius, options.height, options.train.seed);
    DissimMatrix matrix = squared_euclidean_matrix(points.points, points.labels);
    const MapGraph grid = build_grid(options.rows, options.cols);
    TrainedMap map = train(matrix, grid, options.train);
    const double correlation = topographic_correlation(map.state, matrix, grid);
    const auto sizes = class_sizes(map.state, grid.num_neurons());
    std::size_t nonempty = 0;
    for (std::size_t s : sizes) nonempty += (s > 0);
    const double fraction = static_cast<double>(nonempty) / static_cast<double>(sizes.size());
    return {std::move(points), std::move(matrix), std::move(map), correlation, fraction};
}

}  // namespace dsom
