#pragma once

#include <cstdint>

#include "dsom/dissim.hpp"
#include "dsom/som.hpp"

namespace dsom {

/// Points uniform on the lateral surface of a cylinder with axis z:
/// angle uniform in [0, 2 pi), height uniform in [0, height).
PointSet sample_cylinder(std::size_t n, double radius, double height, std::uint64_t seed);

struct CylinderDemoOptions {
    std::size_t n = 1000;
    double radius = 1.0;
    double height = 4.0;
    std::size_t rows = 21;
    std::size_t cols = 3;
    TrainConfig train;  // q = 1, L = 100, 5 restarts by default
};

struct CylinderDemoResult {
    PointSet points;
    DissimMatrix matrix;
    TrainedMap map;
    double rank_correlation = 0.0;   // grid distance vs prototype dissimilarity
    double nonempty_fraction = 0.0;  // neurons with at least one observation
};

/// Samples with train.seed, builds the squared Euclidean matrix and trains.
CylinderDemoResult run_cylinder_demo(const CylinderDemoOptions& options);

}  // namespace dsom
