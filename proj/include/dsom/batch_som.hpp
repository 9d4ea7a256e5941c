#pragma once

#include <optional>
#include <vector>

#include "dsom/som.hpp"

namespace dsom {

using Vector = std::vector<double>;

struct BatchSomResult {
    std::vector<Vector> prototypes;
    std::vector<NeuronId> assignment;
    std::vector<double> energy_trace;
};

/// Vector batch SOM with the Heskes assignment rule and the kernel-weighted
/// mean update. Prototypes start at M distinct data points drawn with
/// cfg.seed unless `initial` is given. Only cfg.num_steps, kernel, t_init,
/// t_final and seed are used.
///
/// A neuron whose total kernel weight is zero (possible with the threshold
/// kernel when its class is empty) keeps its previous prototype.
BatchSomResult classic_batch_som(const std::vector<Vector>& points, const MapGraph& g,
                                 const TrainConfig& cfg,
                                 std::optional<std::vector<Vector>> initial = std::nullopt);

}  // namespace dsom
