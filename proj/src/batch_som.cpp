#include "dsom/batch_som.hpp"

#include <stdexcept>

namespace dsom {

namespace {

double squared_distance(const Vector& a, const Vector& b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        sum += diff * diff;
    }
    return sum;
}

}  // namespace

BatchSomResult classic_batch_som(const std::vector<Vector>& points, const MapGraph& g,
                                 const TrainConfig& cfg, std::optional<std::vector<Vector>> initial) {
    if (points.empty()) throw std::invalid_argument("no data");
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw std::invalid_argument("points have different dimensions");
    }
    const std::size_t num = g.num_neurons();
    const TemperatureSchedule sched = cfg.schedule(g);
    sched.validate();

    BatchSomResult result;
    if (initial) {
        if (initial->size() != num) throw std::invalid_argument("need one initial prototype per neuron");
        for (const auto& p : *initial) {
            if (p.size() != dim) throw std::invalid_argument("initial prototype has wrong dimension");
        }
        result.prototypes = std::move(*initial);
    } else {
        for (const auto& set : init_prototypes(cfg.seed, n, num, 1)) {
            result.prototypes.push_back(points[set.front()]);
        }
    }
    result.assignment.assign(n, 0);

    std::vector<double> dist(num * n);
    for (std::size_t l = 0; l < sched.num_steps; ++l) {
        const double t = temperature_at(sched, l);
        const std::vector<double> w = neighborhood_weights(g, cfg.kernel, t);

        for (NeuronId c = 0; c < num; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                dist[c * n + i] = squared_distance(result.prototypes[c], points[i]);
            }
        }
        // Assignment: argmin_r sum_c K(delta(r, c)) ||p_c - x||^2.
        for (std::size_t i = 0; i < n; ++i) {
            double best = 0.0;
            for (NeuronId r = 0; r < num; ++r) {
                double cost = 0.0;
                for (NeuronId c = 0; c < num; ++c) cost += w[r * num + c] * dist[c * n + i];
                if (r == 0 || cost < best) {
                    best = cost;
                    result.assignment[i] = r;
                }
            }
        }
        // Representation: kernel-weighted mean.
        for (NeuronId c = 0; c < num; ++c) {
            Vector acc(dim, 0.0);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double k = w[result.assignment[i] * num + c];
                if (k == 0.0) continue;
                total += k;
                for (std::size_t d = 0; d < dim; ++d) acc[d] += k * points[i][d];
            }
            if (total > 0.0) {
                for (double& v : acc) v /= total;
                result.prototypes[c] = std::move(acc);
            }
        }
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (NeuronId c = 0; c < num; ++c) {
                const double k = w[result.assignment[i] * num + c];
                if (k != 0.0) e += k * squared_distance(result.prototypes[c], points[i]);
            }
        }
        result.energy_trace.push_back(e);
    }
    return result;
}

}  // namespace dsom
