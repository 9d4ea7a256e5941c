#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace dsom {

using NeuronId = std::size_t;

enum class Connectivity { four, eight };

struct GridPosition {
    std::size_t row = 0;
    std::size_t col = 0;
};

/// The a-priori neuron structure: an undirected connected graph with its
/// shortest-path distance precomputed for every neuron pair.
///
/// Immutable once built.
class MapGraph {
public:
    /// Builds a graph from an explicit edge list. Throws std::invalid_argument
    /// on out-of-range endpoints, self loops or a disconnected graph.
    static MapGraph from_edges(std::size_t num_neurons,
                               std::vector<std::pair<NeuronId, NeuronId>> edges);

    std::size_t num_neurons() const { return num_neurons_; }
    const std::vector<std::pair<NeuronId, NeuronId>>& edges() const { return edges_; }

    /// Unchecked lookup for hot loops.
    int dist(NeuronId c, NeuronId r) const { return dist_[c * num_neurons_ + r]; }
    int max_dist() const { return max_dist_; }

    bool has_layout() const { return !layout_.empty(); }
    GridPosition position(NeuronId c) const;
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Connectivity connectivity() const { return connectivity_; }

private:
    friend MapGraph build_grid(std::size_t, std::size_t, Connectivity);

    MapGraph() = default;
    void compute_distances();

    std::size_t num_neurons_ = 0;
    std::vector<std::pair<NeuronId, NeuronId>> edges_;
    std::vector<int> dist_;
    int max_dist_ = 0;
    std::vector<GridPosition> layout_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Connectivity connectivity_ = Connectivity::four;
};

/// Rectangular rows x cols grid, neurons numbered in row-major order.
MapGraph build_grid(std::size_t rows, std::size_t cols,
                    Connectivity connectivity = Connectivity::four);

/// Bounds-checked distance lookup.
int graph_distance(const MapGraph& g, NeuronId c, NeuronId r);

}  // namespace dsom
