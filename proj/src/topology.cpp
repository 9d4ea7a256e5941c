#include "dsom/topology.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace dsom {

MapGraph MapGraph::from_edges(std::size_t num_neurons,
                              std::vector<std::pair<NeuronId, NeuronId>> edges) {
    if (num_neurons == 0) {
        throw std::invalid_argument("map graph needs at least one neuron");
    }
    for (auto& [a, b] : edges) {
        if (a >= num_neurons || b >= num_neurons) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        if (a == b) {
            throw std::invalid_argument("self loop on neuron " + std::to_string(a));
        }
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    MapGraph g;
    g.num_neurons_ = num_neurons;
    g.edges_ = std::move(edges);
    g.compute_distances();
    return g;
}

void MapGraph::compute_distances() {
    const std::size_t m = num_neurons_;
    std::vector<std::vector<NeuronId>> adjacency(m);
    for (const auto& [a, b] : edges_) {
        adjacency[a].push_back(b);
        adjacency[b].push_back(a);
    }

    dist_.assign(m * m, -1);
    std::deque<NeuronId> queue;
    for (NeuronId source = 0; source < m; ++source) {
        int* row = dist_.data() + source * m;
        row[source] = 0;
        queue.push_back(source);
        while (!queue.empty()) {
            const NeuronId u = queue.front();
            queue.pop_front();
            for (NeuronId v : adjacency[u]) {
                if (row[v] < 0) {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    if (std::find(dist_.begin(), dist_.end(), -1) != dist_.end()) {
        throw std::invalid_argument("map graph is not connected");
    }
    max_dist_ = *std::max_element(dist_.begin(), dist_.end());
}

GridPosition MapGraph::position(NeuronId c) const {
    if (c >= num_neurons_) throw std::invalid_argument("neuron id out of range");
    if (layout_.empty()) return {0, c};
    return layout_[c];
}

MapGraph build_grid(std::size_t rows, std::size_t cols, Connectivity connectivity) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("grid dimensions must be positive");
    }
    std::vector<std::pair<NeuronId, NeuronId>> edges;
    auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
            if (connectivity == Connectivity::eight && r + 1 < rows) {
                if (c + 1 < cols) edges.emplace_back(id(r, c), id(r + 1, c + 1));
                if (c > 0) edges.emplace_back(id(r, c), id(r + 1, c - 1));
            }
        }
    }
    MapGraph g = MapGraph::from_edges(rows * cols, std::move(edges));
    g.rows_ = rows;
    g.cols_ = cols;
    g.connectivity_ = connectivity;
    g.layout_.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) g.layout_.push_back({r, c});
    }
    return g;
}

int graph_distance(const MapGraph& g, NeuronId c, NeuronId r) {
    if (c >= g.num_neurons() || r >= g.num_neurons()) {
        throw std::invalid_argument("neuron id out of range");
    }
    return g.dist(c, r);
}

}  // namespace dsom
