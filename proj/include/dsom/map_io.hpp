#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dsom/som.hpp"

namespace dsom {

/// Everything a trained-map file holds. Enough to redraw the map without the
/// dissimilarity matrix.
struct MapFile {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Connectivity connectivity = Connectivity::four;
    TrainConfig config;
    TemperatureSchedule schedule;
    double energy = 0.0;
    EnergyComponents components;
    double initial_energy = 0.0;
    std::size_t restart = 0;
    std::vector<double> energy_trace;
    std::vector<std::string> labels;  // one per observation
    std::vector<NeuronId> assignment;
    PrototypeSets prototypes;

    std::size_t num_neurons() const { return rows * cols; }
    std::vector<std::size_t> class_sizes() const;
};

MapFile to_map_file(const TrainedMap& map, const std::vector<std::string>& labels);

/// JSON document tagged "dsom-map v1".
void write_map(std::ostream& out, const MapFile& map);
MapFile read_map(std::istream& in);

/// Grid of cells, one per neuron, with prototype labels and class size.
/// `transpose` swaps the on-screen rows and columns.
void export_text(std::ostream& out, const MapFile& map, bool transpose = false);
void export_svg(std::ostream& out, const MapFile& map, bool transpose = false);
/// "label,neuron,row,col", one row per observation.
void export_csv(std::ostream& out, const MapFile& map);

}  // namespace dsom
