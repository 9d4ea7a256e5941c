#include "dsom/map_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dsom/text.hpp"

namespace dsom {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* map_format = "dsom-map v1";

std::string cell_labels(const MapFile& map, NeuronId c) {
    std::string out;
    for (std::size_t k = 0; k < map.prototypes[c].size(); ++k) {
        if (k) out += ", ";
        out += map.labels[map.prototypes[c][k]];
    }
    return out;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

/// Neuron shown at display cell (row, col).
NeuronId neuron_at(const MapFile& map, std::size_t row, std::size_t col, bool transpose) {
    return transpose ? col * map.cols + row : row * map.cols + col;
}

}  // namespace

std::vector<std::size_t> MapFile::class_sizes() const {
    std::vector<std::size_t> sizes(num_neurons(), 0);
    for (NeuronId c : assignment) ++sizes.at(c);
    return sizes;
}

MapFile to_map_file(const TrainedMap& map, const std::vector<std::string>& labels) {
    if (!map.graph.has_layout()) throw std::invalid_argument("only grid maps can be written");
    if (labels.size() != map.state.assignment.size()) {
        throw std::invalid_argument("need one label per observation");
    }
    MapFile file;
    file.rows = map.graph.rows();
    file.cols = map.graph.cols();
    file.connectivity = map.graph.connectivity();
    file.config = map.config;
    file.config.initial_prototypes.reset();
    file.schedule = map.schedule;
    file.energy = map.energy;
    file.components = map.components;
    file.initial_energy = map.initial_energy;
    file.restart = map.restart;
    file.energy_trace = map.energy_trace;
    file.labels = labels;
    file.assignment = map.state.assignment;
    file.prototypes = map.state.prototypes;
    return file;
}

void write_map(std::ostream& out, const MapFile& map) {
    json doc;
    doc["format"] = map_format;
    doc["grid"] = {{"rows", map.rows},
                   {"cols", map.cols},
                   {"connectivity", map.connectivity == Connectivity::four ? 4 : 8}};
    doc["config"] = {{"kernel", std::string(to_string(map.config.kernel))},
                     {"steps", map.config.num_steps},
                     {"t_init", map.schedule.t_init},
                     {"t_final", map.schedule.t_final},
                     {"q", map.config.q},
                     {"restarts", map.config.restarts},
                     {"seed", map.config.seed}};
    doc["energy"] = {{"final", map.energy},
                     {"quantization", map.components.quantization},
                     {"topology", map.components.topology},
                     {"initial", map.initial_energy},
                     {"restart", map.restart},
                     {"trace", map.energy_trace}};
    const auto sizes = map.class_sizes();
    json neurons = json::array();
    for (NeuronId c = 0; c < map.num_neurons(); ++c) {
        json labels = json::array();
        for (std::size_t j : map.prototypes[c]) labels.push_back(map.labels[j]);
        neurons.push_back({{"id", c},
                           {"row", c / map.cols},
                           {"col", c % map.cols},
                           {"size", sizes[c]},
                           {"prototypes", map.prototypes[c]},
                           {"prototype_labels", labels}});
    }
    doc["neurons"] = std::move(neurons);
    json obs = json::array();
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
        obs.push_back({{"label", map.labels[i]}, {"neuron", map.assignment[i]}});
    }
    doc["observations"] = std::move(obs);
    out << doc.dump(1) << '\n';
}

MapFile read_map(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(std::string("map file is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format") != map_format) throw FormatError("not a dsom-map v1 file");
        MapFile map;
        map.rows = doc.at("grid").at("rows").get<std::size_t>();
        map.cols = doc.at("grid").at("cols").get<std::size_t>();
        map.connectivity =
            doc.at("grid").at("connectivity").get<int>() == 8 ? Connectivity::eight : Connectivity::four;
        const auto& cfg = doc.at("config");
        map.config.kernel = parse_kernel_kind(cfg.at("kernel").get<std::string>());
        map.config.num_steps = cfg.at("steps").get<std::size_t>();
        map.config.t_init = cfg.at("t_init").get<double>();
        map.config.t_final = cfg.at("t_final").get<double>();
        map.config.q = cfg.at("q").get<std::size_t>();
        map.config.restarts = cfg.at("restarts").get<std::size_t>();
        map.config.seed = cfg.at("seed").get<std::uint64_t>();
        map.schedule = {*map.config.t_init, map.config.t_final, map.config.num_steps};
        const auto& e = doc.at("energy");
        map.energy = e.at("final").get<double>();
        map.components = {e.at("quantization").get<double>(), e.at("topology").get<double>()};
        map.initial_energy = e.at("initial").get<double>();
        map.restart = e.at("restart").get<std::size_t>();
        map.energy_trace = e.at("trace").get<std::vector<double>>();
        for (const auto& o : doc.at("observations")) {
            map.labels.push_back(o.at("label").get<std::string>());
            map.assignment.push_back(o.at("neuron").get<NeuronId>());
        }
        const auto& neurons = doc.at("neurons");
        if (map.rows == 0 || map.cols == 0 || neurons.size() != map.rows * map.cols) {
            throw FormatError("neuron list does not match grid size");
        }
        for (const auto& n : neurons) map.prototypes.push_back(n.at("prototypes").get<std::vector<std::size_t>>());
        check_prototypes(map.prototypes, map.labels.size(), map.num_neurons());
        for (NeuronId c : map.assignment) {
            if (c >= map.num_neurons()) throw FormatError("observation assigned to unknown neuron");
        }
        return map;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed map file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("malformed map file: ") + e.what());
    }
}

void export_text(std::ostream& out, const MapFile& map, bool transpose) {
    const std::size_t rows = transpose ? map.cols : map.rows;
    const std::size_t cols = transpose ? map.rows : map.cols;
    const auto sizes = map.class_sizes();
    std::vector<std::string> cells(rows * cols);
    std::size_t width = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const NeuronId id = neuron_at(map, r, c, transpose);
            std::string cell = "c" + std::to_string(id) + " (" + std::to_string(sizes[id]) + "): " +
                               cell_labels(map, id);
            width = std::max(width, cell.size());
            cells[r * cols + c] = std::move(cell);
        }
    }
    out << "map " << map.rows << "x" << map.cols << ", " << map.num_neurons() << " neurons\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::string cell = cells[r * cols + c];
            if (c + 1 < cols) {
                cell.resize(width, ' ');
                out << cell << " | ";
            } else {
                out << cell;
            }
        }
        out << '\n';
    }
}

void export_svg(std::ostream& out, const MapFile& map, bool transpose) {
    constexpr int cell_w = 180;
    constexpr int cell_h = 90;
    constexpr int line_h = 14;
    const std::size_t rows = transpose ? map.cols : map.rows;
    const std::size_t cols = transpose ? map.rows : map.cols;
    const auto sizes = map.class_sizes();
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell_w << "\" height=\""
        << rows * cell_h << "\">\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const NeuronId id = neuron_at(map, r, c, transpose);
            const std::size_t x = c * cell_w;
            const std::size_t y = r * cell_h;
            out << "<g class=\"neuron\" data-id=\"" << id << "\">"
                << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\""
                << cell_h << "\" fill=\"" << (sizes[id] ? "#f4f4f4" : "#ffffff")
                << "\" stroke=\"#333\"/>";
            out << "<text x=\"" << x + 6 << "\" y=\"" << y + line_h << "\" font-size=\"11\" "
                << "font-family=\"sans-serif\">c" << id << " (n=" << sizes[id] << ")</text>";
            std::size_t line = 2;
            for (std::size_t j : map.prototypes[id]) {
                out << "<text x=\"" << x + 6 << "\" y=\"" << y + line * line_h
                    << "\" font-size=\"11\" font-family=\"sans-serif\" font-weight=\"bold\">"
                    << xml_escape(map.labels[j]) << "</text>";
                ++line;
            }
            out << "</g>\n";
        }
    }
    out << "</svg>\n";
}

void export_csv(std::ostream& out, const MapFile& map) {
    out << "label,neuron,row,col\n";
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
        const NeuronId c = map.assignment[i];
        out << text::quote_csv(map.labels[i]) << ',' << c << ',' << c / map.cols << ',' << c % map.cols
            << '\n';
    }
}

}  // namespace dsom
