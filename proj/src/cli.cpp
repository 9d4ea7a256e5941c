#include "dsom/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsom/cylinder.hpp"
#include "dsom/dissim.hpp"
#include "dsom/map_io.hpp"
#include "dsom/som.hpp"
#include "dsom/text.hpp"
#include "dsom/weblog.hpp"

namespace dsom {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using weblog::IoError;

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string fmt(double v) { return text::format_double(v); }

struct GridSpec {
    std::size_t rows = 0;
    std::size_t cols = 0;
};

GridSpec parse_grid(const std::string& s) {
    const auto x = s.find_first_of("xX");
    if (x == std::string::npos) throw UsageError("grid must look like ROWSxCOLS, got '" + s + "'");
    try {
        const long long r = text::parse_integer(s.substr(0, x));
        const long long c = text::parse_integer(s.substr(x + 1));
        if (r < 1 || c < 1) throw std::invalid_argument("nonpositive");
        return {static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
    } catch (const std::invalid_argument&) {
        throw UsageError("grid must look like ROWSxCOLS, got '" + s + "'");
    }
}

Connectivity parse_connectivity(int n) {
    if (n == 4) return Connectivity::four;
    if (n == 8) return Connectivity::eight;
    throw UsageError("connectivity must be 4 or 8");
}

/// Reads "key = value" lines ('#' starts a comment) into "--key=value" arguments.
std::vector<std::string> config_arguments(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<std::string> args;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string_view body = text::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError(path + ":" + std::to_string(number) + ": expected key = value");
        }
        const std::string key(text::trim(body.substr(0, eq)));
        const std::string value(text::trim(body.substr(eq + 1)));
        if (key.empty()) throw UsageError(path + ":" + std::to_string(number) + ": empty key");
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

/// Pulls "--config FILE" out of the argument list and splices the file's
/// settings in front of the remaining flags, so explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string path;
        std::size_t span = 0;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            path = args[i + 1];
            span = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            span = 1;
        } else {
            continue;
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                   args.begin() + static_cast<std::ptrdiff_t>(i + span));
        const auto extra = config_arguments(path);
        // Right after the subcommand name.
        const std::size_t at = std::min<std::size_t>(2, args.size());
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
        return args;
    }
    return args;
}

// preprocess

struct PreprocessArgs {
    std::vector<std::string> logs;
    std::vector<std::string> servers;
    std::string output_dir = ".";
    std::int64_t gap = 1800;
    bool long_only = false;
    bool require_all_servers = true;
    double max_error_rate = 0.05;
    std::size_t depth = 1;
};

void cmd_preprocess(const PreprocessArgs& a, std::ostream& out, std::ostream& err) {
    if (a.logs.size() != a.servers.size()) {
        throw UsageError("give one --server per --log (" + std::to_string(a.logs.size()) + " logs, " +
                         std::to_string(a.servers.size()) + " servers)");
    }
    if (a.depth < 1) throw UsageError("--depth must be at least 1");
    if (a.gap < 0) throw UsageError("--gap must be nonnegative");

    std::vector<weblog::ServerHit> hits;
    std::size_t lines = 0;
    std::size_t malformed = 0;
    for (std::size_t k = 0; k < a.logs.size(); ++k) {
        weblog::LogFile file = weblog::read_log_file(a.logs[k], a.servers[k]);
        lines += file.lines;
        malformed += file.errors.size();
        for (const auto& e : file.errors) {
            err << a.logs[k] << ":" << e.line_number() << ": " << e.reason() << '\n';
        }
        for (auto& h : file.hits) hits.push_back(std::move(h));
    }
    const double rate = lines == 0 ? 0.0 : static_cast<double>(malformed) / static_cast<double>(lines);
    if (rate > a.max_error_rate) {
        throw DataError(std::to_string(malformed) + " of " + std::to_string(lines) +
                        " lines are malformed, above --max-error-rate " + fmt(a.max_error_rate));
    }

    weblog::FilterSpec filters;
    filters.gap_seconds = a.gap;
    filters.long_only = a.long_only;
    if (a.require_all_servers) {
        filters.required_servers = a.servers;
        std::sort(filters.required_servers.begin(), filters.required_servers.end());
        filters.required_servers.erase(
            std::unique(filters.required_servers.begin(), filters.required_servers.end()),
            filters.required_servers.end());
    }
    weblog::FilterStats stats;
    const auto navs = weblog::build_navigations(hits, filters, &stats);

    out << "lines " << lines << '\n'
        << "malformed " << malformed << '\n'
        << "records read " << stats.read << '\n'
        << "dropped status " << stats.status << '\n'
        << "dropped image " << stats.image << '\n'
        << "dropped robot " << stats.robot << '\n'
        << "dropped short navigation " << stats.short_navigation << '\n'
        << "dropped missing server " << stats.missing_server << '\n'
        << "retained " << stats.retained << '\n'
        << "navigations " << navs.size() << '\n';
    if (navs.empty()) throw DataError("no navigation survived filtering");

    const fs::path dir(a.output_dir);
    make_dir(dir);
    {
        const fs::path p = dir / "navigations.csv";
        auto f = open_out(p);
        weblog::write_navigation_table(f, navs);
        finish(f, p);
    }
    {
        const fs::path p = dir / "modal.csv";
        auto f = open_out(p);
        write_modal_table(f, weblog::modal_tables(navs, a.depth));
        finish(f, p);
    }
    {
        const fs::path p = dir / "binary.csv";
        auto f = open_out(p);
        write_binary_table(f, weblog::binary_table(navs, a.depth));
        finish(f, p);
    }
}

// dissim

struct DissimArgs {
    std::string kind;
    std::string input;
    std::string output;
    std::vector<double> weights;
};

void cmd_dissim(const DissimArgs& a, std::ostream& out, std::ostream& err) {
    DissimMatrix m;
    auto in = open_in(a.input);
    if (a.kind == "affinity") {
        ModalTable table = read_modal_table(in);
        table.weights = a.weights;
        m = affinity_dissimilarity(table);
    } else {
        if (!a.weights.empty()) throw UsageError("--weights only applies to --kind affinity");
        if (a.kind == "jaccard") {
            std::vector<std::string> warnings;
            m = jaccard_dissimilarity(read_binary_table(in), &warnings);
            for (const auto& w : warnings) err << "warning: " << w << '\n';
        } else {
            PointSet points = read_points(in);
            m = squared_euclidean_matrix(points.points, points.labels);
        }
    }
    const auto report = validate_matrix(m);
    if (!report.ok()) throw ValidationError(report);
    auto f = open_out(a.output);
    write_matrix(f, m);
    finish(f, a.output);
    out << "wrote " << m.size() << "x" << m.size() << " " << a.kind << " matrix to " << a.output << '\n';
}

// train

struct TrainArgs {
    std::string input;
    std::string output;
    std::string grid = "5x4";
    int connectivity = 4;
    std::string kernel = "gaussian";
    std::optional<double> t_init;
    double t_final = 0.3;
    std::size_t steps = 100;
    std::size_t q = 1;
    std::size_t restarts = 5;
    std::uint64_t seed = default_seed;
};

TrainConfig make_config(const std::string& kernel, std::optional<double> t_init, double t_final,
                        std::size_t steps, std::size_t q, std::size_t restarts, std::uint64_t seed) {
    TrainConfig cfg;
    try {
        cfg.kernel = parse_kernel_kind(kernel);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    cfg.t_init = t_init;
    cfg.t_final = t_final;
    cfg.num_steps = steps;
    cfg.q = q;
    cfg.restarts = restarts;
    cfg.seed = seed;
    return cfg;
}

void print_energy(std::ostream& out, const TrainedMap& map) {
    out << "best restart " << map.restart << " of " << map.config.restarts << '\n'
        << "temperature " << fmt(map.schedule.t_init) << " -> " << fmt(map.schedule.t_final) << " over "
        << map.schedule.num_steps << " steps\n"
        << "initial energy " << fmt(map.initial_energy) << '\n'
        << "final energy " << fmt(map.energy) << '\n'
        << "  quantization E_R " << fmt(map.components.quantization) << '\n'
        << "  topology E_S " << fmt(map.components.topology) << '\n';
}

void cmd_train(const TrainArgs& a, std::ostream& out) {
    const GridSpec grid = parse_grid(a.grid);
    const Connectivity conn = parse_connectivity(a.connectivity);
    const TrainConfig cfg = make_config(a.kernel, a.t_init, a.t_final, a.steps, a.q, a.restarts, a.seed);
    auto in = open_in(a.input);
    const DissimMatrix m = read_matrix(in);
    const MapGraph g = build_grid(grid.rows, grid.cols, conn);
    const TrainedMap map = train(m, g, cfg);
    auto f = open_out(a.output);
    write_map(f, to_map_file(map, m.labels()));
    finish(f, a.output);
    out << "neurons " << g.num_neurons() << " (" << grid.rows << "x" << grid.cols << ")\n"
        << "observations " << m.size() << '\n';
    print_energy(out, map);
}

// export

struct ExportArgs {
    std::string input;
    std::string format = "text";
    std::string output;
    bool transpose = false;
};

void cmd_export(const ExportArgs& a, std::ostream& out) {
    auto in = open_in(a.input);
    const MapFile map = read_map(in);
    std::ostringstream buf;
    if (a.format == "text") {
        export_text(buf, map, a.transpose);
    } else if (a.format == "svg") {
        export_svg(buf, map, a.transpose);
    } else {
        export_csv(buf, map);
    }
    if (a.output.empty()) {
        out << buf.str();
    } else {
        auto f = open_out(a.output);
        f << buf.str();
        finish(f, a.output);
    }
}

// demo-cylinder

struct DemoArgs {
    std::uint64_t seed = default_seed;
    std::size_t n = 1000;
    std::string grid = "21x3";
    double radius = 1.0;
    double height = 4.0;
    std::string kernel = "gaussian";
    std::optional<double> t_init;
    double t_final = 0.3;
    std::size_t steps = 100;
    std::size_t restarts = 5;
    std::string output_dir;
};

void cmd_demo_cylinder(const DemoArgs& a, std::ostream& out) {
    const GridSpec grid = parse_grid(a.grid);
    CylinderDemoOptions options;
    options.n = a.n;
    options.radius = a.radius;
    options.height = a.height;
    options.rows = grid.rows;
    options.cols = grid.cols;
    options.train = make_config(a.kernel, a.t_init, a.t_final, a.steps, 1, a.restarts, a.seed);
    const CylinderDemoResult r = run_cylinder_demo(options);

    std::ostringstream summary;
    const std::size_t neurons = grid.rows * grid.cols;
    summary << "points " << a.n << " (radius " << fmt(a.radius) << ", height " << fmt(a.height)
            << ", seed " << a.seed << ")\n"
            << "neurons " << neurons << " (" << grid.rows << "x" << grid.cols << ")\n";
    print_energy(summary, r.map);
    summary << "energy ratio " << fmt(r.map.energy / r.map.initial_energy) << '\n'
            << "rank correlation " << fmt(r.rank_correlation) << '\n'
            << "nonempty neurons " << fmt(r.nonempty_fraction) << '\n';
    out << summary.str();

    if (a.output_dir.empty()) return;
    const fs::path dir(a.output_dir);
    make_dir(dir);
    {
        const fs::path p = dir / "points.csv";
        auto f = open_out(p);
        write_points(f, r.points);
        finish(f, p);
    }
    {
        const fs::path p = dir / "map.json";
        auto f = open_out(p);
        write_map(f, to_map_file(r.map, r.points.labels));
        finish(f, p);
    }
    {
        const fs::path p = dir / "prototypes.csv";
        auto f = open_out(p);
        f << "neuron,row,col,label,x,y,z\n";
        for (NeuronId c = 0; c < neurons; ++c) {
            for (std::size_t j : r.map.state.prototypes[c]) {
                const auto& x = r.points.points[j];
                f << c << ',' << c / grid.cols << ',' << c % grid.cols << ',' << r.points.labels[j] << ','
                  << fmt(x[0]) << ',' << fmt(x[1]) << ',' << fmt(x[2]) << '\n';
            }
        }
        finish(f, p);
    }
    {
        const fs::path p = dir / "summary.txt";
        auto f = open_out(p);
        f << summary.str();
        finish(f, p);
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-organizing maps for dissimilarity data"};
    app.name("dsom");
    app.require_subcommand(1);

    PreprocessArgs pre;
    auto* p = app.add_subcommand("preprocess", "Turn access logs into navigation, modal and binary tables");
    p->add_option("--log", pre.logs, "Access log, plain or gzip (repeatable)")->required();
    p->add_option("--server", pre.servers, "Server name for the matching --log (repeatable)")->required();
    p->add_option("--output-dir", pre.output_dir, "Directory for the three CSV outputs");
    p->add_option("--gap", pre.gap, "Seconds of inactivity that end a navigation");
    p->add_flag("--long-only", pre.long_only, "Keep only long navigations");
    p->add_flag("--require-all-servers,!--no-require-all-servers", pre.require_all_servers,
                "Drop navigations that miss one of the servers");
    p->add_option("--max-error-rate", pre.max_error_rate, "Abort above this fraction of malformed lines");
    p->add_option("--depth", pre.depth, "URL levels kept in a rubric");

    DissimArgs dis;
    auto* d = app.add_subcommand("dissim", "Build a dissimilarity matrix");
    d->add_option("--kind", dis.kind, "affinity, jaccard or euclidean")
        ->required()
        ->check(CLI::IsMember({"affinity", "jaccard", "euclidean"}));
    d->add_option("--input", dis.input, "Modal table, binary table or points CSV")->required();
    d->add_option("--output", dis.output, "Matrix file to write")->required();
    d->add_option("--weights", dis.weights, "Variable weights for affinity")->delimiter(',');

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a map on a dissimilarity matrix");
    t->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    t->add_option("--input", tr.input, "Matrix file")->required();
    t->add_option("--output", tr.output, "Map file to write")->required();
    t->add_option("--grid", tr.grid, "ROWSxCOLS");
    t->add_option("--connectivity", tr.connectivity, "4 or 8");
    t->add_option("--kernel", tr.kernel, "gaussian or threshold");
    t->add_option("--t-init,--t_init", tr.t_init, "Initial temperature (default: half the map diameter)");
    t->add_option("--t-final,--t_final", tr.t_final, "Final temperature");
    t->add_option("--steps", tr.steps, "Number of iterations");
    t->add_option("--q", tr.q, "Observations per prototype");
    t->add_option("--restarts", tr.restarts, "Random restarts");
    t->add_option("--seed", tr.seed, "Random seed");

    ExportArgs ex;
    auto* e = app.add_subcommand("export", "Render a trained map");
    e->add_option("--input", ex.input, "Map file")->required();
    e->add_option("--format", ex.format, "text, csv or svg")->check(CLI::IsMember({"text", "csv", "svg"}));
    e->add_option("--output", ex.output, "Output file (default: standard output)");
    e->add_flag("--transpose", ex.transpose, "Swap displayed rows and columns");

    DemoArgs demo;
    auto* c = app.add_subcommand("demo-cylinder", "Train on points sampled from a cylinder");
    c->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c->add_option("--seed", demo.seed, "Random seed for sampling and training");
    c->add_option("--n", demo.n, "Number of points");
    c->add_option("--grid", demo.grid, "ROWSxCOLS");
    c->add_option("--radius", demo.radius, "Cylinder radius");
    c->add_option("--height", demo.height, "Cylinder height");
    c->add_option("--kernel", demo.kernel, "gaussian or threshold");
    c->add_option("--t-init,--t_init", demo.t_init, "Initial temperature");
    c->add_option("--t-final,--t_final", demo.t_final, "Final temperature");
    c->add_option("--steps", demo.steps, "Number of iterations");
    c->add_option("--restarts", demo.restarts, "Random restarts");
    c->add_option("--output-dir", demo.output_dir, "Write points, map, prototypes and summary here");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args.insert(args.begin(), argc > 0 ? argv[0] : "dsom");
        args = expand_config(std::move(args));
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);

        if (p->parsed()) {
            cmd_preprocess(pre, out, err);
        } else if (d->parsed()) {
            cmd_dissim(dis, out, err);
        } else if (t->parsed()) {
            cmd_train(tr, out);
        } else if (e->parsed()) {
            cmd_export(ex, out);
        } else {
            cmd_demo_cylinder(demo, out);
        }
        return exit_ok;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& ex) {
        err << "dsom: " << ex.what() << '\n';
        return exit_usage;
    } catch (const UsageError& ex) {
        err << "dsom: " << ex.what() << '\n';
        return exit_usage;
    } catch (const IoError& ex) {
        err << "dsom: " << ex.what() << '\n';
        return exit_io;
    } catch (const ValidationError& ex) {
        err << "dsom: invalid matrix: " << ex.what() << '\n';
        return exit_validation;
    } catch (const FormatError& ex) {
        err << "dsom: " << ex.what() << '\n';
        return exit_validation;
    } catch (const DataError& ex) {
        err << "dsom: " << ex.what() << '\n';
        return exit_validation;
    } catch (const std::invalid_argument& ex) {
        err << "dsom: " << ex.what() << '\n';
        return exit_validation;
    } catch (const std::exception& ex) {
        err << "dsom: internal error: " << ex.what() << '\n';
        return exit_internal;
    }
}

}  // namespace dsom
