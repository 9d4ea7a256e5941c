#include "dsom/dissim.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dsom/text.hpp"

namespace dsom {

namespace {

std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
    return labels;
}

bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace

DissimMatrix::DissimMatrix(std::size_t n) : n_(n), values_(n * n, 0.0), labels_(default_labels(n)) {}

DissimMatrix::DissimMatrix(std::size_t n, std::vector<double> values,
                           std::vector<std::string> labels)
    : n_(n), values_(std::move(values)), labels_(std::move(labels)) {
    if (values_.size() != n * n) throw std::invalid_argument("matrix needs n*n values");
    if (labels_.empty()) labels_ = default_labels(n);
    if (labels_.size() != n) throw std::invalid_argument("matrix needs one label per row");
}

void DissimMatrix::set_symmetric(std::size_t i, std::size_t j, double value) {
    values_[i * n_ + j] = value;
    values_[j * n_ + i] = value;
}

void DissimMatrix::set_labels(std::vector<std::string> labels) {
    if (labels.size() != n_) throw std::invalid_argument("matrix needs one label per row");
    labels_ = std::move(labels);
}

std::string ValidationReport::message() const {
    const std::string at = " at (" + std::to_string(i) + ", " + std::to_string(j) + ")";
    switch (violation) {
        case Violation::none: return "ok";
        case Violation::not_finite: return "non-finite entry" + at;
        case Violation::negative: return "negative entry" + at;
        case Violation::nonzero_diagonal: return "nonzero diagonal entry" + at;
        case Violation::asymmetric: return "asymmetric entry" + at;
    }
    return "unknown violation";
}

ValidationReport validate_matrix(const DissimMatrix& m) {
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = m(i, j);
            if (!std::isfinite(v)) return {Violation::not_finite, i, j};
            if (v < 0.0) return {Violation::negative, i, j};
            if (i == j && v != 0.0) return {Violation::nonzero_diagonal, i, j};
            if (j > i && v != m(j, i)) return {Violation::asymmetric, i, j};
        }
    }
    return {};
}

DissimMatrix squared_euclidean_matrix(const std::vector<std::vector<double>>& points,
                                      std::vector<std::string> labels) {
    if (points.empty()) throw std::invalid_argument("need at least one point");
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw std::invalid_argument("points have different dimensions");
    }
    const std::size_t n = points.size();
    DissimMatrix m(n, std::vector<double>(n * n, 0.0), std::move(labels));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double diff = points[i][k] - points[j][k];
                sum += diff * diff;
            }
            m.set_symmetric(i, j, sum);
        }
    }
    return m;
}

std::vector<double> ModalTable::effective_weights() const {
    if (weights.empty()) {
        return std::vector<double>(variables.size(), 1.0 / static_cast<double>(variables.size()));
    }
    return weights;
}

DissimMatrix affinity_dissimilarity(const ModalTable& table) {
    const std::size_t n = table.num_observations();
    const std::size_t p = table.variables.size();
    if (n == 0 || p == 0) throw std::invalid_argument("modal table is empty");
    const std::vector<double> w = table.effective_weights();
    if (w.size() != p) throw std::invalid_argument("one weight per variable required");
    double weight_sum = 0.0;
    for (double wj : w) {
        if (!(wj >= 0.0 && wj <= 1.0)) throw std::invalid_argument("weights must lie in [0, 1]");
        weight_sum += wj;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");

    // Relative frequencies per variable.
    std::vector<std::vector<double>> freq(p);
    for (std::size_t j = 0; j < p; ++j) {
        const ModalVariable& var = table.variables[j];
        const std::size_t t = var.modalities.size();
        if (var.counts.size() != n * t) {
            throw std::invalid_argument("count table of '" + var.name + "' has wrong shape");
        }
        freq[j].resize(n * t);
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (std::size_t l = 0; l < t; ++l) {
                const double c = var.count(i, l);
                if (!(c >= 0.0)) throw std::invalid_argument("counts must be nonnegative");
                total += c;
            }
            if (total <= 0.0) {
                throw std::invalid_argument("observation '" + table.observations[i] +
                                            "' has no counts for variable '" + var.name + "'");
            }
            for (std::size_t l = 0; l < t; ++l) freq[j][i * t + l] = var.count(i, l) / total;
        }
    }

    DissimMatrix m(n, std::vector<double>(n * n, 0.0), table.observations);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            double a = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const std::size_t t = table.variables[j].modalities.size();
                const double* fi = freq[j].data() + i * t;
                const double* fk = freq[j].data() + k * t;
                double aff = 0.0;
                for (std::size_t l = 0; l < t; ++l) aff += std::sqrt(fi[l] * fk[l]);
                a += w[j] * aff;
            }
            // Rounding can push the affinity of identical profiles a hair above 1.
            m.set_symmetric(i, k, std::max(0.0, 2.0 * (1.0 - a)));
        }
    }
    return m;
}

DissimMatrix jaccard_dissimilarity(const BinaryTable& table, std::vector<std::string>* warnings) {
    const std::size_t r = table.rows.size();
    const std::size_t v = table.cols.size();
    if (r == 0) throw std::invalid_argument("binary table has no rows");
    if (table.bits.size() != r * v) throw std::invalid_argument("binary table has wrong shape");
    for (std::uint8_t b : table.bits) {
        if (b > 1) throw std::invalid_argument("binary table entries must be 0 or 1");
    }

    DissimMatrix m(r, std::vector<double>(r * r, 0.0), table.rows);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t k = i + 1; k < r; ++k) {
            std::size_t both = 0;
            std::size_t either = 0;
            for (std::size_t j = 0; j < v; ++j) {
                const bool x = table.bit(i, j);
                const bool y = table.bit(k, j);
                both += (x && y);
                either += (x || y);
            }
            if (either == 0) {
                const std::string msg = "rows '" + table.rows[i] + "' and '" + table.rows[k] +
                                        "' are both all-zero; Jaccard similarity taken as 1";
                if (warnings) {
                    warnings->push_back(msg);
                } else {
                    std::clog << "warning: " << msg << '\n';
                }
                continue;
            }
            const double s = static_cast<double>(both) / static_cast<double>(either);
            m.set_symmetric(i, k, 1.0 - s);
        }
    }
    return m;
}

void write_matrix(std::ostream& out, const DissimMatrix& m) {
    const std::size_t n = m.size();
    out << "dissim v1 " << n << '\n';
    out << text::join_csv(m.labels()) << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j) out << ',';
            out << text::format_double(m(i, j));
        }
        out << '\n';
    }
}

DissimMatrix read_matrix(std::istream& in) {
    std::string line;
    if (!next_line(in, line)) throw FormatError("empty matrix file");
    std::istringstream header(line);
    std::string magic, version;
    long long n = -1;
    header >> magic >> version >> n;
    if (magic != "dissim" || version != "v1" || n <= 0) {
        throw FormatError("bad matrix header: '" + line + "'");
    }
    const auto size = static_cast<std::size_t>(n);
    if (!next_line(in, line)) throw FormatError("missing label line");
    std::vector<std::string> labels = text::split_csv(line);
    if (labels.size() != size) throw FormatError("label count does not match N");

    std::vector<double> values;
    values.reserve(size * size);
    for (std::size_t i = 0; i < size; ++i) {
        if (!next_line(in, line)) throw FormatError("missing matrix row " + std::to_string(i));
        std::size_t count = 0;
        std::string_view rest(line);
        while (true) {
            const std::size_t comma = rest.find(',');
            const std::string_view field = rest.substr(0, comma);
            try {
                values.push_back(text::parse_double(field));
            } catch (const std::invalid_argument&) {
                throw FormatError("row " + std::to_string(i) + ": bad number '" +
                                  std::string(field) + "'");
            }
            ++count;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (count != size) {
            throw FormatError("row " + std::to_string(i) + " has " + std::to_string(count) +
                              " entries, expected " + std::to_string(size));
        }
    }
    DissimMatrix m(size, std::move(values), std::move(labels));
    if (auto report = validate_matrix(m); !report.ok()) throw ValidationError(report);
    return m;
}

void write_points(std::ostream& out, const PointSet& points) {
    const std::size_t dim = points.points.empty() ? 0 : points.points.front().size();
    out << "label";
    for (std::size_t k = 0; k < dim; ++k) out << ",x" << (k + 1);
    out << '\n';
    for (std::size_t i = 0; i < points.points.size(); ++i) {
        out << text::quote_csv(points.labels[i]);
        for (double x : points.points[i]) out << ',' << text::format_double(x);
        out << '\n';
    }
}

PointSet read_points(std::istream& in) {
    std::string line;
    if (!next_line(in, line)) throw FormatError("empty points file");
    const std::size_t width = text::split_csv(line).size();
    if (width < 2) throw FormatError("points file needs a label and at least one coordinate");
    PointSet set;
    while (next_line(in, line)) {
        if (text::trim(line).empty()) continue;
        auto fields = text::split_csv(line);
        if (fields.size() != width) throw FormatError("ragged points row: '" + line + "'");
        std::vector<double> p;
        for (std::size_t k = 1; k < fields.size(); ++k) {
            try {
                p.push_back(text::parse_double(fields[k]));
            } catch (const std::invalid_argument& e) {
                throw FormatError(e.what());
            }
        }
        set.labels.push_back(fields[0]);
        set.points.push_back(std::move(p));
    }
    return set;
}

void write_modal_table(std::ostream& out, const ModalTable& table, const std::string& id_column) {
    std::vector<std::string> header{id_column};
    for (const auto& var : table.variables) {
        for (const auto& mod : var.modalities) header.push_back(var.name + "|" + mod);
    }
    out << text::join_csv(header) << '\n';
    for (std::size_t i = 0; i < table.num_observations(); ++i) {
        out << text::quote_csv(table.observations[i]);
        for (const auto& var : table.variables) {
            for (std::size_t l = 0; l < var.modalities.size(); ++l) {
                out << ',' << text::format_double(var.count(i, l));
            }
        }
        out << '\n';
    }
}

ModalTable read_modal_table(std::istream& in) {
    std::string line;
    if (!next_line(in, line)) throw FormatError("empty modal table");
    const auto header = text::split_csv(line);
    ModalTable table;
    // column -> (variable, modality)
    std::vector<std::size_t> column_var;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::size_t bar = header[c].find('|');
        if (bar == std::string::npos) {
            throw FormatError("modal column '" + header[c] + "' lacks 'variable|modality'");
        }
        const std::string name = header[c].substr(0, bar);
        if (table.variables.empty() || table.variables.back().name != name) {
            for (const auto& v : table.variables) {
                if (v.name == name) throw FormatError("columns of '" + name + "' are not contiguous");
            }
            table.variables.push_back({name, {}, {}});
        }
        table.variables.back().modalities.push_back(header[c].substr(bar + 1));
        column_var.push_back(table.variables.size() - 1);
    }
    if (table.variables.empty()) throw FormatError("modal table has no variables");
    while (next_line(in, line)) {
        if (text::trim(line).empty()) continue;
        auto fields = text::split_csv(line);
        if (fields.size() != header.size()) throw FormatError("ragged modal row: '" + line + "'");
        table.observations.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            try {
                table.variables[column_var[c - 1]].counts.push_back(text::parse_double(fields[c]));
            } catch (const std::invalid_argument& e) {
                throw FormatError(e.what());
            }
        }
    }
    return table;
}

void write_binary_table(std::ostream& out, const BinaryTable& table, const std::string& id_column) {
    std::vector<std::string> header{id_column};
    header.insert(header.end(), table.cols.begin(), table.cols.end());
    out << text::join_csv(header) << '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << text::quote_csv(table.rows[r]);
        for (std::size_t c = 0; c < table.cols.size(); ++c) out << ',' << (table.bit(r, c) ? '1' : '0');
        out << '\n';
    }
}

BinaryTable read_binary_table(std::istream& in) {
    std::string line;
    if (!next_line(in, line)) throw FormatError("empty binary table");
    auto header = text::split_csv(line);
    BinaryTable table;
    table.cols.assign(header.begin() + 1, header.end());
    while (next_line(in, line)) {
        if (text::trim(line).empty()) continue;
        auto fields = text::split_csv(line);
        if (fields.size() != header.size()) throw FormatError("ragged binary row: '" + line + "'");
        table.rows.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto f = text::trim(fields[c]);
            if (f != "0" && f != "1") throw FormatError("binary entry must be 0 or 1");
            table.bits.push_back(f == "1" ? 1 : 0);
        }
    }
    return table;
}

}  // namespace dsom
