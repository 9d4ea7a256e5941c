#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsom {

/// Dense N x N dissimilarity table with one label per observation. This is the
/// only view of the data the training code gets.
class DissimMatrix {
public:
    DissimMatrix() = default;
    /// Zero matrix with labels "0".."n-1".
    explicit DissimMatrix(std::size_t n);
    DissimMatrix(std::size_t n, std::vector<double> values, std::vector<std::string> labels);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }

    /// Sets (i, j) and (j, i).
    void set_symmetric(std::size_t i, std::size_t j, double value);

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<std::string>& labels() const { return labels_; }
    void set_labels(std::vector<std::string> labels);

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
    std::vector<std::string> labels_;
};

enum class Violation { none, not_finite, negative, nonzero_diagonal, asymmetric };

struct ValidationReport {
    Violation violation = Violation::none;
    std::size_t i = 0;
    std::size_t j = 0;

    bool ok() const { return violation == Violation::none; }
    std::string message() const;
};

/// Scans entries row-major and reports the first one breaking symmetry,
/// nonnegativity or the zero diagonal.
ValidationReport validate_matrix(const DissimMatrix& m);

class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(ValidationReport report)
        : std::invalid_argument(report.message()), report_(report) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// values(i, j) = sum_k (x_ik - x_jk)^2.
DissimMatrix squared_euclidean_matrix(const std::vector<std::vector<double>>& points,
                                      std::vector<std::string> labels = {});

/// One categorical variable described, for each observation, by a count per
/// modality.
struct ModalVariable {
    std::string name;
    std::vector<std::string> modalities;
    std::vector<double> counts;  // num_observations x modalities.size(), row-major

    double count(std::size_t obs, std::size_t modality) const {
        return counts[obs * modalities.size() + modality];
    }
};

struct ModalTable {
    std::vector<std::string> observations;
    std::vector<ModalVariable> variables;
    std::vector<double> weights;  // empty means 1/p each

    std::size_t num_observations() const { return observations.size(); }
    std::vector<double> effective_weights() const;
};

/// d(i, k) = 2 (1 - sum_j w_j sum_l sqrt(f_ijl f_kjl)) with f the per-variable
/// relative frequencies.
DissimMatrix affinity_dissimilarity(const ModalTable& table);

struct BinaryTable {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    std::vector<std::uint8_t> bits;  // rows.size() x cols.size(), row-major

    bool bit(std::size_t r, std::size_t c) const { return bits[r * cols.size() + c] != 0; }
};

/// d = 1 - a / (a + b + c). Two all-zero rows get d = 0; each such pair appends
/// a message to `warnings` (or std::clog when null).
DissimMatrix jaccard_dissimilarity(const BinaryTable& table,
                                   std::vector<std::string>* warnings = nullptr);

// Text formats.

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "dissim v1 <N>", a CSV label line, then N CSV rows. Loading validates and
/// throws ValidationError on a bad table.
void write_matrix(std::ostream& out, const DissimMatrix& m);
DissimMatrix read_matrix(std::istream& in);

/// CSV: header "label,x1,..,xp" then one row per point.
struct PointSet {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> points;
};
void write_points(std::ostream& out, const PointSet& points);
PointSet read_points(std::istream& in);

/// CSV: header "<id-column>,<variable>|<modality>,..." then one count row per
/// observation. Columns of one variable are contiguous.
void write_modal_table(std::ostream& out, const ModalTable& table,
                       const std::string& id_column = "navigation");
ModalTable read_modal_table(std::istream& in);

/// CSV: header "<id-column>,<col labels...>" then one 0/1 row per table row.
void write_binary_table(std::ostream& out, const BinaryTable& table,
                        const std::string& id_column = "rubric");
BinaryTable read_binary_table(std::istream& in);

}  // namespace dsom
