#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vmar {

/// T x N observations with ordered time labels and series names.
struct TimeSeriesPanel {
    std::vector<std::string> times;
    Eigen::MatrixXd values;  // T x N
    std::vector<std::string> names;

    [[nodiscard]] int T() const { return static_cast<int>(values.rows()); }
    [[nodiscard]] int N() const { return static_cast<int>(values.cols()); }

    /// Throws InputError on label/shape mismatch, non-finite values or
    /// non-increasing time labels.
    void validate() const;

    /// Panel from raw values with labels 1..T and names y1..yN.
    static TimeSeriesPanel from_values(Eigen::MatrixXd values);
    /// Keeps only the listed columns.
    [[nodiscard]] TimeSeriesPanel select(const std::vector<int>& columns) const;
};

/// First column holds time labels, the rest numeric series; header row required.
TimeSeriesPanel read_panel_csv(std::istream& in);
TimeSeriesPanel read_panel_csv_file(const std::string& path);

/// Writes "<time-header>,name1,...,nameN" followed by one row per observation.
void write_panel_csv(const TimeSeriesPanel& panel, std::ostream& out, const std::string& time_header = "t");

}  // namespace vmar
