#include "vmar/panel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "vmar/errors.hpp"

namespace vmar {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
    }
    return fields;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return v;
}

bool labels_increasing(const std::vector<std::string>& times) {
    std::vector<double> numeric;
    numeric.reserve(times.size());
    for (const auto& t : times) {
        auto v = parse_number(t);
        if (!v) {
            numeric.clear();
            break;
        }
        numeric.push_back(*v);
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        const bool ok = numeric.size() == times.size() ? numeric[i - 1] < numeric[i] : times[i - 1] < times[i];
        if (!ok) return false;
    }
    return true;
}

}  // namespace

void TimeSeriesPanel::validate() const {
    if (static_cast<int>(times.size()) != T()) throw InputError("time labels do not match row count");
    if (static_cast<int>(names.size()) != N()) throw InputError("series names do not match column count");
    if (!values.allFinite()) throw InputError("panel contains non-finite values");
    if (!labels_increasing(times)) throw InputError("time labels must be strictly increasing");
}

TimeSeriesPanel TimeSeriesPanel::from_values(Eigen::MatrixXd values) {
    TimeSeriesPanel p;
    p.values = std::move(values);
    for (int t = 0; t < p.T(); ++t) p.times.push_back(std::to_string(t + 1));
    for (int j = 0; j < p.N(); ++j) p.names.push_back("y" + std::to_string(j + 1));
    return p;
}

TimeSeriesPanel TimeSeriesPanel::select(const std::vector<int>& columns) const {
    TimeSeriesPanel out;
    out.times = times;
    out.values.resize(T(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const int c = columns[j];
        if (c < 0 || c >= N()) throw StructuralError("column index out of range");
        out.values.col(static_cast<Eigen::Index>(j)) = values.col(c);
        out.names.push_back(names[static_cast<std::size_t>(c)]);
    }
    return out;
}

TimeSeriesPanel read_panel_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty CSV input");
    const auto header = split_csv_line(line);
    if (header.size() < 2) throw InputError("CSV needs a time column and at least one series");
    const std::size_t N = header.size() - 1;

    TimeSeriesPanel p;
    p.names.assign(header.begin() + 1, header.end());
    std::vector<double> flat;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw InputError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(fields.size()));
        }
        p.times.push_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            const auto v = parse_number(fields[j]);
            if (!v || !std::isfinite(*v)) {
                throw InputError("row " + std::to_string(row) + ": missing or non-numeric value in column '" +
                                 header[j] + "'");
            }
            flat.push_back(*v);
        }
    }
    const auto T = static_cast<Eigen::Index>(p.times.size());
    if (T == 0) throw InputError("CSV has no data rows");
    p.values.resize(T, static_cast<Eigen::Index>(N));
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(N); ++j)
            p.values(t, j) = flat[static_cast<std::size_t>(t) * N + static_cast<std::size_t>(j)];
    p.validate();
    return p;
}

TimeSeriesPanel read_panel_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_panel_csv(in);
}

void write_panel_csv(const TimeSeriesPanel& panel, std::ostream& out, const std::string& time_header) {
    out << time_header;
    for (const auto& n : panel.names) out << ',' << n;
    out << '\n';
    out << std::setprecision(17);
    for (int t = 0; t < panel.T(); ++t) {
        out << panel.times[static_cast<std::size_t>(t)];
        for (int j = 0; j < panel.N(); ++j) out << ',' << panel.values(t, j);
        out << '\n';
    }
}

}  // namespace vmar
