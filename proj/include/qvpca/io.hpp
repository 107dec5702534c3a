#pragma once

// CSV formats for panels, paths and result tables.
//
// Panel layout (UTF-8, comma separated, '.' decimal point):
//   t,x_1,x_2,...,x_N
//   t_0,X(t_0,x_1),...,X(t_0,x_N)
//   ...
// Path layout: header "t,<name_1>,...,<name_d>", then one row per time.
// Numbers are written with 17 significant digits so files round-trip exactly.

#include <qvpca/simulation.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qvpca {

namespace io_detail {

inline constexpr const char* module = "cli_io";

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string where(const std::string& source, std::size_t line, std::size_t column) {
    return source + ":" + std::to_string(line) + ", column " + std::to_string(column);
}

inline double parse_number(std::string_view cell, const std::string& source, std::size_t line, std::size_t column) {
    double value = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last)
        detail::fail(ErrorKind::parse, module,
                     "cannot parse '" + std::string(cell) + "' as a number at " + where(source, line, column));
    if (!std::isfinite(value))
        detail::fail(ErrorKind::parse, module,
                     "non-finite value '" + std::string(cell) + "' at " + where(source, line, column));
    return value;
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline RawTable parse_table(const std::string& text, const std::string& source) {
    std::string_view rest(text);
    if (rest.substr(0, 3) == "\xEF\xBB\xBF") rest.remove_prefix(3);
    std::vector<std::string_view> lines;
    while (!rest.empty()) {
        const std::size_t nl = rest.find('\n');
        lines.push_back(rest.substr(0, nl));
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    detail::require(!lines.empty(), ErrorKind::parse, module, source + ": file is empty");

    RawTable table;
    for (auto cell : split(lines[0])) table.header.emplace_back(cell);
    detail::require(table.header.size() >= 2 && table.header[0] == "t", ErrorKind::parse, module,
                    source + ":1: header must start with 't' followed by at least one column");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i]);
        if (cells.size() != table.header.size())
            detail::fail(ErrorKind::shape, module,
                         source + ":" + std::to_string(i + 1) + ": row has " + std::to_string(cells.size()) +
                             " fields, header has " + std::to_string(table.header.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) row.push_back(parse_number(cells[c], source, i + 1, c + 1));
        table.rows.push_back(std::move(row));
    }
    detail::require(!table.rows.empty(), ErrorKind::shape, module, source + ": no data rows");
    return table;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    detail::require(static_cast<bool>(in), ErrorKind::parse, module, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    detail::require(static_cast<bool>(out), ErrorKind::invalid_input, module, "cannot write " + path.string());
    out << text;
}

} // namespace io_detail

/// Shortest "%.17g" rendering; parses back to the identical double.
inline std::string format_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

inline SpaceTimePanel parse_panel_csv(const std::string& text, const std::string& source = "<panel>") {
    using io_detail::module;
    const auto table = io_detail::parse_table(text, source);
    const Eigen::Index n_space = static_cast<Eigen::Index>(table.header.size()) - 1;
    Vector x(n_space);
    for (Eigen::Index j = 0; j < n_space; ++j) {
        x[j] = io_detail::parse_number(table.header[j + 1], source, 1, j + 2);
        if (j > 0 && x[j] <= x[j - 1])
            detail::fail(ErrorKind::parse, module,
                         "space grid not strictly increasing at " + io_detail::where(source, 1, j + 2));
    }
    const Eigen::Index n_time = static_cast<Eigen::Index>(table.rows.size());
    Vector t(n_time);
    Matrix values(n_time, n_space);
    for (Eigen::Index i = 0; i < n_time; ++i) {
        t[i] = table.rows[i][0];
        if (i > 0 && t[i] <= t[i - 1])
            detail::fail(ErrorKind::parse, module,
                         "time grid not strictly increasing at " + io_detail::where(source, i + 2, 1));
        for (Eigen::Index j = 0; j < n_space; ++j) values(i, j) = table.rows[i][j + 1];
    }
    return SpaceTimePanel(std::move(t), std::move(x), std::move(values));
}

inline SpaceTimePanel ingest_panel(const std::filesystem::path& path) {
    return parse_panel_csv(io_detail::read_file(path), path.string());
}

/// Attaches phi samples stored in panel layout on the same grids.
inline SpaceTimePanel with_parametrization(const SpaceTimePanel& panel, const SpaceTimePanel& phi) {
    detail::require(phi.t_grid() == panel.t_grid() && phi.x_grid() == panel.x_grid(), ErrorKind::shape,
                    io_detail::module, "parametrization grids do not match the panel");
    return SpaceTimePanel(panel.t_grid(), panel.x_grid(), panel.values(), phi.values());
}

inline std::string panel_to_csv(const Vector& t, const Vector& x, const Matrix& values) {
    std::string out = "t";
    for (double v : x) out += "," + format_number(v);
    out += "\n";
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        out += format_number(t[i]);
        for (Eigen::Index j = 0; j < values.cols(); ++j) out += "," + format_number(values(i, j));
        out += "\n";
    }
    return out;
}

inline std::string panel_to_csv(const SpaceTimePanel& panel) {
    return panel_to_csv(panel.t_grid(), panel.x_grid(), panel.values());
}

inline MultiPath parse_path_csv(const std::string& text, const std::string& source = "<path>") {
    const auto table = io_detail::parse_table(text, source);
    const Eigen::Index dim = static_cast<Eigen::Index>(table.header.size()) - 1;
    Vector t(static_cast<Eigen::Index>(table.rows.size()));
    Matrix values(t.size(), dim);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        t[i] = table.rows[i][0];
        for (Eigen::Index j = 0; j < dim; ++j) values(i, j) = table.rows[i][j + 1];
    }
    std::vector<std::string> names(table.header.begin() + 1, table.header.end());
    return MultiPath(std::move(t), std::move(values), std::move(names));
}

inline MultiPath ingest_path(const std::filesystem::path& path) {
    return parse_path_csv(io_detail::read_file(path), path.string());
}

inline std::string path_to_csv(const MultiPath& path) {
    std::string out = "t";
    for (const auto& name : path.names()) out += "," + name;
    out += "\n";
    for (Eigen::Index i = 0; i < path.times().size(); ++i) {
        out += format_number(path.times()[i]);
        for (Eigen::Index j = 0; j < path.dim(); ++j) out += "," + format_number(path.values()(i, j));
        out += "\n";
    }
    return out;
}

/// Generic numeric table: a header and equally long columns.
struct Table {
    std::vector<std::string> header;
    std::vector<Vector> columns;

    std::string to_csv() const {
        detail::require(header.size() == columns.size(), ErrorKind::shape, io_detail::module,
                        "table header and column count differ");
        const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
        for (const auto& c : columns)
            detail::require(c.size() == rows, ErrorKind::shape, io_detail::module, "table columns differ in length");
        std::string out;
        for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
        out += "\n";
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + format_number(columns[c][r]);
            out += "\n";
        }
        return out;
    }
};

} // namespace qvpca
