#include "claricov/csv.hpp"

#include <charconv>
#include <system_error>

namespace claricov::csv {

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Writer::Writer(const std::filesystem::path& path, std::span<const std::string> header)
    : out_(path), columns_(header.size()), path_(path) {
    if (!out_) throw DataError("cannot open for writing: " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void Writer::row(std::span<const double> values) {
    if (values.size() != columns_)
        throw DataError("csv row width mismatch in " + path_.string());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_double(values[i]);
    }
    out_ << '\n';
}

void Writer::row_cells(std::span<const std::string> cells) {
    if (cells.size() != columns_)
        throw DataError("csv row width mismatch in " + path_.string());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError("csv missing required column '" + name + "'");
}

double Table::number(std::size_t row, std::size_t col) const {
    const std::string& cell = rows[row][col];
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw DataError("csv line " + std::to_string(row + 2) + ": non-numeric cell '" +
                        cell + "'");
    return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string cell = line.substr(start, comma == std::string::npos
                                                  ? std::string::npos
                                                  : comma - start);
        // trim spaces and a possible trailing CR
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
        std::size_t lead = 0;
        while (lead < cell.size() && cell[lead] == ' ') ++lead;
        cells.push_back(cell.substr(lead));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

} // namespace

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open csv file: " + path.string());

    Table t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw DataError(path.string() + " line " + std::to_string(line_no) +
                            ": expected " + std::to_string(t.header.size()) +
                            " cells, found " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) throw DataError(path.string() + ": empty csv (no header row)");
    return t;
}

} // namespace claricov::csv
