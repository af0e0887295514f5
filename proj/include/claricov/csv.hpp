#pragma once

#include "claricov/common.hpp"

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace claricov::csv {

/// Shortest round-trip decimal form (std::to_chars); keeps logs byte-stable
/// across runs of the same binary.
std::string format_double(double v);

class Writer {
public:
    Writer(const std::filesystem::path& path, std::span<const std::string> header);

    void row(std::span<const double> values);
    /// Row with arbitrary preformatted cells (e.g. component labels).
    void row_cells(std::span<const std::string> cells);

private:
    std::ofstream out_;
    std::size_t columns_;
    std::filesystem::path path_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws DataError when absent.
    std::size_t column(const std::string& name) const;

    double number(std::size_t row, std::size_t col) const;
};

/// Reads a comma-separated file with a header row. Ragged rows and
/// non-numeric cells are reported with 1-based line numbers.
Table read(const std::filesystem::path& path);

} // namespace claricov::csv
