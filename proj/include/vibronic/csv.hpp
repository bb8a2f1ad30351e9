#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vibronic {

/// Numeric table with a one-line header. Values are written with 17
/// significant digits so a write/read cycle reproduces every double exactly.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of `name` in the header; throws std::out_of_range when absent.
    std::size_t column(const std::string& name) const;
    std::vector<double> column_values(const std::string& name) const;
};

void write_csv(std::ostream& os, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

std::string format_double(double v);

} // namespace vibronic
