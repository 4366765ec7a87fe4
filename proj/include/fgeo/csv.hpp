#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fgeo {

// Rectangular numeric table with '#'-prefixed "key: value" metadata lines.
// Values are written with 17 significant digits.
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void add_meta(const std::string& key, const std::string& value) { meta.emplace_back(key, value); }
    // DimensionError unless the row matches the header width.
    void add_row(std::vector<double> row);
    std::size_t column(const std::string& name) const;
    const std::string* find_meta(const std::string& key) const;

    void write(std::ostream& out) const;
    std::string str() const;
    // Creates parent directories as needed.
    void save(const std::string& path) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

std::string format_double(double v);

} // namespace fgeo
