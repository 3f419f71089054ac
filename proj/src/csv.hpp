#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ppg/errors.hpp"

namespace ppg::detail {

/// Shortest round-trip text for a double; negative zero prints as 0.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v == 0.0 ? 0.0 : v);
    return buf.data();
}

/// Reads a numeric CSV with an exact header; every row must have `header`'s
/// field count.
inline std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                         const std::string& header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw FormatError(path.string() + ": expected header " + header);
    }
    const auto width = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',') + 1);
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(field, &used));
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad number");
            }
        }
        if (row.size() != width) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(width) + " fields");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ppg::detail
