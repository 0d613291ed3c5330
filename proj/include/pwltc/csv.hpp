#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pwltc::csv {

/// 17 significant digits: enough for an exact double round trip.
std::string real(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const;  // -1 when absent
};

Table parse(std::string_view text);
double to_real(const std::string& field);

/// Joins fields with commas and terminates the line.
std::string line(const std::vector<std::string>& fields);

}  // namespace pwltc::csv
