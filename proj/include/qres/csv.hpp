#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qres::csv {

// Shortest string that parses back to the same double; locale independent.
std::string format_double(double value);

double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view line, char sep = ',');

std::string join(const std::vector<std::string>& fields, char sep = ',');

// Reads all lines (without trailing '\r'); throws qres::InvalidInput if unreadable.
std::vector<std::string> read_lines(const std::string& path);

}  // namespace qres::csv
