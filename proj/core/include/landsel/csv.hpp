#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace landsel::csv {

std::string trim(std::string_view s);
/// Splits on commas; fields are trimmed. No quoting support: none of the
/// formats here carry commas inside fields.
std::vector<std::string> split(std::string_view line);
std::optional<int> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

}  // namespace landsel::csv
