#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mtax::text {

/// Lower-case ASCII, trim, and collapse internal whitespace runs to one space.
std::string normalize_label(std::string_view label);

/// Removes parenthetical qualifiers, "roll (bimanual)" -> "roll", then normalizes.
std::string strip_qualifiers(std::string_view label);

std::size_t edit_distance(std::string_view a, std::string_view b);

/// Splits one CSV record, honoring double-quoted fields with "" escapes.
std::vector<std::string> split_csv(std::string_view line);

/// Quotes a CSV field when it contains a comma, quote, or line break.
std::string quote_csv(std::string_view field);

/// printf "%.<digits>g" formatting.
std::string format_g(double value, int digits = 9);

/// Parses a full string as a double; throws ParseError otherwise.
double parse_double(std::string_view token);

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view contents);

} // namespace mtax::text
