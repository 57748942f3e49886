#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "invclass/types.hpp"

namespace invclass::csv {

// Shortest decimal text that parses back to the same double (17 significant
// digits, printf %.17g).
std::string format_double(double v);

// Splits one line on commas and parses each field as a double.
// Throws ParseError on empty fields or trailing garbage.
std::vector<double> parse_row(std::string_view line);

// Reads the next non-blank line; returns false at end of stream.
bool next_line(std::istream& in, std::string& line);

void write_row(std::ostream& out, const Vector& v);

}  // namespace invclass::csv
