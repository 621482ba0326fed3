#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace taxelgraph {

// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);
void append_double(std::string& out, double value);

// Strict parsers: the whole token must be consumed. Throw DataError.
double parse_double(std::string_view token);
std::int64_t parse_int(std::string_view token);

// Whitespace tokenizer that keeps views into `line`.
std::vector<std::string_view> split_tokens(std::string_view line);

std::string join_doubles(std::span<const double> values, char separator = ' ');

}  // namespace taxelgraph
