#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

namespace qnopt {

// Parses the TOML subset used by study files: tables, dotted table headers,
// arrays of tables, dotted keys, basic and literal strings, integers, floats
// (including inf/nan), booleans, arrays and inline tables. Dates and
// multi-line strings are not supported. Integers become JSON integers.
// Throws ParseError carrying the offending line.
nlohmann::ordered_json parse_toml(std::string_view text);

// Throws ConfigError when the file cannot be read.
nlohmann::ordered_json load_toml(const std::filesystem::path &path);

} // namespace qnopt
