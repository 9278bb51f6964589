#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

namespace moda {

// Reads the TOML subset used by pipeline configs into JSON:
//   key = value          bare or quoted keys
//   [table] / [a.b]      standard tables
//   values               basic/literal strings, integers, floats, booleans,
//                        arrays (may span lines)
//   # comments
// Inline tables, dotted keys, dates and multi-line strings are rejected.
// Throws ConfigError with the offending line number.
nlohmann::json parse_toml(std::string_view text);

}  // namespace moda
