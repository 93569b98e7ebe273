#pragma once

#include <nlohmann/json.hpp>

#include <string>

namespace pnsim {

/// Parse a small TOML subset into JSON: comments, [dotted.table] headers,
/// `key = value` pairs with string / integer / float / boolean / single-line
/// array values. Enough for flat experiment configs; not a full TOML parser.
/// Throws ParamError with a line number on malformed input.
nlohmann::json parse_toml_lite(const std::string& text);

} // namespace pnsim
