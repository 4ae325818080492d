#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <string>

#include <json.hpp>

#include "mmviad/interval_set.hpp"

namespace mmviad {

nlohmann::json intervals_to_json(const IntervalSet& set);

// Accepts [[s, e], ...]; throws DataError on shape or range problems.
IntervalSet intervals_from_json(const nlohmann::json& value, double duration = kClipDurationSec);

/// Calls `fn(object, line_number)` for every non-blank line. Malformed JSON
/// raises SchemaError with the line number.
void for_each_json_line(std::istream& in, const std::function<void(const nlohmann::json&, int)>& fn);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace mmviad
