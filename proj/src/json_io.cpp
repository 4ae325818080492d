#include "mmviad/json_io.hpp"

#include <fstream>
#include <sstream>

#include "mmviad/error.hpp"

namespace mmviad {

nlohmann::json intervals_to_json(const IntervalSet& set) {
  auto out = nlohmann::json::array();
  for (const auto& iv : set) out.push_back({iv.start, iv.end});
  return out;
}

IntervalSet intervals_from_json(const nlohmann::json& value, double duration) {
  if (!value.is_array()) throw DataError("intervals must be an array of [start, end] pairs");
  std::vector<Interval> raw;
  for (const auto& pair : value) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw DataError("interval entries must be [start, end] number pairs");
    }
    raw.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return IntervalSet::normalized(std::move(raw), duration);
}

void for_each_json_line(std::istream& in,
                        const std::function<void(const nlohmann::json&, int)>& fn) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    }
    fn(value, line_no);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace mmviad
