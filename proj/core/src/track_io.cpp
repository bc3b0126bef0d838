#include "semdrive/track_io.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "semdrive/file_util.hpp"

namespace semdrive {

using nlohmann::json;

namespace {

double finite_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw std::invalid_argument(field + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw std::invalid_argument(field + ": must be finite");
  return x;
}

}  // namespace

TrackSpec parse_track(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("track JSON syntax error at line " +
                                std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                                ": " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("track: top level must be an object");

  TrackSpec track;
  if (!doc.contains("centerline")) throw std::invalid_argument("centerline: missing");
  const json& pts = doc["centerline"];
  if (!pts.is_array()) throw std::invalid_argument("centerline: expected an array");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string field = "centerline[" + std::to_string(i) + "]";
    if (!pts[i].is_array() || pts[i].size() != 2) {
      throw std::invalid_argument(field + ": expected [x, y]");
    }
    track.centerline.push_back({finite_number(pts[i][0], field + "[0]"),
                                finite_number(pts[i][1], field + "[1]")});
  }
  if (!doc.contains("width")) throw std::invalid_argument("width: missing");
  track.width = finite_number(doc["width"], "width");
  if (!doc.contains("closed")) throw std::invalid_argument("closed: missing");
  if (!doc["closed"].is_boolean()) throw std::invalid_argument("closed: expected a boolean");
  track.closed = doc["closed"].get<bool>();
  track.validate();
  return track;
}

TrackSpec load_track(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw std::invalid_argument("track file not found: " + path.string());
  }
  try {
    return parse_track(read_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string track_to_json(const TrackSpec& track) {
  json pts = json::array();
  for (const Vec2& p : track.centerline) pts.push_back({p.x, p.y});
  json doc = {{"centerline", pts}, {"width", track.width}, {"closed", track.closed}};
  return doc.dump() + "\n";
}

}  // namespace semdrive
