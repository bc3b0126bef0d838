#include "semdrive/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "semdrive/file_util.hpp"

namespace semdrive {

namespace {

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::vector<EvalRecord> parse_manifest(std::string_view csv) {
  std::vector<EvalRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    const std::string_view line = trim_cr(csv.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kManifestHeader) {
        throw std::invalid_argument("manifest line 1: expected header '" +
                                    std::string(kManifestHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      throw std::invalid_argument("manifest line " + std::to_string(line_no) +
                                  ": expected 3 fields");
    }
    EvalRecord rec;
    rec.frame_id = std::string(line.substr(0, c1));
    const std::string angle(line.substr(c1 + 1, c2 - c1 - 1));
    char* parse_end = nullptr;
    rec.angle_degrees = std::strtod(angle.c_str(), &parse_end);
    if (angle.empty() || parse_end != angle.c_str() + angle.size() ||
        !std::isfinite(rec.angle_degrees)) {
      throw std::invalid_argument("manifest line " + std::to_string(line_no) +
                                  ": angle_degrees must be a finite number");
    }
    const std::string_view path = line.substr(c2 + 1);
    if (rec.frame_id.empty() || path.empty()) {
      throw std::invalid_argument("manifest line " + std::to_string(line_no) +
                                  ": empty frame_id or frame_path");
    }
    rec.frame_source = std::filesystem::path(std::string(path));
    records.push_back(std::move(rec));
  }
  if (!header_seen) throw std::invalid_argument("manifest: missing header");
  return records;
}

std::vector<EvalRecord> read_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string manifest_to_csv(std::span<const EvalRecord> records) {
  std::string out(kManifestHeader);
  out += "\n";
  char angle[64];
  for (const EvalRecord& r : records) {
    const auto* path = std::get_if<std::filesystem::path>(&r.frame_source);
    if (!path) throw std::invalid_argument("manifest_to_csv: record " + r.frame_id + " has no path");
    // Values that round to zero print as "0.000000", never "-0.000000".
    const double a = std::abs(r.angle_degrees) < 5e-7 ? 0.0 : r.angle_degrees;
    std::snprintf(angle, sizeof angle, "%.6f", a);
    out += r.frame_id + "," + angle + "," + path->generic_string() + "\n";
  }
  return out;
}

}  // namespace semdrive
