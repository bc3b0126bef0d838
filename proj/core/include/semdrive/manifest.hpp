#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semdrive/eval.hpp"

namespace semdrive {

inline constexpr std::string_view kManifestHeader = "frame_id,angle_degrees,frame_path";

/// Parses a manifest CSV. Frame paths are kept as written. Throws
/// std::invalid_argument naming the line on malformed input.
std::vector<EvalRecord> parse_manifest(std::string_view csv);
std::vector<EvalRecord> read_manifest(const std::filesystem::path& path);

/// Serializes records whose frame source is a path; angles use 6 decimals.
std::string manifest_to_csv(std::span<const EvalRecord> records);

}  // namespace semdrive
