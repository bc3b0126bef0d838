#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "semdrive/sim.hpp"

namespace semdrive {

/// Parses {"centerline": [[x,y],...], "width": w, "closed": bool}.
/// Throws std::invalid_argument with a line or field diagnostic.
TrackSpec parse_track(std::string_view json_text);
TrackSpec load_track(const std::filesystem::path& path);

std::string track_to_json(const TrackSpec& track);

}  // namespace semdrive
