#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "semdrive/render.hpp"

namespace semdrive {

/// Binary PGM byte layout: "P5\n<width> <height>\n255\n" followed by
/// width*height bytes, row-major, top row first, byte = round(level * 255).
std::string encode_pgm(const SemanticFrame& frame);

/// Accepts any maxval in [1, 255] and whitespace/comments in the header as
/// permitted by the format. Every byte is snapped to the nearest palette level.
/// Throws std::runtime_error on malformed input.
SemanticFrame decode_pgm(std::string_view bytes);

void write_pgm(const std::filesystem::path& path, const SemanticFrame& frame);
SemanticFrame read_pgm(const std::filesystem::path& path);

}  // namespace semdrive
