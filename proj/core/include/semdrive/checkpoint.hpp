#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "semdrive/policy_net.hpp"

namespace semdrive {

inline constexpr int kCheckpointVersion = 1;

/// {"version": 1, "arch": "<id>", "layers": [{"name", "shape", "data"}, ...]}
std::string checkpoint_to_json(const NetworkParams& params);

/// Validates version, architecture id, layer names, shapes, element counts and
/// finiteness. When `expected` is given the architecture must match it.
/// Throws std::invalid_argument with the offending layer or field.
NetworkParams checkpoint_from_json(std::string_view text,
                                   const std::optional<NetArch>& expected = std::nullopt);

/// Atomic write (temp file + rename).
void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_checkpoint(const std::filesystem::path& path,
                              const std::optional<NetArch>& expected = std::nullopt);

}  // namespace semdrive
