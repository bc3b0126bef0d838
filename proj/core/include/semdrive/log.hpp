#pragma once

#include <string_view>

namespace semdrive::log {

enum class Level { Error, Info, Debug };

/// Reads SEMDRIVE_LOG (error|info|debug); unset or unknown means info.
void init_from_env();
void set_level(Level level);

void error(std::string_view message);
void info(std::string_view message);
void debug(std::string_view message);

}  // namespace semdrive::log
