#include "semdrive/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace semdrive::log {

namespace {

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("semdrive");
    l->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    l->set_level(spdlog::level::info);
    return l;
  }();
  return *instance;
}

}  // namespace

void set_level(Level level) {
  switch (level) {
    case Level::Error: logger().set_level(spdlog::level::err); break;
    case Level::Info: logger().set_level(spdlog::level::info); break;
    case Level::Debug: logger().set_level(spdlog::level::debug); break;
  }
}

void init_from_env() {
  const char* env = std::getenv("SEMDRIVE_LOG");
  const std::string value = env ? env : "info";
  if (value == "error") {
    set_level(Level::Error);
  } else if (value == "debug") {
    set_level(Level::Debug);
  } else {
    set_level(Level::Info);
  }
}

void error(std::string_view message) { logger().error("{}", message); }
void info(std::string_view message) { logger().info("{}", message); }
void debug(std::string_view message) { logger().debug("{}", message); }

}  // namespace semdrive::log
