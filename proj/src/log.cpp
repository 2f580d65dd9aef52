#include "tvinfer/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace tvinfer {

namespace {

spdlog::logger& logger() {
  static auto instance = [] {
    auto l = spdlog::stderr_logger_mt("tvinfer");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *instance;
}

}  // namespace

void set_verbosity(Verbosity level) {
  switch (level) {
    case Verbosity::quiet: logger().set_level(spdlog::level::err); break;
    case Verbosity::normal: logger().set_level(spdlog::level::warn); break;
    case Verbosity::verbose: logger().set_level(spdlog::level::debug); break;
  }
}

void log_warning(const std::string& message) { logger().warn(message); }
void log_info(const std::string& message) { logger().info(message); }
void log_debug(const std::string& message) { logger().debug(message); }

}  // namespace tvinfer
