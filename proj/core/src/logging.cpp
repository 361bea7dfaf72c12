#include "cmpslab/logging.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cmpslab/errors.hpp"

namespace cmpslab {

void configure_logging(const std::string& fallback) {
    const char* env = std::getenv("CMPSLAB_LOG");
    const std::string name = env && *env ? env : fallback;
    const auto level = spdlog::level::from_str(name);
    // from_str maps unknown names to off; only accept off when asked for.
    if (level == spdlog::level::off && name != "off") {
        throw ConfigError("CMPSLAB_LOG: unknown log level '" + name + "'");
    }
    static const bool installed = [] {
        auto logger = spdlog::stderr_color_mt("cmpslab");
        logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
        spdlog::set_default_logger(logger);
        return true;
    }();
    (void)installed;
    spdlog::set_level(level);
}

}  // namespace cmpslab
