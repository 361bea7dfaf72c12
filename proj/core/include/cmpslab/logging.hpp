#pragma once

#include <string>

namespace cmpslab {

/// Sets the global log level from CMPSLAB_LOG (trace, debug, info, warn, error, critical,
/// off); `fallback` applies when the variable is unset. Logs go to stderr.
/// Throws ConfigError for an unrecognised level name.
void configure_logging(const std::string& fallback = "warn");

}  // namespace cmpslab
