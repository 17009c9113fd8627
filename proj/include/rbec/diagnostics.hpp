#pragma once

#include <functional>
#include <string>

namespace rbec {

using WarningHandler = std::function<void(const std::string&)>;

/// Installs a process-wide sink for warnings (default: stderr). Returns the
/// previous handler.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace rbec
