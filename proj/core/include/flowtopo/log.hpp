#pragma once

#include <functional>
#include <string_view>

namespace flowtopo {

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink (default: std::clog). Returns the previous handler.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace flowtopo
