#pragma once

#include <functional>
#include <string>

namespace toklab::log {

using Sink = std::function<void(const std::string&)>;

/// Replaces the warning sink (stderr by default) and returns the previous one.
Sink set_warning_sink(Sink sink);

void warn(const std::string& message);

}  // namespace toklab::log
