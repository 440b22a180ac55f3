#pragma once

#include <functional>
#include <string>

namespace rsm {

/// Non-fatal diagnostics (degenerate operators, frozen pixels). Written to
/// stderr unless a sink is installed; the sink must be thread-safe.
void warn(const std::string& message);
void set_warning_sink(std::function<void(const std::string&)> sink);

}  // namespace rsm
