#include "rsm/log.hpp"

#include <iostream>
#include <mutex>

namespace rsm {

namespace {
std::mutex g_mu;
std::function<void(const std::string&)> g_sink;
}  // namespace

void warn(const std::string& message) {
    std::lock_guard lock(g_mu);
    if (g_sink) {
        g_sink(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

void set_warning_sink(std::function<void(const std::string&)> sink) {
    std::lock_guard lock(g_mu);
    g_sink = std::move(sink);
}

}  // namespace rsm
