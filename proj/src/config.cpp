#include "rsm/config.hpp"

#include <charconv>
#include <cstdint>
#include <span>

#include "rsm/error.hpp"
#include "rsm/tensor_io.hpp"

namespace rsm {

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return std::string(s);
}

}  // namespace

void KeyValues::set(const std::string& key, double value) { values_[key] = io::format_double(value); }
void KeyValues::set(const std::string& key, long long value) { values_[key] = std::to_string(value); }

const std::string& KeyValues::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key) const {
    const auto& s = get(key);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("key '" + key + "': '" + s + "' is not a number");
    }
    return v;
}

double KeyValues::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long KeyValues::get_int(const std::string& key) const {
    const auto& s = get(key);
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
    }
    return v;
}

long long KeyValues::get_int_or(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::string KeyValues::to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
}

KeyValues KeyValues::parse(const std::string& text) {
    KeyValues kv;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ParseError(ParseError::Kind::Syntax, line_no, "config line " + std::to_string(line_no) + ": expected key=value");
        }
        kv.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    }
    return kv;
}

KeyValues KeyValues::load(const std::string& path) {
    const auto bytes = io::read_file_bytes(path);
    return parse(std::string(bytes.begin(), bytes.end()));
}

void KeyValues::save(const std::string& path) const {
    const auto text = to_text();
    io::write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace rsm
