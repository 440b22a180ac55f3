#pragma once

#include <map>
#include <string>

namespace rsm {

/// Flat key=value text: one pair per line, '#' starts a comment, keys are
/// written in sorted order so the text is reproducible.
class KeyValues {
public:
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;

    const std::map<std::string, std::string>& entries() const noexcept { return values_; }

    std::string to_text() const;
    static KeyValues parse(const std::string& text);
    static KeyValues load(const std::string& path);
    void save(const std::string& path) const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace rsm
