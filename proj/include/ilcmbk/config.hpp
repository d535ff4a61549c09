#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ilcmbk {

/// Plain-text key/value tree shared by experiment configs and plant presets.
///
/// Format: one `key = value` per line, `#` starts a comment, blank lines are
/// ignored. Keys use dots for grouping (`learn.alpha`, `plant.m`). Values are
/// parsed on access; breakpoint lists are whitespace-separated `x:f` pairs.
class ConfigTree {
public:
    static ConfigTree parse_file(const std::filesystem::path& path);
    static ConfigTree parse_string(std::string_view text, std::string origin = "<string>");

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::pair<double, double>> get_pairs(const std::string& key) const;

    void set(const std::string& key, std::string value);

    const std::map<std::string, std::string>& entries() const { return entries_; }
    const std::string& origin() const { return origin_; }

private:
    std::map<std::string, std::string> entries_;
    std::string origin_;
};

}  // namespace ilcmbk
