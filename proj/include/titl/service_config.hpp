#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "titl/errors.hpp"

namespace titl {

// A bad configuration entry; key() names it.
class ConfigError : public ValidationError {
public:
    ConfigError(const std::string& key, const std::string& detail)
        : ValidationError("config key '" + key + "': " + detail), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct ServiceConfig {
    std::string bind = "127.0.0.1";
    int port = 8077;
    std::string index_path;
    std::string model_path;
    std::size_t default_k = 5;
    std::string default_mode = "embedding";
    double default_alpha = 0.5;
    std::chrono::seconds session_ttl = std::chrono::hours(24);
    std::optional<std::string> snapshot_path;
    std::vector<std::string> cors_origins;
    bool lowercase = false;
    bool strip_punctuation = false;

    // Throws ConfigError for the first invalid field.
    void validate() const;
};

// "90", "90s", "15m", "24h", "2d".
std::chrono::seconds parse_duration(std::string_view text);

// Flat TOML subset: `key = value` lines with strings, integers, floats,
// booleans and arrays of strings; `#` comments; an optional [service] table
// header. Keys mirror the ServiceConfig field names. Values override base.
ServiceConfig parse_service_config(std::string_view text, ServiceConfig base = {});
ServiceConfig load_service_config(const std::filesystem::path& path, ServiceConfig base = {});

}  // namespace titl
