#include "titl/service_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>

#include "titl/search.hpp"

namespace titl {
namespace {

using Value = std::variant<std::string, long long, double, bool, std::vector<std::string>>;

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && in_str) { ++i; continue; }
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

std::string parse_string(std::string_view& s, const std::string& key) {
    if (s.empty() || s.front() != '"') throw ConfigError(key, "expected a quoted string");
    std::string out;
    std::size_t i = 1;
    for (; i < s.size() && s[i] != '"'; ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            ++i;
            switch (s[i]) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: throw ConfigError(key, "unsupported escape");
            }
        } else {
            out += s[i];
        }
    }
    if (i >= s.size()) throw ConfigError(key, "unterminated string");
    s.remove_prefix(i + 1);
    return out;
}

Value parse_value(std::string_view s, const std::string& key) {
    s = trim(s);
    if (s.empty()) throw ConfigError(key, "missing value");
    if (s.front() == '"') {
        auto str = parse_string(s, key);
        if (!trim(s).empty()) throw ConfigError(key, "trailing characters after string");
        return str;
    }
    if (s.front() == '[') {
        s.remove_prefix(1);
        std::vector<std::string> items;
        for (;;) {
            s = trim(s);
            if (!s.empty() && s.front() == ']') break;
            items.push_back(parse_string(s, key));
            s = trim(s);
            if (!s.empty() && s.front() == ',') s.remove_prefix(1);
            else if (s.empty() || s.front() != ']') throw ConfigError(key, "malformed array");
        }
        s.remove_prefix(1);
        if (!trim(s).empty()) throw ConfigError(key, "trailing characters after array");
        return items;
    }
    if (s == "true") return true;
    if (s == "false") return false;
    long long i = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (ec == std::errc() && p == s.data() + s.size()) return i;
    double d = 0;
    auto [p2, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec2 == std::errc() && p2 == s.data() + s.size()) return d;
    throw ConfigError(key, "unrecognized value '" + std::string(s) + "'");
}

template <typename T>
const T& expect(const Value& v, const std::string& key, const char* type) {
    if (auto p = std::get_if<T>(&v)) return *p;
    throw ConfigError(key, std::string("expected ") + type);
}

double as_number(const Value& v, const std::string& key) {
    if (auto p = std::get_if<long long>(&v)) return static_cast<double>(*p);
    return expect<double>(v, key, "a number");
}

}  // namespace

std::chrono::seconds parse_duration(std::string_view text) {
    text = trim(text);
    long long n = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc() || n < 0) throw ValidationError("invalid duration '" + std::string(text) + "'");
    const std::string_view unit = text.substr(static_cast<std::size_t>(p - text.data()));
    if (unit.empty() || unit == "s") return std::chrono::seconds(n);
    if (unit == "m") return std::chrono::minutes(n);
    if (unit == "h") return std::chrono::hours(n);
    if (unit == "d") return std::chrono::hours(24 * n);
    throw ValidationError("invalid duration unit in '" + std::string(text) + "'");
}

void ServiceConfig::validate() const {
    if (port < 1 || port > 65535) throw ConfigError("port", "must be in [1, 65535]");
    if (default_k < 1) throw ConfigError("default_k", "must be at least 1");
    if (!(default_alpha >= 0.0 && default_alpha <= 1.0)) throw ConfigError("default_alpha", "must be in [0, 1]");
    try {
        SearchMode::parse(default_mode, default_alpha);
    } catch (const ValidationError& e) {
        throw ConfigError("default_mode", e.what());
    }
    if (session_ttl.count() <= 0) throw ConfigError("session_ttl", "must be positive");
}

ServiceConfig parse_service_config(std::string_view text, ServiceConfig cfg) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(strip_comment(text.substr(start, end - start)));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line != "[service]") throw ConfigError(std::string(line), "unknown table");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(std::string(line), "line " + std::to_string(line_no) + " is not key = value");
        const std::string key(trim(line.substr(0, eq)));
        const Value v = parse_value(line.substr(eq + 1), key);

        if (key == "bind") cfg.bind = expect<std::string>(v, key, "a string");
        else if (key == "port") cfg.port = static_cast<int>(expect<long long>(v, key, "an integer"));
        else if (key == "index_path") cfg.index_path = expect<std::string>(v, key, "a string");
        else if (key == "model_path") cfg.model_path = expect<std::string>(v, key, "a string");
        else if (key == "default_k") {
            const auto k = expect<long long>(v, key, "an integer");
            if (k < 1) throw ConfigError(key, "must be at least 1");
            cfg.default_k = static_cast<std::size_t>(k);
        } else if (key == "default_mode") cfg.default_mode = expect<std::string>(v, key, "a string");
        else if (key == "default_alpha") cfg.default_alpha = as_number(v, key);
        else if (key == "session_ttl") {
            try {
                if (auto p = std::get_if<long long>(&v)) cfg.session_ttl = parse_duration(std::to_string(*p));
                else cfg.session_ttl = parse_duration(expect<std::string>(v, key, "a duration"));
            } catch (const ConfigError&) {
                throw;
            } catch (const ValidationError& e) {
                throw ConfigError(key, e.what());
            }
        } else if (key == "snapshot_path") {
            const auto& p = expect<std::string>(v, key, "a string");
            cfg.snapshot_path = p.empty() ? std::nullopt : std::optional<std::string>(p);
        } else if (key == "cors_origins") cfg.cors_origins = expect<std::vector<std::string>>(v, key, "an array of strings");
        else if (key == "lowercase") cfg.lowercase = expect<bool>(v, key, "a boolean");
        else if (key == "strip_punctuation") cfg.strip_punctuation = expect<bool>(v, key, "a boolean");
        else throw ConfigError(key, "unknown key");
    }
    cfg.validate();
    return cfg;
}

ServiceConfig load_service_config(const std::filesystem::path& path, ServiceConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_service_config(buf.str(), std::move(base));
}

}  // namespace titl
