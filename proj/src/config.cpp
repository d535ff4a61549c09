#include "ilcmbk/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ilcmbk {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << what;
    throw std::runtime_error(os.str());
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': cannot parse '" + value + "' as a number");
    }
}

}  // namespace

ConfigTree ConfigTree::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path.string());
}

ConfigTree ConfigTree::parse_string(std::string_view text, std::string origin) {
    ConfigTree tree;
    tree.origin_ = std::move(origin);
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;

        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;

        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) fail(tree.origin_, lineno, "expected 'key = value'");
        std::string key = trim(std::string_view(stripped).substr(0, eq));
        std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) fail(tree.origin_, lineno, "empty key");
        tree.entries_[key] = std::move(value);
    }
    return tree;
}

bool ConfigTree::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string ConfigTree::get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw std::runtime_error("missing config key '" + key + "' in " + origin_);
    return it->second;
}

std::string ConfigTree::get_string(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double ConfigTree::get_double(const std::string& key) const {
    return parse_double(key, get_string(key));
}

double ConfigTree::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : parse_double(key, it->second);
}

std::size_t ConfigTree::get_size(const std::string& key, std::size_t fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw std::runtime_error("config key '" + key + "': expected a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

std::uint64_t ConfigTree::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc() || p != it->second.data() + it->second.size()) {
        throw std::runtime_error("config key '" + key + "': expected an unsigned integer");
    }
    return v;
}

bool ConfigTree::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::pair<double, double>> ConfigTree::get_pairs(const std::string& key) const {
    const std::string raw = get_string(key);
    std::vector<std::pair<double, double>> out;
    std::istringstream in(raw);
    std::string tok;
    while (in >> tok) {
        const std::size_t colon = tok.find(':');
        if (colon == std::string::npos) {
            throw std::runtime_error("config key '" + key + "': expected 'x:f' pairs, got '" + tok + "'");
        }
        out.emplace_back(parse_double(key, tok.substr(0, colon)),
                         parse_double(key, tok.substr(colon + 1)));
    }
    if (out.empty()) throw std::runtime_error("config key '" + key + "': empty pair list");
    return out;
}

void ConfigTree::set(const std::string& key, std::string value) {
    entries_[key] = std::move(value);
}

}  // namespace ilcmbk
