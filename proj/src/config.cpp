#include "ks/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ks {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string env_name(const std::string& key) {
    std::string name = "KS2D_";
    for (char c : key) name += (c == '.') ? '_' : c;
    return name;
}

} // namespace

Config Config::parse_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        if (cfg.kv_.count(key))
            throw std::invalid_argument("config: duplicate key '" + key + "'");
        cfg.kv_[key] = val;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

const std::string* Config::lookup(const std::string& key) const {
    consumed_.insert(key);
    auto ec = env_cache_.find(key);
    if (ec == env_cache_.end()) {
        const char* env = std::getenv(env_name(key).c_str());
        ec = env_cache_.emplace(key, env ? env : "").first;
    }
    if (!ec->second.empty()) return &ec->second;
    auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
}

bool Config::has(const std::string& key) const { return lookup(key) != nullptr; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const std::string* v = lookup(key);
    return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    const std::string* v = lookup(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw std::invalid_argument("config: key '" + key + "' is not a number: " + *v);
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    const std::string* v = lookup(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        int i = std::stoi(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        return i;
    } catch (...) {
        throw std::invalid_argument("config: key '" + key + "' is not an integer: " + *v);
    }
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const std::string* v = lookup(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        unsigned long long u = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        return u;
    } catch (...) {
        throw std::invalid_argument("config: key '" + key + "' is not an unsigned integer: " +
                                    *v);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const std::string* v = lookup(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "on" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "off" || *v == "no") return false;
    throw std::invalid_argument("config: key '" + key + "' is not a bool: " + *v);
}

void Config::reject_unknown() const {
    std::string bad;
    for (const auto& [k, v] : kv_) {
        if (!consumed_.count(k)) bad += (bad.empty() ? "" : ", ") + k;
    }
    if (!bad.empty()) throw std::invalid_argument("config: unknown keys: " + bad);
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace ks
