#ifndef KS_CONFIG_HPP
#define KS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace ks {

/// Flat dotted-key/value configuration. One `key = value` pair per line in
/// files; '#' starts a comment. Any key can be overridden through the
/// environment: `KS2D_solver_dt=...` overrides `solver.dt` (dots become
/// underscores). Typed getters record which keys were consumed so that
/// unknown keys can be rejected afterwards.
class Config {
public:
    Config() = default;
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

    /// Throws std::invalid_argument listing keys that were never consumed.
    void reject_unknown() const;

    void set(const std::string& key, const std::string& value);

private:
    const std::string* lookup(const std::string& key) const;
    std::map<std::string, std::string> kv_;
    mutable std::map<std::string, std::string> env_cache_;
    mutable std::set<std::string> consumed_;
};

/// FNV-1a over a canonical text form; used to stamp outputs.
std::uint64_t fnv1a_hash(const std::string& text);

} // namespace ks

#endif
