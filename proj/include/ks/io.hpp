#ifndef KS_IO_HPP
#define KS_IO_HPP

#include <cstdint>
#include <string>

#include "ks/diagnostics.hpp"
#include "ks/grid.hpp"

namespace ks {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Series CSV: one `# ks2d <version> config=<hex hash>` stamp line, a header
/// line, then rows with 17 significant digits.
void write_series_csv(const std::string& path, const SeriesTable& table,
                      std::uint64_t config_hash);
SeriesTable read_series_csv(const std::string& path);

/// Binary field snapshot: fixed header (magic, version, n, L, time, name,
/// config hash) followed by row-major doubles, native endianness.
struct SnapshotMeta {
    std::string name;
    double time = 0;
    std::uint64_t config_hash = 0;
};
void write_snapshot(const std::string& path, const Field& f, const SnapshotMeta& meta);
Field read_snapshot(const std::string& path, SnapshotMeta* meta = nullptr);

/// CSV export of a field (x,y,value rows); for plotting.
void write_field_csv(const std::string& path, const Field& f, std::uint64_t config_hash);

/// Format a double with 17 significant digits (round-trip exact).
std::string format_g17(double v);

} // namespace ks

#endif
