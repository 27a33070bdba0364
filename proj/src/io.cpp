#include "ks/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ks {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_series_csv(const std::string& path, const SeriesTable& table,
                      std::uint64_t config_hash) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    char stamp[64];
    std::snprintf(stamp, sizeof stamp, "%016llx",
                  static_cast<unsigned long long>(config_hash));
    out << "# ks2d " << kArtifactVersion << " config=" << stamp << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << table.columns[c];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_g17(row[c]);
        out << "\n";
    }
}

SeriesTable read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    SeriesTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tok;
        if (!have_header) {
            while (std::getline(ss, tok, ',')) t.columns.push_back(tok);
            have_header = true;
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        if (row.size() != t.columns.size())
            throw std::runtime_error("ragged CSV row in " + path);
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw std::runtime_error("missing CSV header in " + path);
    return t;
}

namespace {
constexpr char kMagic[8] = {'K', 'S', 'F', 'L', 'D', '1', 0, 0};
}

void write_snapshot(const std::string& path, const Field& f, const SnapshotMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(kMagic, 8);
    char version[16] = {0};
    std::strncpy(version, kArtifactVersion, sizeof version - 1);
    out.write(version, sizeof version);
    std::int64_t n = f.grid().n;
    double L = f.grid().half_width, time = meta.time;
    char name[32] = {0};
    std::strncpy(name, meta.name.c_str(), sizeof name - 1);
    std::uint64_t hash = meta.config_hash;
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&L), 8);
    out.write(reinterpret_cast<const char*>(&time), 8);
    out.write(name, sizeof name);
    out.write(reinterpret_cast<const char*>(&hash), 8);
    out.write(reinterpret_cast<const char*>(f.data().data()),
              static_cast<std::streamsize>(f.data().size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write: " + path);
}

Field read_snapshot(const std::string& path, SnapshotMeta* meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a ks2d snapshot: " + path);
    char version[16];
    in.read(version, sizeof version);
    std::int64_t n;
    double L, time;
    char name[32];
    std::uint64_t hash;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&L), 8);
    in.read(reinterpret_cast<char*>(&time), 8);
    in.read(name, sizeof name);
    in.read(reinterpret_cast<char*>(&hash), 8);
    Field f(GridSpec(static_cast<int>(n), L));
    in.read(reinterpret_cast<char*>(f.data().data()),
            static_cast<std::streamsize>(f.data().size() * sizeof(double)));
    if (!in) throw std::runtime_error("short read: " + path);
    if (meta) {
        meta->name = name;
        meta->time = time;
        meta->config_hash = hash;
    }
    return f;
}

void write_field_csv(const std::string& path, const Field& f, std::uint64_t config_hash) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    char stamp[64];
    std::snprintf(stamp, sizeof stamp, "%016llx",
                  static_cast<unsigned long long>(config_hash));
    out << "# ks2d " << kArtifactVersion << " config=" << stamp << "\n";
    out << "x,y,value\n";
    const GridSpec& g = f.grid();
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            out << format_g17(g.coord(i)) << ',' << format_g17(g.coord(j)) << ','
                << format_g17(f(i, j)) << "\n";
}

} // namespace ks
