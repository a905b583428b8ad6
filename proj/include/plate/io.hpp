#pragma once

#include "plate/integrator.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace plate {

using Json = nlohmann::ordered_json;

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);
// 17 significant digits, the CSV float format.
std::string fmt17(double v);

// Creates `dir`; refuses a non-empty existing directory unless overwrite.
void prepare_output_dir(const std::string& dir, bool overwrite);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const Json& doc);

// "# config_hash=<hex>" line, header row, one row per snapshot.
void write_ledger_csv(const std::string& path, const EnergyLedger& ledger, const std::string& config_hash);

// Little-endian snapshot container, see docs/config.md.
void write_snapshots(const std::string& path, const Trajectory& tr, std::uint64_t config_hash);

struct SnapshotFile {
    std::uint32_t version = 0;
    std::uint64_t config_hash = 0;
    int Mx = 0, Ny = 0;
    double dt = 0.0;
    std::vector<State> snapshots;
};
SnapshotFile read_snapshots(const std::string& path);

struct SvgSeries {
    std::string name;
    std::vector<double> y;
};

// Minimal polyline chart with shared x values.
void write_svg(const std::string& path, const std::string& title, const std::vector<double>& x,
               const std::vector<SvgSeries>& series, bool log_y = false);

}  // namespace plate
