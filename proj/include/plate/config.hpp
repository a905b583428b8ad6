#pragma once

#include "plate/attractor_lab.hpp"

#include <cstdint>
#include <string>

namespace plate {

struct BasisSpec {
    int mx = 8;
    int ny = 8;
    int oversample = 3;
};

struct InitialSpec {
    std::string kind = "mode";   // mode | eigenmode | random | stationary_kick
    int m = 1, k = 0;            // eigenmode uses m as the 1-based index in ascending order
    double amplitude = 0.1;
    double radius = 1.0;
    double kick = 0.1;
};

struct PairsSpec {
    int count = 5;
    double radius = 1.0;
    double distance = 1e-2;
    double T = 40.0;
    double dt = 5e-3;
    int snapshot_every = 10;
};

struct DimensionSpec {
    std::vector<int> embed_dims{2, 4, 8};
    int theiler = 20;
    double tail_fraction = 0.5;
};

struct StationarySpec {
    int samples = 10;
    double radius = 1.0;
    double T = 80.0;
    double dt = 1e-2;
};

struct BarrierSpec {
    double eta_tilde = 0.5;
};

struct RunConfig {
    PlateConfig plate;
    BasisSpec basis;
    SimPlan sim;
    InitialSpec initial;
    SweepPlan sweep;
    PairsSpec pairs;
    DimensionSpec dimension;
    StationarySpec stationary;
    BarrierSpec barrier;
    AssumptionFCertificate assumption_f;
    std::uint64_t file_hash = 0;   // FNV-1a of the document text
};

// Strict INI-style parser: [section] headers, key = value lines, '#'
// comments. Unknown keys, duplicates, missing physical parameters and every
// invariant violation are collected and thrown together as a ConfigError.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

}  // namespace plate
