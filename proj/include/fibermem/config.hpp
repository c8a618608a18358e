#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fibermem/geometry.hpp"
#include "fibermem/material.hpp"
#include "fibermem/optimizer.hpp"

namespace fibermem {

enum class GeometryKind { Spheroid, Strip };

/// Direction of the strip edge load relative to the loaded edge.
enum class TractionDirection { Normal, Tangential };

struct GeometryConfig {
    GeometryKind kind = GeometryKind::Spheroid;
    // spheroid
    int n_lat = 17;
    int n_lon = 128;
    bool half = true;
    double radius_xy = 1.0;
    double radius_z = 0.5;
    bool exact_surface = true;  // false: plain isoparametric bilinear geometry
    // strip
    int nx = 40;
    int ny = 20;
    double length = 1.0;
    double width = 0.5;
    double load_length = 0.1;
    LoadSegment load_position = LoadSegment::Centered;

    bool operator==(const GeometryConfig&) const = default;
};

struct LoadConfig {
    double pressure = 0.0;  // spheroid
    double traction = 0.0;  // strip, force per length on the loaded segment
    TractionDirection traction_direction = TractionDirection::Normal;

    bool operator==(const LoadConfig&) const = default;
};

struct DesignConfig {
    double volume = 0.0;
    std::array<double, 2> lower{0.0, 0.0};
    std::array<double, 2> upper{0.0, 0.0};
    InitDirection init_direction = InitDirection::AxisAligned;

    bool operator==(const DesignConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "vtk", "json"};

    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    GeometryConfig geometry;
    MembraneMaterial material;
    LoadConfig load;
    DesignConfig design;
    OptimizationSettings settings;
    OutputConfig output;

    /// Throws ConfigError naming the violated invariant.
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

/// Parses a sectioned key = value document (see README for the grammar).
/// Unknown sections or keys and malformed values raise ConfigError with context.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical document listing every key, including defaults; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

}  // namespace fibermem
