#pragma once

#include <filesystem>
#include <string>

#include "fibermem/design.hpp"
#include "fibermem/fem.hpp"
#include "fibermem/geometry.hpp"
#include "fibermem/optimizer.hpp"

namespace fibermem {

/// Legacy ASCII VTK unstructured grid (VTK_QUAD cells) with cell data
/// t1, t2, fiber_direction, M_I, M_II. Output is a pure function of the inputs.
std::string fields_vtk(const SurfaceMesh& mesh, const DesignField& design,
                       const MembraneState& state);
void export_fields(const SurfaceMesh& mesh, const DesignField& design, const MembraneState& state,
                   const std::filesystem::path& path);

/// iteration, compliance, volume, max_direction_change, inner_iterations
std::string history_csv(const RunHistory& history);

/// element, cx, cy, cz, t1, t2, sx, sy, sz, M_I, M_II, px, py, pz
std::string design_csv(const SurfaceMesh& mesh, const DesignField& design,
                       const MembraneState& state);

std::string summary_json(const OptimizationResult& result, int num_elements);

/// Writes `contents` to `path`; throws Error with the path on failure.
void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace fibermem
