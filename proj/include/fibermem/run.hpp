#pragma once

#include <filesystem>
#include <ostream>

#include "fibermem/config.hpp"
#include "fibermem/fem.hpp"
#include "fibermem/optimizer.hpp"

namespace fibermem {

/// Mesh, loads and starting design generated from a configuration.
struct Problem {
    SurfaceMesh mesh;
    LoadCase loads;
    DesignField design0;
};

/// Exit codes of `run`.
enum ExitCode : int { kConverged = 0, kError = 1, kNotConverged = 2 };

/// Builds the benchmark problem: generated mesh, load case with rigid-mode and
/// symmetry constraints, uniform initial thicknesses and initial directions.
Problem build_problem(const RunConfig& config);

/// Runs the optimizer on a built problem.
OptimizationResult solve_problem(const RunConfig& config, const Problem& problem);

/// Builds, optimizes and writes every requested artifact into config.output.directory.
/// Returns kConverged or kNotConverged; errors propagate as exceptions.
int run(const RunConfig& config, std::ostream* log = nullptr);

}  // namespace fibermem
