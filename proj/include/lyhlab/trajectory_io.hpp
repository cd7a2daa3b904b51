#pragma once

// Plain-text trajectory dumps: one CSV per snapshot plus a JSON manifest.

#include <filesystem>

#include "lyhlab/flow.hpp"

namespace lyhlab::flow {

/// Writes `dir`/snapshot_<k>.csv (node, Re z, Im z per complex dimension, u, v) and
/// `dir`/trajectory.json (model, epsilon, a0, times, scales). Returns the number of files.
int write_trajectory(const FlowTrajectory& trajectory, const std::filesystem::path& dir);

}  // namespace lyhlab::flow
