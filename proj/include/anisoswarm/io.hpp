#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anisoswarm/sim.hpp"

namespace anisoswarm {

/// Shortest text with 17 significant digits (round-trips a double).
std::string format_double(double v);

/// Writes `content` to a sibling temp file and renames it over `path`.
/// Throws Error{FileError}.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// `t,id,x,y` rows for each snapshot.
std::string trajectory_csv(std::span<const ParticleState> snapshots);

/// Positions from a `t,id,x,y` file, ordered by id; the t column is ignored.
/// When several snapshots are present the last one wins.
std::vector<Vec2> read_positions_csv(const std::filesystem::path& path);

/// JSON object with termination, t_final, max_speed_final, n_steps, wall_seconds.
std::string run_summary_json(const Trajectory& traj);

}  // namespace anisoswarm
