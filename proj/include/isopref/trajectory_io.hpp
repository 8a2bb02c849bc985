#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "isopref/model.hpp"

namespace isopref {

// Trajectory file: header `user_id,event_index,choice,intensity`, one row
// per event, users contiguous, event_index running 1..T+1. Lines beginning
// with '#' are comments.
inline constexpr const char* kTrajectoryHeader = "user_id,event_index,choice,intensity";

void write_trajectories(std::ostream& out, std::span<const ChoiceTrajectory> trajectories,
                        std::span<const std::string> comments = {});
void write_trajectories(const std::filesystem::path& path,
                        std::span<const ChoiceTrajectory> trajectories,
                        std::span<const std::string> comments = {});

// Throws InvalidInput naming the offending line on any format violation.
std::vector<ChoiceTrajectory> read_trajectories(std::istream& in);
std::vector<ChoiceTrajectory> read_trajectories(const std::filesystem::path& path);

}  // namespace isopref
