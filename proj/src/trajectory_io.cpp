#include "isopref/trajectory_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "isopref/csv.hpp"
#include "isopref/error.hpp"

namespace isopref {

void write_trajectories(std::ostream& out, std::span<const ChoiceTrajectory> trajectories,
                        std::span<const std::string> comments) {
  for (const std::string& comment : comments) out << "# " << comment << '\n';
  out << kTrajectoryHeader << '\n';
  for (const ChoiceTrajectory& trajectory : trajectories) {
    const auto events = trajectory.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
      out << trajectory.user_id() << ',' << (i + 1) << ',' << static_cast<int>(events[i].choice)
          << ',' << csv::format_double(events[i].intensity) << '\n';
    }
  }
}

void write_trajectories(const std::filesystem::path& path,
                        std::span<const ChoiceTrajectory> trajectories,
                        std::span<const std::string> comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  write_trajectories(out, trajectories, comments);
  if (!out) throw InvalidInput("failed writing " + path.string());
}

std::vector<ChoiceTrajectory> read_trajectories(std::istream& in) {
  std::vector<ChoiceTrajectory> trajectories;
  std::string line;
  std::size_t line_number = 0;
  bool header_seen = false;

  std::string current_user;
  std::vector<ChoiceEvent> current_events;
  std::unordered_set<std::string> finished_users;

  auto fail = [&](const std::string& message) -> void {
    throw InvalidInput("line " + std::to_string(line_number) + ": " + message);
  };
  auto flush = [&] {
    if (current_events.empty()) return;
    if (current_events.size() < 2) fail("user " + current_user + " has fewer than two events");
    trajectories.emplace_back(current_user, std::move(current_events));
    finished_users.insert(current_user);
    current_events.clear();
  };

  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = csv::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    if (!header_seen) {
      if (trimmed != kTrajectoryHeader) fail("expected header '" + std::string(kTrajectoryHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto fields = csv::split_line(trimmed);
    if (fields.size() != 4) fail("expected 4 fields");
    const std::string& user = fields[0];
    if (user.empty()) fail("empty user_id");
    const auto index = csv::parse_int(fields[1]);
    const auto choice = csv::parse_int(fields[2]);
    const auto intensity = csv::parse_double(fields[3]);
    if (!index || !choice || !intensity) fail("unparseable field");
    if (*choice != 0 && *choice != 1) fail("choice must be 0 or 1");
    if (!(*intensity > 0.0)) fail("intensity must be positive");

    if (user != current_user) {
      flush();
      if (finished_users.contains(user)) fail("rows for user " + user + " are not contiguous");
      current_user = user;
    }
    if (*index != static_cast<std::int64_t>(current_events.size()) + 1) {
      fail("event_index out of sequence for user " + user);
    }
    current_events.push_back({static_cast<std::uint8_t>(*choice), *intensity});
  }
  if (!header_seen) throw InvalidInput("trajectory file has no header");
  flush();
  return trajectories;
}

std::vector<ChoiceTrajectory> read_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_trajectories(in);
}

}  // namespace isopref
