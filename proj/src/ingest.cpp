#include "isopref/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include "isopref/csv.hpp"
#include "isopref/error.hpp"

namespace isopref {

namespace {

std::size_t column_of(const std::vector<std::string>& header, const std::string& name,
                      const std::filesystem::path& path) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (csv::trim(header[i]) == name) return i;
  }
  throw InvalidInput(path.string() + ": header lacks column '" + name + "'");
}

}  // namespace

EventFormat EventFormat::movielens() {
  EventFormat format;
  format.user_column = "userId";
  format.item_column = "movieId";
  return format;
}

CategoryFormat CategoryFormat::movielens() {
  CategoryFormat format;
  format.item_column = "movieId";
  format.tags_column = "genres";
  return format;
}

EventLoad load_events(const std::filesystem::path& path, const EventFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());

  EventLoad load;
  std::string line;
  if (!std::getline(in, line) || csv::trim(line).empty()) {
    load.warnings.push_back(path.string() + " is empty");
    return load;
  }
  const auto header = csv::split_line(line, format.delimiter);
  const std::size_t user = column_of(header, format.user_column, path);
  const std::size_t item = column_of(header, format.item_column, path);
  const std::size_t rating = column_of(header, format.rating_column, path);
  const std::size_t stamp = column_of(header, format.timestamp_column, path);
  const std::size_t needed = std::max({user, item, rating, stamp}) + 1;

  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_line(line, format.delimiter);
    if (fields.size() < needed) {
      load.errors.push_back({line_number, "missing column"});
      continue;
    }
    const auto r = csv::parse_double(fields[rating]);
    const auto t = csv::parse_int(fields[stamp]);
    const auto u = csv::trim(fields[user]);
    const auto i = csv::trim(fields[item]);
    if (u.empty() || i.empty()) {
      load.errors.push_back({line_number, "empty user or item id"});
    } else if (!r) {
      load.errors.push_back({line_number, "unparseable rating '" + fields[rating] + "'"});
    } else if (!t) {
      load.errors.push_back({line_number, "unparseable timestamp '" + fields[stamp] + "'"});
    } else {
      load.events.push_back({std::string(u), std::string(i), *t, *r});
    }
  }
  return load;
}

ItemCategories load_categories(const std::filesystem::path& path, const CategoryFormat& format,
                               std::vector<RowError>* errors) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  ItemCategories categories;
  std::string line;
  if (!std::getline(in, line)) return categories;
  const auto header = csv::split_line(line, format.delimiter);
  const std::size_t item = column_of(header, format.item_column, path);
  const std::size_t tags = column_of(header, format.tags_column, path);
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_line(line, format.delimiter);
    if (fields.size() <= std::max(item, tags)) {
      if (errors) errors->push_back({line_number, "missing column"});
      continue;
    }
    std::vector<std::string> parsed;
    for (const auto& tag : csv::split_line(fields[tags], format.tag_separator)) {
      const auto trimmed = csv::trim(tag);
      if (!trimmed.empty()) parsed.emplace_back(trimmed);
    }
    categories[std::string(csv::trim(fields[item]))] = std::move(parsed);
  }
  return categories;
}

void GroupSpec::validate() const {
  if (group1.empty() || group0.empty()) throw InvalidInput("both option groups need labels");
  for (const auto& tag : group1) {
    if (group0.contains(tag)) throw InvalidInput("tag '" + tag + "' appears in both groups");
  }
}

std::string to_string(Membership membership) {
  switch (membership) {
    case Membership::Group1: return "group1";
    case Membership::Group0: return "group0";
    case Membership::Both: return "both";
    case Membership::Neither: return "neither";
  }
  return "neither";
}

Membership classify_item(const std::string& item_id, const GroupSpec& groups) {
  const auto it = groups.categories.find(item_id);
  if (it == groups.categories.end()) return Membership::Neither;
  bool in1 = false;
  bool in0 = false;
  for (const auto& tag : it->second) {
    in1 = in1 || groups.group1.contains(tag);
    in0 = in0 || groups.group0.contains(tag);
  }
  if (in1 && in0) return Membership::Both;
  if (in1) return Membership::Group1;
  if (in0) return Membership::Group0;
  return Membership::Neither;
}

void IngestRules::validate() const {
  if (min_choices < 2) throw InvalidInput("min_choices must be at least 2");
}

std::vector<ChoiceTrajectory> extract_pairwise(std::span<const RatingEvent> events,
                                               const GroupSpec& groups, const IngestRules& rules,
                                               IngestSummary* summary) {
  groups.validate();
  rules.validate();
  IngestSummary local;
  IngestSummary& report = summary ? *summary : local;
  report = {};
  report.input_events = events.size();
  for (const char* reason : {"neither", "both", "duplicate", "non_positive_rating"}) {
    report.dropped[reason] = 0;
  }

  struct Kept {
    const RatingEvent* event;
    std::uint8_t choice;
    std::size_t order;  // position in the input, for stable ties
  };
  std::unordered_map<std::string, std::vector<Kept>> by_user;
  std::unordered_map<std::string, Membership> memo;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const RatingEvent& event = events[k];
    auto found = memo.find(event.item_id);
    if (found == memo.end()) {
      if (!groups.categories.contains(event.item_id)) {
        ++report.unknown_items;
        std::clog << "ingest: item " << event.item_id << " has no categories\n";
      }
      found = memo.emplace(event.item_id, classify_item(event.item_id, groups)).first;
    }
    auto& bucket = by_user[event.user_id];
    if (found->second == Membership::Neither) {
      ++report.dropped["neither"];
      continue;
    }
    if (found->second == Membership::Both) {
      ++report.dropped["both"];
      continue;
    }
    if (rules.intensity == IntensityMode::RatingBased && !(event.rating > 0.0)) {
      ++report.dropped["non_positive_rating"];
      continue;
    }
    bucket.push_back({&event, static_cast<std::uint8_t>(found->second == Membership::Group1), k});
  }
  report.users_seen = by_user.size();

  std::vector<std::string> users;
  users.reserve(by_user.size());
  for (const auto& entry : by_user) users.push_back(entry.first);
  std::sort(users.begin(), users.end(),
            [](const std::string& a, const std::string& b) { return csv::identifier_less(a, b); });

  std::vector<ChoiceTrajectory> trajectories;
  for (const std::string& user : users) {
    auto& kept = by_user[user];
    // Earliest event per item wins; equal timestamps fall back to input order.
    std::sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) {
      if (a.event->item_id != b.event->item_id) return a.event->item_id < b.event->item_id;
      if (a.event->timestamp != b.event->timestamp) return a.event->timestamp < b.event->timestamp;
      return a.order < b.order;
    });
    std::vector<Kept> unique;
    for (const Kept& k : kept) {
      if (!unique.empty() && unique.back().event->item_id == k.event->item_id) {
        ++report.dropped["duplicate"];
        continue;
      }
      unique.push_back(k);
    }
    if (unique.size() < rules.min_choices) {
      ++report.users_below_min;
      continue;
    }
    std::sort(unique.begin(), unique.end(), [](const Kept& a, const Kept& b) {
      if (a.event->timestamp != b.event->timestamp) return a.event->timestamp < b.event->timestamp;
      return csv::identifier_less(a.event->item_id, b.event->item_id);
    });
    std::vector<ChoiceEvent> choices;
    choices.reserve(unique.size());
    for (const Kept& k : unique) {
      const double intensity = rules.intensity == IntensityMode::Constant ? 1.0 : k.event->rating;
      choices.push_back({k.choice, intensity});
    }
    trajectories.emplace_back(user, std::move(choices));
  }
  report.valid_users = trajectories.size();
  if (trajectories.empty()) throw InvalidInput("no user has enough choices within the two groups");
  return trajectories;
}

}  // namespace isopref
