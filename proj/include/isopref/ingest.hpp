#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "isopref/model.hpp"

namespace isopref {

struct RatingEvent {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
  double rating = 0.0;
};

// Column names of a ratings file. The default layout is
// `user_id,item_id,rating,timestamp`; movielens() matches ratings.csv.
struct EventFormat {
  char delimiter = ',';
  std::string user_column = "user_id";
  std::string item_column = "item_id";
  std::string rating_column = "rating";
  std::string timestamp_column = "timestamp";

  static EventFormat movielens();
};

// Column names of a categories file (one row per item, tags separated by
// `tag_separator`). movielens() matches movies.csv.
struct CategoryFormat {
  char delimiter = ',';
  std::string item_column = "item_id";
  std::string tags_column = "tags";
  char tag_separator = '|';

  static CategoryFormat movielens();
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct EventLoad {
  std::vector<RatingEvent> events;
  std::vector<RowError> errors;
  std::vector<std::string> warnings;
};

// Parses events in file order. Malformed rows are reported and skipped; a
// header lacking a required column throws InvalidInput.
EventLoad load_events(const std::filesystem::path& path, const EventFormat& format = {});

using ItemCategories = std::unordered_map<std::string, std::vector<std::string>>;

ItemCategories load_categories(const std::filesystem::path& path,
                               const CategoryFormat& format = {},
                               std::vector<RowError>* errors = nullptr);

struct GroupSpec {
  std::set<std::string> group1;  // tags that make an item option c1
  std::set<std::string> group0;  // tags that make an item option c0
  ItemCategories categories;

  void validate() const;
};

enum class Membership { Group1, Group0, Both, Neither };

std::string to_string(Membership membership);

// Unknown items are Neither.
Membership classify_item(const std::string& item_id, const GroupSpec& groups);

enum class IntensityMode { Constant, RatingBased };

struct IngestRules {
  std::size_t min_choices = 20;
  IntensityMode intensity = IntensityMode::Constant;

  void validate() const;
};

struct IngestSummary {
  std::size_t input_events = 0;
  std::size_t users_seen = 0;
  std::size_t valid_users = 0;
  std::size_t users_below_min = 0;
  std::size_t unknown_items = 0;
  // Dropped events by reason: neither, both, duplicate, non_positive_rating.
  std::map<std::string, std::size_t> dropped;
};

// Per user: drops items outside exactly one group and non-positive ratings
// (rating-based mode), keeps the earliest event per item, orders by
// (timestamp, item_id), maps group 1 to choice 1, assigns intensities, and
// drops users left with fewer than min_choices events. Users are emitted in
// ascending user_id order. Throws InvalidInput when no user survives.
std::vector<ChoiceTrajectory> extract_pairwise(std::span<const RatingEvent> events,
                                               const GroupSpec& groups, const IngestRules& rules,
                                               IngestSummary* summary = nullptr);

}  // namespace isopref
