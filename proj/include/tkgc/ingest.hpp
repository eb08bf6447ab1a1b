#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tkgc/graph.hpp"
#include "tkgc/rng.hpp"
#include "tkgc/types.hpp"

namespace tkgc {

// Bidirectional string <-> dense id map; ids follow first appearance.
class Vocabulary {
 public:
  std::int32_t intern(std::string_view name);
  [[nodiscard]] std::int32_t id(std::string_view name) const;  // -1 when absent
  [[nodiscard]] const std::string& name(std::int32_t id) const { return names_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] std::size_t size() const { return names_.size(); }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

// Maps dense TimeIndex values back to the dataset's own timestamp tokens.
struct TimeAxis {
  enum class Kind { kDate, kInteger };
  Kind kind = Kind::kDate;
  std::int64_t origin = 0;  // days since 1970-01-01 for dates, raw value for integers
  std::int64_t step = 1;    // integer timestamps only

  [[nodiscard]] std::string format(TimeIndex t) const;
};

struct CalendarDay {
  unsigned month = 1;
  unsigned day = 1;
};

struct DatasetStats {
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::size_t n_test = 0;
  std::size_t n_entities = 0;
  std::size_t n_relations = 0;
  std::size_t n_timestamps = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
  [[nodiscard]] std::string to_json() const;
};

struct SplitSet {
  QuadrupleList train;
  QuadrupleList valid;
  QuadrupleList test;
};

// A parsed dataset. Quadruples are RAW (no reciprocals).
struct Dataset {
  SplitSet splits;
  Vocabulary entities;
  Vocabulary relations;
  TimeAxis time_axis;
  DatasetStats stats;

  [[nodiscard]] VocabSizes vocab_sizes() const {
    return {entities.size(), relations.size(), stats.n_timestamps};
  }
};

// Parses three TSV files (subject, relation, object, timestamp). Vocabularies
// span the union of the splits; timestamps become dense indices from the
// minimum. Throws ParseError with file name and 1-based line number.
Dataset parse_dataset(const std::filesystem::path& train_path,
                      const std::filesystem::path& valid_path,
                      const std::filesystem::path& test_path);

// train.txt / valid.txt / test.txt inside `dir`.
Dataset load_dataset_dir(const std::filesystem::path& dir);

// Counts over raw quadruples: distinct entities and relations that occur,
// n_timestamps = max TimeIndex + 1.
DatasetStats compute_stats(const SplitSet& splits);

// Days since 1970-01-01 for "YYYY-MM-DD"; throws ParseError on anything else.
std::int64_t parse_iso_date(std::string_view token);

// (month, day-of-month) for every TimeIndex in [0, num_timestamps).
std::vector<CalendarDay> calendar_of(const TimeAxis& axis, std::size_t num_timestamps);

// Unseen-timestamp split: facts on days 5, 15 and 25 of any month leave the
// training set, are shuffled with `seed` and halved into valid/test, and any
// valid/test fact with an entity absent from the new training set is dropped.
SplitSet make_unseen_split(std::span<const Quadruple> train, std::span<const CalendarDay> calendar,
                           std::uint64_t seed);

struct IrregularSplit {
  SplitSet splits;
  std::vector<TimeIndex> snapshots;
  DatasetStats stats;
};

using GapSampler = std::function<TimeIndex(Rng&)>;

// Keeps the snapshots 0 = s_0 < s_1 < ... with gaps drawn uniformly from
// {1, 2, 3, 4}; facts keep their original split membership and time index.
IrregularSplit make_irregular_split(const Dataset& dataset, std::uint64_t seed);
IrregularSplit make_irregular_split(const Dataset& dataset, std::uint64_t seed,
                                    const GapSampler& gap);

// Writes train/valid/test.txt with the original tokens, entity2id.txt,
// relation2id.txt and stats.json.
void write_split_files(const std::filesystem::path& dir, const SplitSet& splits,
                       const Dataset& source, const DatasetStats& stats);

}  // namespace tkgc
