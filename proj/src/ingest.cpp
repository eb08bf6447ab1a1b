#include "tkgc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <unordered_set>

#include <json.hpp>

namespace tkgc {
namespace {

struct RawRecord {
  std::string subject;
  std::string relation;
  std::string object;
  std::string timestamp;
};

struct RawFile {
  std::filesystem::path path;
  std::vector<RawRecord> records;
  std::vector<std::size_t> line_numbers;
};

RawFile read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  RawFile file{path, {}, {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.emplace_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const bool empty_field =
        std::any_of(fields.begin(), fields.end(), [](const std::string& f) { return f.empty(); });
    if (fields.size() != 4 || empty_field) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 4 non-empty tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    file.records.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2]),
                            std::move(fields[3])});
    file.line_numbers.push_back(line_no);
  }
  return file;
}

std::optional<std::int64_t> parse_integer(std::string_view token) {
  std::int64_t value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || value < 0) return std::nullopt;
  return value;
}

bool looks_like_integer(std::string_view token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::int32_t Vocabulary::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::int32_t Vocabulary::id(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  return it == ids_.end() ? -1 : it->second;
}

std::int64_t parse_iso_date(std::string_view token) {
  using namespace std::chrono;
  auto fail = [&]() -> ParseError {
    return ParseError("unknown date format: '" + std::string(token) + "'");
  };
  if (token.size() != 10 || token[4] != '-' || token[7] != '-') throw fail();
  auto y = parse_integer(token.substr(0, 4));
  auto m = parse_integer(token.substr(5, 2));
  auto d = parse_integer(token.substr(8, 2));
  if (!y || !m || !d) throw fail();
  const year_month_day ymd{year{static_cast<int>(*y)}, month{static_cast<unsigned>(*m)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) throw fail();
  return sys_days{ymd}.time_since_epoch().count();
}

std::string TimeAxis::format(TimeIndex t) const {
  if (kind == Kind::kInteger) return std::to_string(origin + step * t);
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{origin + t}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string DatasetStats::to_json() const {
  nlohmann::ordered_json j;
  j["n_train"] = n_train;
  j["n_valid"] = n_valid;
  j["n_test"] = n_test;
  j["n_entities"] = n_entities;
  j["n_relations"] = n_relations;
  j["n_timestamps"] = n_timestamps;
  return j.dump(2);
}

Dataset parse_dataset(const std::filesystem::path& train_path,
                      const std::filesystem::path& valid_path,
                      const std::filesystem::path& test_path) {
  std::vector<RawFile> files;
  files.push_back(read_tsv(train_path));
  files.push_back(read_tsv(valid_path));
  files.push_back(read_tsv(test_path));

  // The first token decides between calendar dates and integer timestamps.
  std::optional<TimeAxis::Kind> kind;
  std::vector<std::vector<std::int64_t>> raw_times(files.size());
  for (std::size_t f = 0; f < files.size(); ++f) {
    for (std::size_t i = 0; i < files[f].records.size(); ++i) {
      const std::string& token = files[f].records[i].timestamp;
      if (!kind) kind = looks_like_integer(token) ? TimeAxis::Kind::kInteger : TimeAxis::Kind::kDate;
      std::int64_t value = 0;
      try {
        if (*kind == TimeAxis::Kind::kInteger) {
          auto v = parse_integer(token);
          if (!v) throw ParseError("unknown date format: '" + token + "'");
          value = *v;
        } else {
          value = parse_iso_date(token);
        }
      } catch (const ParseError& e) {
        throw ParseError(files[f].path.string() + ":" + std::to_string(files[f].line_numbers[i]) +
                         ": " + e.what());
      }
      raw_times[f].push_back(value);
    }
  }

  Dataset ds;
  ds.time_axis.kind = kind.value_or(TimeAxis::Kind::kDate);
  std::int64_t min_time = std::numeric_limits<std::int64_t>::max();
  std::set<std::int64_t> distinct;
  for (const auto& times : raw_times) {
    for (std::int64_t v : times) {
      min_time = std::min(min_time, v);
      distinct.insert(v);
    }
  }
  if (distinct.empty()) min_time = 0;
  ds.time_axis.origin = min_time;
  ds.time_axis.step = 1;
  if (ds.time_axis.kind == TimeAxis::Kind::kInteger && distinct.size() > 1) {
    std::int64_t gap = std::numeric_limits<std::int64_t>::max();
    for (auto it = std::next(distinct.begin()); it != distinct.end(); ++it) {
      gap = std::min(gap, *it - *std::prev(it));
    }
    for (std::int64_t v : distinct) {
      if ((v - min_time) % gap != 0) {
        throw ParseError("integer timestamp " + std::to_string(v) +
                         " is not on the grid of the minimal gap " + std::to_string(gap));
      }
    }
    ds.time_axis.step = gap;
  }

  std::array<QuadrupleList*, 3> targets{&ds.splits.train, &ds.splits.valid, &ds.splits.test};
  TimeIndex max_index = -1;
  for (std::size_t f = 0; f < files.size(); ++f) {
    targets[f]->reserve(files[f].records.size());
    for (std::size_t i = 0; i < files[f].records.size(); ++i) {
      const RawRecord& rec = files[f].records[i];
      const auto t = static_cast<TimeIndex>((raw_times[f][i] - min_time) / ds.time_axis.step);
      max_index = std::max(max_index, t);
      targets[f]->push_back({ds.entities.intern(rec.subject), ds.relations.intern(rec.relation),
                             ds.entities.intern(rec.object), t});
    }
  }

  ds.stats.n_train = ds.splits.train.size();
  ds.stats.n_valid = ds.splits.valid.size();
  ds.stats.n_test = ds.splits.test.size();
  ds.stats.n_entities = ds.entities.size();
  ds.stats.n_relations = ds.relations.size();
  ds.stats.n_timestamps = static_cast<std::size_t>(max_index + 1);
  return ds;
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError("data directory not found: " + dir.string());
  }
  return parse_dataset(dir / "train.txt", dir / "valid.txt", dir / "test.txt");
}

DatasetStats compute_stats(const SplitSet& splits) {
  std::unordered_set<EntityId> entities;
  std::unordered_set<RelationId> relations;
  TimeIndex max_t = -1;
  for (const auto* part : {&splits.train, &splits.valid, &splits.test}) {
    for (const Quadruple& q : *part) {
      entities.insert(q.s);
      entities.insert(q.o);
      relations.insert(q.r);
      max_t = std::max(max_t, q.t);
    }
  }
  return {splits.train.size(), splits.valid.size(), splits.test.size(),
          entities.size(),     relations.size(),    static_cast<std::size_t>(max_t + 1)};
}

std::vector<CalendarDay> calendar_of(const TimeAxis& axis, std::size_t num_timestamps) {
  using namespace std::chrono;
  if (axis.kind != TimeAxis::Kind::kDate) {
    throw ValidationError("calendar requires date timestamps");
  }
  std::vector<CalendarDay> out(num_timestamps);
  for (std::size_t t = 0; t < num_timestamps; ++t) {
    const year_month_day ymd{sys_days{days{axis.origin + static_cast<std::int64_t>(t)}}};
    out[t] = {static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day())};
  }
  return out;
}

SplitSet make_unseen_split(std::span<const Quadruple> train, std::span<const CalendarDay> calendar,
                           std::uint64_t seed) {
  SplitSet out;
  QuadrupleList removed;
  for (const Quadruple& q : train) {
    if (q.t < 0 || static_cast<std::size_t>(q.t) >= calendar.size()) {
      throw ValidationError("time index " + std::to_string(q.t) + " missing from calendar");
    }
    const unsigned day = calendar[static_cast<std::size_t>(q.t)].day;
    if (day == 5 || day == 15 || day == 25) {
      removed.push_back(q);
    } else {
      out.train.push_back(q);
    }
  }
  if (removed.empty()) {
    throw ValidationError("no quadruple falls on day 5, 15 or 25; check the calendar mapping");
  }

  Rng rng(seed);
  shuffle(std::span<Quadruple>(removed), rng);
  const std::size_t half = removed.size() / 2;

  std::unordered_set<EntityId> seen;
  for (const Quadruple& q : out.train) {
    seen.insert(q.s);
    seen.insert(q.o);
  }
  for (std::size_t i = 0; i < removed.size(); ++i) {
    const Quadruple& q = removed[i];
    if (!seen.contains(q.s) || !seen.contains(q.o)) continue;
    (i < half ? out.valid : out.test).push_back(q);
  }
  return out;
}

IrregularSplit make_irregular_split(const Dataset& dataset, std::uint64_t seed) {
  return make_irregular_split(dataset, seed, [](Rng& rng) {
    return static_cast<TimeIndex>(1 + uniform_index(rng, 4));
  });
}

IrregularSplit make_irregular_split(const Dataset& dataset, std::uint64_t seed,
                                    const GapSampler& gap) {
  IrregularSplit out;
  Rng rng(seed);
  const auto horizon = static_cast<TimeIndex>(dataset.stats.n_timestamps);
  std::vector<char> keep(dataset.stats.n_timestamps, 0);
  for (TimeIndex t = 0; t < horizon; t += gap(rng)) {
    out.snapshots.push_back(t);
    keep[static_cast<std::size_t>(t)] = 1;
  }
  auto filter = [&](const QuadrupleList& in, QuadrupleList& dst) {
    for (const Quadruple& q : in) {
      if (q.t >= 0 && q.t < horizon && keep[static_cast<std::size_t>(q.t)]) dst.push_back(q);
    }
  };
  filter(dataset.splits.train, out.splits.train);
  filter(dataset.splits.valid, out.splits.valid);
  filter(dataset.splits.test, out.splits.test);
  out.stats = compute_stats(out.splits);
  out.stats.n_timestamps = out.snapshots.size();
  return out;
}

void write_split_files(const std::filesystem::path& dir, const SplitSet& splits,
                       const Dataset& source, const DatasetStats& stats) {
  std::filesystem::create_directories(dir);
  auto write_quads = [&](const std::string& name, const QuadrupleList& quads) {
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    for (const Quadruple& q : quads) {
      out << source.entities.name(q.s) << '\t' << source.relations.name(q.r) << '\t'
          << source.entities.name(q.o) << '\t' << source.time_axis.format(q.t) << '\n';
    }
  };
  auto write_vocab = [&](const std::string& name, const Vocabulary& vocab) {
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    for (std::size_t i = 0; i < vocab.size(); ++i) out << vocab.names()[i] << '\t' << i << '\n';
  };
  write_quads("train.txt", splits.train);
  write_quads("valid.txt", splits.valid);
  write_quads("test.txt", splits.test);
  write_vocab("entity2id.txt", source.entities);
  write_vocab("relation2id.txt", source.relations);
  std::ofstream(dir / "stats.json") << stats.to_json() << '\n';
}

}  // namespace tkgc
