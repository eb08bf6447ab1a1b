#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tkgc/config.hpp"
#include "tkgc/graph.hpp"
#include "tkgc/model.hpp"

namespace tkgc {

struct RankResult {
  Quadruple query;  // (s_q, r_q, o_q, t_q), o_q the ground truth
  double filtered_rank = 1.0;
  std::size_t num_filtered = 0;
};

struct MetricsReport {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t num_queries = 0;
  TieMode tie_mode = TieMode::kPessimistic;
  FilterMode filter_mode = FilterMode::kTimeAware;
  std::string variant = "baseline";
  std::vector<RankResult> ranks;

  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] static std::string csv_header();
  [[nodiscard]] std::string csv_row() const;
};

// Rank of the ground truth after removing `filter_set`. Pessimistic ties put
// every tied candidate above the ground truth (1 + greater + ties); mean ties
// take the average position (1 + greater + ties / 2).
RankResult filtered_rank(std::span<const double> scores, EntityId o_q,
                         std::span<const EntityId> filter_set, TieMode tie_mode);

// Known objects for (s, r, t) (time-aware) or (s, r) (static) over a set of
// augmented quadruples.
class FilterIndex {
 public:
  FilterIndex() = default;
  explicit FilterIndex(std::span<const Quadruple> known);
  void add(std::span<const Quadruple> known);

  // Every known object o' != o_q for the query, sorted.
  [[nodiscard]] std::vector<EntityId> filter_set(const Quadruple& query, FilterMode mode) const;

 private:
  std::unordered_map<std::uint64_t, std::vector<EntityId>> timed_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> untimed_;
};

// Object query and inverse-relation object query for every raw fact.
QuadrupleList expand_queries(std::span<const Quadruple> raw_facts, std::size_t num_base_relations);

// Summary statistics over a set of ranks.
MetricsReport summarize(std::vector<RankResult> ranks, TieMode tie_mode, FilterMode filter_mode);

// Seed of the TNG sample for expanded query `index`.
[[nodiscard]] std::uint64_t evaluation_seed(std::uint64_t base, std::size_t index);

// Encodes every expanded query with the TNG of the training graph, scores all
// candidates, and ranks the ground truth in the filtered setting. Sampling is
// seeded per query from config.seed, so the report is deterministic.
MetricsReport evaluate(const TemporalKG& train_kg, std::span<const Quadruple> raw_facts,
                       const FilterIndex& filter, const ModelParams& params,
                       const RunConfig& config);

// TSV dump s, r, o, t, rank for error analysis.
void write_rank_dump(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace tkgc
