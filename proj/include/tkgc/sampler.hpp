#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tkgc/graph.hpp"
#include "tkgc/rng.hpp"

namespace tkgc {

enum class SamplerVariant {
  kWeighted,  // exp(-|t - t_q|) weights
  kUniform,   // random-sample ablation
  kAll,       // whole-neighborhood ablation, cap ignored
};

struct TemporalNeighbor {
  EntityId e = 0;
  RelationId r = 0;
  TimeIndex t = 0;
  TimeIndex delta = 0;  // t - t_q

  friend bool operator==(const TemporalNeighbor&, const TemporalNeighbor&) = default;
};

struct TngSample {
  EntityId center = 0;
  TimeIndex t_query = 0;
  // Sorted by (t, e, r); this is also the aggregation summation order.
  std::vector<TemporalNeighbor> neighbors;
  // Sampling probabilities over the full candidate set (not the sample).
  std::vector<double> weights;
};

struct SamplerOptions {
  std::size_t cap = 100;
  std::optional<TimeIndex> search_range = kUnbounded;
  SamplerVariant variant = SamplerVariant::kWeighted;
  bool include_same_time = true;
};

// p_i = exp(-|t_q - t_i|) / sum_j exp(-|t_q - t_j|), shifted by the smallest
// |dt| before exponentiation. Throws ValidationError on an empty list.
std::vector<double> neighbor_probabilities(std::span<const TemporalNeighbor> neighbors,
                                           TimeIndex t_query);

// Deduplicated candidate set of (s_q, t_q), ordered by (t, e, r). An edge equal
// to `exclude` is left out (used to hide a training fact's own reciprocal edge).
std::vector<TemporalNeighbor> candidate_neighbors(const TemporalKG& kg, EntityId center,
                                                  TimeIndex t_query, const SamplerOptions& opts,
                                                  const std::optional<IncomingEdge>& exclude = std::nullopt);

// Draws min(cap, |N|) distinct neighbors. Weighted and uniform variants are
// equivalent to sequential draws without replacement that renormalise after
// each pick; they are realised with exponential-race keys so that weights far
// below double range (|dt| in the thousands) never underflow.
TngSample sample_tng(const TemporalKG& kg, EntityId center, TimeIndex t_query,
                     const SamplerOptions& opts, Rng& rng,
                     const std::optional<IncomingEdge>& exclude = std::nullopt);

// Sampling step on an explicit candidate list (already deduplicated).
std::vector<TemporalNeighbor> draw_without_replacement(std::span<const TemporalNeighbor> candidates,
                                                       std::size_t cap, SamplerVariant variant,
                                                       Rng& rng);

}  // namespace tkgc
