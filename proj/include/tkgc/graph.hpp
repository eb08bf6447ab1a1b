#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tkgc/types.hpp"

namespace tkgc {

enum class Split { kTrain, kValid, kTest };

// An incoming edge (source, relation, time) into some indexed node.
struct IncomingEdge {
  EntityId source = 0;
  RelationId relation = 0;
  TimeIndex t = 0;

  friend auto operator<=>(const IncomingEdge&, const IncomingEdge&) = default;
};

struct VocabSizes {
  std::size_t num_entities = 0;
  std::size_t num_base_relations = 0;
  std::size_t num_timestamps = 0;

  // Relation ids after reciprocal augmentation.
  [[nodiscard]] std::size_t num_relations() const { return 2 * num_base_relations; }
  friend bool operator==(const VocabSizes&, const VocabSizes&) = default;
};

// No search-range limit: the whole timeline is eligible.
inline constexpr std::optional<TimeIndex> kUnbounded = std::nullopt;

// Appends, for every (s, r, o, t), the reciprocal fact (o, r + num_base_relations, s, t).
// Throws ValidationError naming the offending position when r is out of range.
QuadrupleList add_reciprocals(std::span<const Quadruple> raw, std::size_t num_base_relations);

// Relation id of the inverse direction in the augmented relation space.
[[nodiscard]] inline RelationId inverse_relation(RelationId r, std::size_t num_base_relations) {
  const auto base = static_cast<RelationId>(num_base_relations);
  return r < base ? r + base : r - base;
}

// Checks every id against the vocabulary; relation ids are checked against the
// augmented relation space.
void validate_quadruples(std::span<const Quadruple> quads, const VocabSizes& vocab);

// Immutable quadruple store with a per-object incoming-edge index. Fact
// (e, r, s, t) is recorded under key s as (e, r, t); each key's list is sorted
// ascending by (t, source, relation).
class TemporalKG {
 public:
  TemporalKG() = default;
  TemporalKG(QuadrupleList quads, VocabSizes vocab, Split split = Split::kTrain);

  [[nodiscard]] std::span<const Quadruple> quadruples() const { return quads_; }
  [[nodiscard]] const VocabSizes& vocab() const { return vocab_; }
  [[nodiscard]] Split split() const { return split_; }

  [[nodiscard]] std::span<const IncomingEdge> incoming(EntityId node) const;

  // Every incoming edge of `node` with |t - t_query| <= search_range (all when
  // unbounded). Edges at t == t_query are kept unless include_same_time is false.
  [[nodiscard]] std::vector<IncomingEdge> temporal_neighbors(
      EntityId node, TimeIndex t_query, std::optional<TimeIndex> search_range = kUnbounded,
      bool include_same_time = true) const;

 private:
  QuadrupleList quads_;
  VocabSizes vocab_;
  Split split_ = Split::kTrain;
  // CSR layout: edges_[offsets_[n] .. offsets_[n+1]) are node n's incoming edges.
  std::vector<std::size_t> offsets_;
  std::vector<IncomingEdge> edges_;
};

// Builds the incoming-edge index over already validated quadruples.
TemporalKG build_index(QuadrupleList quads, const VocabSizes& vocab, Split split = Split::kTrain);

}  // namespace tkgc
