#include "tkgc/graph.hpp"

#include <algorithm>
#include <string>

namespace tkgc {

QuadrupleList add_reciprocals(std::span<const Quadruple> raw, std::size_t num_base_relations) {
  QuadrupleList out;
  out.reserve(2 * raw.size());
  const auto base = static_cast<RelationId>(num_base_relations);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Quadruple& q = raw[i];
    if (q.r < 0 || q.r >= base) {
      throw ValidationError("quadruple " + std::to_string(i + 1) + ": relation id " +
                            std::to_string(q.r) + " outside [0, " + std::to_string(base) + ")");
    }
    out.push_back(q);
  }
  for (const Quadruple& q : raw) out.push_back({q.o, q.r + base, q.s, q.t});
  return out;
}

void validate_quadruples(std::span<const Quadruple> quads, const VocabSizes& vocab) {
  const auto ne = static_cast<EntityId>(vocab.num_entities);
  const auto nr = static_cast<RelationId>(vocab.num_relations());
  const auto nt = static_cast<TimeIndex>(vocab.num_timestamps);
  for (std::size_t i = 0; i < quads.size(); ++i) {
    const Quadruple& q = quads[i];
    if (q.s < 0 || q.s >= ne || q.o < 0 || q.o >= ne || q.r < 0 || q.r >= nr || q.t < 0 ||
        q.t >= nt) {
      throw ValidationError("quadruple " + std::to_string(i + 1) + " (" + std::to_string(q.s) +
                            ", " + std::to_string(q.r) + ", " + std::to_string(q.o) + ", " +
                            std::to_string(q.t) + ") has an id outside the vocabulary");
    }
  }
}

TemporalKG::TemporalKG(QuadrupleList quads, VocabSizes vocab, Split split)
    : quads_(std::move(quads)), vocab_(vocab), split_(split) {
  validate_quadruples(quads_, vocab_);
  offsets_.assign(vocab_.num_entities + 1, 0);
  for (const Quadruple& q : quads_) ++offsets_[static_cast<std::size_t>(q.o) + 1];
  for (std::size_t n = 0; n < vocab_.num_entities; ++n) offsets_[n + 1] += offsets_[n];

  edges_.resize(quads_.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const Quadruple& q : quads_) {
    edges_[cursor[static_cast<std::size_t>(q.o)]++] = {q.s, q.r, q.t};
  }
  for (std::size_t n = 0; n < vocab_.num_entities; ++n) {
    auto first = edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[n]);
    auto last = edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[n + 1]);
    std::sort(first, last, [](const IncomingEdge& a, const IncomingEdge& b) {
      return std::tie(a.t, a.source, a.relation) < std::tie(b.t, b.source, b.relation);
    });
  }
}

std::span<const IncomingEdge> TemporalKG::incoming(EntityId node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= vocab_.num_entities) return {};
  const auto n = static_cast<std::size_t>(node);
  return std::span<const IncomingEdge>(edges_).subspan(offsets_[n], offsets_[n + 1] - offsets_[n]);
}

std::vector<IncomingEdge> TemporalKG::temporal_neighbors(EntityId node, TimeIndex t_query,
                                                         std::optional<TimeIndex> search_range,
                                                         bool include_same_time) const {
  auto edges = incoming(node);
  auto first = edges.begin();
  auto last = edges.end();
  if (search_range) {
    const TimeIndex lo = t_query - *search_range;
    const TimeIndex hi = t_query + *search_range;
    first = std::lower_bound(edges.begin(), edges.end(), lo,
                             [](const IncomingEdge& e, TimeIndex v) { return e.t < v; });
    last = std::upper_bound(first, edges.end(), hi,
                            [](TimeIndex v, const IncomingEdge& e) { return v < e.t; });
  }
  std::vector<IncomingEdge> out;
  out.reserve(static_cast<std::size_t>(last - first));
  for (auto it = first; it != last; ++it) {
    if (!include_same_time && it->t == t_query) continue;
    out.push_back(*it);
  }
  return out;
}

TemporalKG build_index(QuadrupleList quads, const VocabSizes& vocab, Split split) {
  return TemporalKG(std::move(quads), vocab, split);
}

}  // namespace tkgc
