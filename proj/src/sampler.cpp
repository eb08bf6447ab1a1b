#include "tkgc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <tuple>

namespace tkgc {
namespace {

bool by_time_entity_relation(const TemporalNeighbor& a, const TemporalNeighbor& b) {
  return std::tie(a.t, a.e, a.r) < std::tie(b.t, b.e, b.r);
}

}  // namespace

std::vector<double> neighbor_probabilities(std::span<const TemporalNeighbor> neighbors,
                                           TimeIndex t_query) {
  if (neighbors.empty()) throw ValidationError("neighbor_probabilities: empty neighbor list");
  TimeIndex closest = std::abs(t_query - neighbors.front().t);
  for (const auto& n : neighbors) closest = std::min(closest, std::abs(t_query - n.t));
  std::vector<double> p(neighbors.size());
  double total = 0.0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    p[i] = std::exp(-static_cast<double>(std::abs(t_query - neighbors[i].t) - closest));
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<TemporalNeighbor> candidate_neighbors(const TemporalKG& kg, EntityId center,
                                                  TimeIndex t_query, const SamplerOptions& opts,
                                                  const std::optional<IncomingEdge>& exclude) {
  const auto edges =
      kg.temporal_neighbors(center, t_query, opts.search_range, opts.include_same_time);
  std::vector<TemporalNeighbor> out;
  out.reserve(edges.size());
  for (const IncomingEdge& edge : edges) {
    if (exclude && edge == *exclude) continue;
    out.push_back({edge.source, edge.relation, edge.t, edge.t - t_query});
  }
  // Index lists are sorted by (t, source, relation), so duplicates are adjacent.
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<TemporalNeighbor> draw_without_replacement(std::span<const TemporalNeighbor> candidates,
                                                       std::size_t cap, SamplerVariant variant,
                                                       Rng& rng) {
  std::vector<TemporalNeighbor> out;
  if (variant == SamplerVariant::kAll || candidates.size() <= cap) {
    out.assign(candidates.begin(), candidates.end());
    std::sort(out.begin(), out.end(), by_time_entity_relation);
    return out;
  }
  // Item i wins the race with key E_i / w_i, E_i ~ Exp(1). With w_i = exp(-|dt_i|)
  // the log key is log(E_i) + |dt_i|; the `cap` smallest keys form the sample.
  std::vector<std::pair<double, std::size_t>> keys(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double exp1 = -std::log(uniform_open01(rng));
    double key = std::log(exp1);
    if (variant == SamplerVariant::kWeighted) key += std::abs(candidates[i].delta);
    keys[i] = {key, i};
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(cap), keys.end());
  out.reserve(cap);
  for (std::size_t k = 0; k < cap; ++k) out.push_back(candidates[keys[k].second]);
  std::sort(out.begin(), out.end(), by_time_entity_relation);
  return out;
}

TngSample sample_tng(const TemporalKG& kg, EntityId center, TimeIndex t_query,
                     const SamplerOptions& opts, Rng& rng,
                     const std::optional<IncomingEdge>& exclude) {
  TngSample sample;
  sample.center = center;
  sample.t_query = t_query;
  const auto candidates = candidate_neighbors(kg, center, t_query, opts, exclude);
  if (candidates.empty()) return sample;
  if (opts.variant == SamplerVariant::kUniform) {
    sample.weights.assign(candidates.size(), 1.0 / static_cast<double>(candidates.size()));
  } else {
    sample.weights = neighbor_probabilities(candidates, t_query);
  }
  sample.neighbors = draw_without_replacement(candidates, opts.cap, opts.variant, rng);
  return sample;
}

}  // namespace tkgc
