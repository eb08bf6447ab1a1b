#include "tkgc/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "tkgc/encoder.hpp"
#include "tkgc/kernels.hpp"
#include "tkgc/rng.hpp"
#include "tkgc/scoring.hpp"

namespace tkgc {
namespace {

// Packs (s, r, t) into disjoint bit fields: s < 2^24, r < 2^20, t < 2^20.
std::uint64_t timed_key(EntityId s, RelationId r, TimeIndex t) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s)) << 40) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r)) << 20) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(t));
}

std::uint64_t untimed_key(EntityId s, RelationId r) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s)) << 32) |
         static_cast<std::uint32_t>(r);
}

constexpr std::uint64_t kEvalStream = 0xe7a1;

}  // namespace

std::uint64_t evaluation_seed(std::uint64_t base, std::size_t index) {
  return derive_seed(base, {kEvalStream, index});
}

RankResult filtered_rank(std::span<const double> scores, EntityId o_q,
                         std::span<const EntityId> filter_set, TieMode tie_mode) {
  std::vector<unsigned char> skip(scores.size(), 0);
  std::size_t removed = 0;
  for (EntityId e : filter_set) {
    if (e == o_q || e < 0 || static_cast<std::size_t>(e) >= scores.size()) continue;
    if (!skip[static_cast<std::size_t>(e)]) ++removed;
    skip[static_cast<std::size_t>(e)] = 1;
  }
  std::size_t greater = 0;
  std::size_t ties = 0;
  kernels::serial::rank_counts(scores, static_cast<std::size_t>(o_q), skip, greater, ties);
  RankResult out;
  out.query.o = o_q;
  out.num_filtered = removed;
  out.filtered_rank = tie_mode == TieMode::kPessimistic
                          ? 1.0 + static_cast<double>(greater + ties)
                          : 1.0 + static_cast<double>(greater) + 0.5 * static_cast<double>(ties);
  return out;
}

FilterIndex::FilterIndex(std::span<const Quadruple> known) { add(known); }

void FilterIndex::add(std::span<const Quadruple> known) {
  for (const Quadruple& q : known) {
    timed_[timed_key(q.s, q.r, q.t)].push_back(q.o);
    untimed_[untimed_key(q.s, q.r)].push_back(q.o);
  }
  for (auto* table : {&timed_, &untimed_}) {
    for (auto& [key, objects] : *table) {
      std::sort(objects.begin(), objects.end());
      objects.erase(std::unique(objects.begin(), objects.end()), objects.end());
    }
  }
}

std::vector<EntityId> FilterIndex::filter_set(const Quadruple& query, FilterMode mode) const {
  const auto& table = mode == FilterMode::kTimeAware ? timed_ : untimed_;
  const auto key = mode == FilterMode::kTimeAware ? timed_key(query.s, query.r, query.t)
                                                  : untimed_key(query.s, query.r);
  std::vector<EntityId> out;
  if (auto it = table.find(key); it != table.end()) {
    for (EntityId e : it->second) {
      if (e != query.o) out.push_back(e);
    }
  }
  return out;
}

QuadrupleList expand_queries(std::span<const Quadruple> raw_facts, std::size_t num_base_relations) {
  QuadrupleList out;
  out.reserve(2 * raw_facts.size());
  for (const Quadruple& q : raw_facts) {
    out.push_back(q);
    out.push_back({q.o, inverse_relation(q.r, num_base_relations), q.s, q.t});
  }
  return out;
}

MetricsReport summarize(std::vector<RankResult> ranks, TieMode tie_mode, FilterMode filter_mode) {
  MetricsReport report;
  report.tie_mode = tie_mode;
  report.filter_mode = filter_mode;
  report.num_queries = ranks.size();
  if (!ranks.empty()) {
    double rr = 0.0;
    std::size_t h1 = 0, h3 = 0, h10 = 0;
    for (const RankResult& r : ranks) {
      rr += 1.0 / r.filtered_rank;
      h1 += r.filtered_rank <= 1.0;
      h3 += r.filtered_rank <= 3.0;
      h10 += r.filtered_rank <= 10.0;
    }
    const auto n = static_cast<double>(ranks.size());
    report.mrr = rr / n;
    report.hits1 = static_cast<double>(h1) / n;
    report.hits3 = static_cast<double>(h3) / n;
    report.hits10 = static_cast<double>(h10) / n;
  }
  report.ranks = std::move(ranks);
  return report;
}

MetricsReport evaluate(const TemporalKG& train_kg, std::span<const Quadruple> raw_facts,
                       const FilterIndex& filter, const ModelParams& params,
                       const RunConfig& config) {
  const QuadrupleList queries = expand_queries(raw_facts, train_kg.vocab().num_base_relations);
  const int threads = config.eval_threads > 0 ? config.eval_threads : kernels::max_threads();
  kernels::ThreadScope scope(threads);
  const Encoder encoder(train_kg, params, config);
  CandidateTable candidates(params, config.activation, threads);

  // Queries sharing a candidate-table argument are scored together.
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    groups[encoder.self_time_arg(queries[i].t)].push_back(i);
  }

  std::vector<RankResult> ranks(queries.size());
  const std::size_t num_entities = params.entity.rows();
  for (const auto& [arg, members] : groups) {
    if (candidates.time_arg() != arg) candidates.set_time_arg(arg);
    const auto count = static_cast<std::int64_t>(members.size());
#pragma omp parallel if (threads > 1)
    {
      std::vector<double> scores(num_entities);
      std::vector<unsigned char> skip(num_entities, 0);
#pragma omp for schedule(dynamic, 8)
      for (std::int64_t m = 0; m < count; ++m) {
        const std::size_t qi = members[static_cast<std::size_t>(m)];
        const Quadruple& q = queries[qi];
        const NodeTape tape =
            encoder.encode_query(q.s, q.t, evaluation_seed(config.seed, qi));
        const Vector qv = query_vector(config.score_fn, tape.output,
                                       params.relation.row(static_cast<std::size_t>(q.r)));
        kernels::serial::matvec(candidates.reps(), qv, scores);
        const auto filtered = filter.filter_set(q, config.filter_mode);
        for (EntityId e : filtered) skip[static_cast<std::size_t>(e)] = 1;
        std::size_t greater = 0, ties = 0;
        kernels::serial::rank_counts(scores, static_cast<std::size_t>(q.o), skip, greater, ties);
        for (EntityId e : filtered) skip[static_cast<std::size_t>(e)] = 0;
        RankResult& r = ranks[qi];
        r.query = q;
        r.num_filtered = filtered.size();
        r.filtered_rank = config.tie_mode == TieMode::kPessimistic
                              ? 1.0 + static_cast<double>(greater + ties)
                              : 1.0 + static_cast<double>(greater) + 0.5 * static_cast<double>(ties);
      }
    }
  }
  return summarize(std::move(ranks), config.tie_mode, config.filter_mode);
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["variant"] = variant;
  j["mrr"] = mrr;
  j["hits1"] = hits1;
  j["hits3"] = hits3;
  j["hits10"] = hits10;
  j["num_queries"] = num_queries;
  j["tie_mode"] = to_string(tie_mode);
  j["filter_mode"] = to_string(filter_mode);
  return j.dump(2);
}

std::string MetricsReport::csv_header() {
  return "variant,mrr,hits1,hits3,hits10,num_queries,tie_mode,filter_mode";
}

std::string MetricsReport::csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%zu,%s,%s", variant.c_str(), mrr, hits1,
                hits3, hits10, num_queries, to_string(tie_mode).c_str(),
                to_string(filter_mode).c_str());
  return buf;
}

void write_rank_dump(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "s\tr\to\tt\trank\n";
  for (const RankResult& r : report.ranks) {
    out << r.query.s << '\t' << r.query.r << '\t' << r.query.o << '\t' << r.query.t << '\t'
        << r.filtered_rank << '\n';
  }
}

}  // namespace tkgc
