#include <doctest.h>

#include <json.hpp>

#include "support.hpp"
#include "tkgc/eval.hpp"

using namespace tkgc;

namespace {

RankResult rank_of(double r) {
  RankResult out;
  out.filtered_rank = r;
  return out;
}

std::vector<double> random_scores(Rng& rng, std::size_t n, std::size_t levels) {
  // Few distinct levels so ties are common.
  std::vector<double> s(n);
  for (double& v : s) v = static_cast<double>(uniform_index(rng, levels)) * 0.25 - 1.0;
  return s;
}

}  // namespace

TEST_CASE("unique maximum ranks first") {
  const std::vector<double> s = {0.1, 0.9, 0.3};
  CHECK(filtered_rank(s, 1, {}, TieMode::kPessimistic).filtered_rank == 1.0);
  CHECK(filtered_rank(s, 1, {}, TieMode::kMean).filtered_rank == 1.0);
  CHECK(filtered_rank(s, 0, {}, TieMode::kPessimistic).filtered_rank == 3.0);
}

TEST_CASE("four-way tie") {
  const std::vector<double> s = {0.5, 0.5, 0.5, 0.5};
  CHECK(filtered_rank(s, 2, {}, TieMode::kPessimistic).filtered_rank == 4.0);
  CHECK(filtered_rank(s, 2, {}, TieMode::kMean).filtered_rank == 2.5);
}

TEST_CASE("filtered candidates are removed, the ground truth never") {
  const std::vector<double> s = {0.9, 0.8, 0.1, 0.7};
  const std::vector<EntityId> f = {0, 2, 3, 3};
  const RankResult r = filtered_rank(s, 2, f, TieMode::kPessimistic);
  CHECK(r.filtered_rank == 2.0);
  CHECK(r.num_filtered == 2);
}

TEST_CASE("ranks against a sort-and-scan oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 40);
    const auto s = random_scores(rng, n, 1 + uniform_index(rng, 6));
    const auto o = static_cast<EntityId>(uniform_index(rng, n));
    std::vector<EntityId> filtered;
    for (std::size_t e = 0; e < n; ++e) {
      if (static_cast<EntityId>(e) != o && uniform_index(rng, 4) == 0) filtered.push_back(static_cast<EntityId>(e));
    }
    for (TieMode m : {TieMode::kPessimistic, TieMode::kMean}) {
      CHECK(filtered_rank(s, o, filtered, m).filtered_rank == test::sort_scan_rank(s, o, filtered, m));
    }
  }
}

TEST_CASE("rank properties") {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 30);
    auto s = random_scores(rng, n, 5);
    const auto o = static_cast<EntityId>(uniform_index(rng, n));
    std::vector<EntityId> filtered;
    const double unfiltered = filtered_rank(s, o, {}, TieMode::kPessimistic).filtered_rank;
    CHECK(unfiltered >= 1.0);
    CHECK(unfiltered <= static_cast<double>(n));
    // Filtering more never makes the rank worse.
    double prev = unfiltered;
    for (std::size_t e = 0; e < n; ++e) {
      filtered.push_back(static_cast<EntityId>(e));
      const double r = filtered_rank(s, o, filtered, TieMode::kPessimistic).filtered_rank;
      CHECK(r <= prev);
      prev = r;
    }
    CHECK(prev == 1.0);
    // Mean never exceeds pessimistic.
    CHECK(filtered_rank(s, o, {}, TieMode::kMean).filtered_rank <= unfiltered);
    // Strictly increasing transforms keep the rank.
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = 3.0 * s[i] + 7.0;
    CHECK(filtered_rank(t, o, {}, TieMode::kPessimistic).filtered_rank == unfiltered);
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = std::exp(s[i]);
    CHECK(filtered_rank(t, o, {}, TieMode::kMean).filtered_rank ==
          filtered_rank(s, o, {}, TieMode::kMean).filtered_rank);
  }
}

TEST_CASE("summary of ranks 1 and 4") {
  const MetricsReport r = summarize({rank_of(1), rank_of(4)}, TieMode::kPessimistic, FilterMode::kTimeAware);
  CHECK(r.mrr == 0.625);
  CHECK(r.hits1 == 0.5);
  CHECK(r.hits3 == 0.5);
  CHECK(r.hits10 == 1.0);
  CHECK(r.num_queries == 2);
}

TEST_CASE("summary of nothing is zero") {
  const MetricsReport r = summarize({}, TieMode::kMean, FilterMode::kStatic);
  CHECK(r.mrr == 0.0);
  CHECK(r.num_queries == 0);
}

TEST_CASE("summary properties") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RankResult> ranks;
    const std::size_t n = 1 + uniform_index(rng, 50);
    double rr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = 1.0 + static_cast<double>(uniform_index(rng, 30)) / (uniform_index(rng, 2) + 1.0);
      ranks.push_back(rank_of(r));
      rr += 1.0 / r;
    }
    const MetricsReport m = summarize(ranks, TieMode::kMean, FilterMode::kTimeAware);
    CHECK(std::abs(m.mrr - rr / static_cast<double>(n)) < 1e-12);
    CHECK(m.hits1 <= m.hits3);
    CHECK(m.hits3 <= m.hits10);
    CHECK(m.hits1 <= m.mrr + 1e-12);
    CHECK(m.mrr <= 1.0);
  }
}

TEST_CASE("two queries per fact") {
  const QuadrupleList q = expand_queries(QuadrupleList{{0, 1, 2, 5}, {3, 0, 4, 6}}, 2);
  CHECK(q == QuadrupleList{{0, 1, 2, 5}, {2, 3, 0, 5}, {3, 0, 4, 6}, {4, 2, 3, 6}});
}

TEST_CASE("filter index modes") {
  const FilterIndex f(QuadrupleList{{0, 0, 1, 3}, {0, 0, 2, 3}, {0, 0, 4, 8}, {0, 0, 1, 3}, {1, 0, 5, 3}});
  CHECK(f.filter_set({0, 0, 1, 3}, FilterMode::kTimeAware) == std::vector<EntityId>{2});
  CHECK(f.filter_set({0, 0, 1, 3}, FilterMode::kStatic) == std::vector<EntityId>{2, 4});
  CHECK(f.filter_set({0, 0, 9, 8}, FilterMode::kTimeAware) == std::vector<EntityId>{4});
  CHECK(f.filter_set({0, 1, 9, 3}, FilterMode::kStatic).empty());
  // Time-aware sets are always subsets of the static ones.
  Rng rng(4);
  const QuadrupleList known = test::random_quads(rng, 400, 10, 3, 8);
  const FilterIndex g(known);
  for (const Quadruple& q : test::random_quads(rng, 200, 10, 3, 8)) {
    const auto timed = g.filter_set(q, FilterMode::kTimeAware);
    const auto stat = g.filter_set(q, FilterMode::kStatic);
    CHECK(std::includes(stat.begin(), stat.end(), timed.begin(), timed.end()));
    CHECK(std::find(stat.begin(), stat.end(), q.o) == stat.end());
  }
}

TEST_CASE("evaluate against a per-query recomputation") {
  Rng rng(5);
  const VocabSizes vocab{12, 3, 20};
  const QuadrupleList train_raw = test::random_quads(rng, 60, 12, 3, 20);
  const QuadrupleList test_raw = test::random_quads(rng, 15, 12, 3, 20);
  const QuadrupleList aug = add_reciprocals(train_raw, 3);
  const TemporalKG kg = build_index(aug, vocab);
  FilterIndex filter(aug);
  filter.add(add_reciprocals(test_raw, 3));
  for (FilterMode fm : {FilterMode::kTimeAware, FilterMode::kStatic}) {
    for (TieMode tm : {TieMode::kPessimistic, TieMode::kMean}) {
      RunConfig cfg = test::tiny_config(6);
      cfg.filter_mode = fm;
      cfg.tie_mode = tm;
      cfg.seed = 21;
      ModelParams p = init_params(cfg, vocab, 2);
      test::randomize(p, rng, 0.5);
      const MetricsReport report = evaluate(kg, test_raw, filter, p, cfg);
      REQUIRE(report.num_queries == 2 * test_raw.size());
      const QuadrupleList queries = expand_queries(test_raw, 3);
      const Encoder enc(kg, p, cfg);
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const Quadruple& q = queries[i];
        Rng sample_rng(evaluation_seed(cfg.seed, i));
        const TngSample sample = sample_tng(kg, q.s, q.t, cfg.sampler_options(), sample_rng);
        const Vector h = test::reference_aggregate(p, sample, cfg);
        std::vector<double> scores(vocab.num_entities);
        for (std::size_t o = 0; o < scores.size(); ++o) {
          scores[o] = distmult(h, p.relation.row(static_cast<std::size_t>(q.r)),
                               test::reference_rep(p, static_cast<EntityId>(o), 0.0, cfg.activation));
        }
        CHECK(report.ranks[i].query == q);
        CHECK(report.ranks[i].filtered_rank == test::sort_scan_rank(scores, q.o, filter.filter_set(q, fm), tm));
      }
    }
  }
}

TEST_CASE("evaluation is identical across thread counts") {
  const test::CopyPattern cp = test::copy_pattern(6);
  const QuadrupleList aug = add_reciprocals(cp.splits.train, 2);
  const TemporalKG kg = build_index(aug, cp.vocab);
  const FilterIndex filter(aug);
  RunConfig cfg = test::tiny_config(8);
  const ModelParams p = init_params(cfg, cp.vocab, 3);
  const MetricsReport one = evaluate(kg, cp.splits.valid, filter, p, cfg);
  cfg.eval_threads = 4;
  const MetricsReport four = evaluate(kg, cp.splits.valid, filter, p, cfg);
  CHECK(one.mrr == four.mrr);
  for (std::size_t i = 0; i < one.ranks.size(); ++i) CHECK(one.ranks[i].filtered_rank == four.ranks[i].filtered_rank);
}

TEST_CASE("report serialisation") {
  MetricsReport r = summarize({rank_of(1), rank_of(2)}, TieMode::kMean, FilterMode::kStatic);
  r.variant = "absolute-time";
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["mrr"] == 0.75);
  CHECK(j["tie_mode"] == "mean");
  CHECK(j["filter_mode"] == "static");
  CHECK(MetricsReport::csv_header() == "variant,mrr,hits1,hits3,hits10,num_queries,tie_mode,filter_mode");
  CHECK(r.csv_row() == "absolute-time,0.750000,0.500000,1.000000,1.000000,2,mean,static");
  test::ScratchDir dir("dump");
  r.ranks[0].query = {1, 2, 3, 4};
  write_rank_dump(dir.path() / "ranks.tsv", r);
  CHECK(test::read_file(dir.path() / "ranks.tsv") == "s\tr\to\tt\trank\n1\t2\t3\t4\t1\n0\t0\t0\t0\t2\n");
}
