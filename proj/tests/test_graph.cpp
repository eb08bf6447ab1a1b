#include <doctest.h>

#include <set>

#include "support.hpp"

using namespace tkgc;

TEST_CASE("reciprocal of a single fact") {
  const QuadrupleList out = add_reciprocals(QuadrupleList{{0, 1, 2, 5}}, 3);
  CHECK(out == QuadrupleList{{0, 1, 2, 5}, {2, 4, 0, 5}});
}

TEST_CASE("reciprocals of nothing") { CHECK(add_reciprocals(QuadrupleList{}, 3).empty()); }

TEST_CASE("reciprocal doubling at benchmark scale") {
  Rng rng(1);
  const QuadrupleList raw = test::random_quads(rng, 72826, 7128, 230, 365);
  const QuadrupleList aug = add_reciprocals(raw, 230);
  CHECK(aug.size() == 145652);
  std::set<RelationId> rels;
  for (const Quadruple& q : aug) rels.insert(q.r);
  CHECK(*rels.rbegin() < 460);
  CHECK(rels.size() == 460);
}

TEST_CASE("relation out of range names the position") {
  try {
    (void)add_reciprocals(QuadrupleList{{0, 1, 2, 0}, {0, 3, 2, 0}}, 3);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("reciprocal symmetry on random input") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const QuadrupleList aug = add_reciprocals(test::random_quads(rng, 50, 8, 4, 6), 4);
    const std::multiset<Quadruple> all(aug.begin(), aug.end());
    for (const Quadruple& q : aug) {
      CHECK(all.count({q.o, inverse_relation(q.r, 4), q.s, q.t}) == all.count(q));
    }
  }
}

TEST_CASE("validate_quadruples rejects bad ids") {
  const VocabSizes vocab{3, 2, 5};
  CHECK_NOTHROW(validate_quadruples(QuadrupleList{{0, 3, 2, 4}}, vocab));
  CHECK_THROWS_AS(validate_quadruples(QuadrupleList{{3, 0, 0, 0}}, vocab), ValidationError);
  CHECK_THROWS_AS(validate_quadruples(QuadrupleList{{0, 4, 0, 0}}, vocab), ValidationError);
  CHECK_THROWS_AS(validate_quadruples(QuadrupleList{{0, 0, 0, 5}}, vocab), ValidationError);
  CHECK_THROWS_AS(validate_quadruples(QuadrupleList{{0, 0, -1, 0}}, vocab), ValidationError);
}

TEST_CASE("index of a single edge") {
  const TemporalKG kg = build_index({{0, 1, 2, 5}}, {3, 1, 6});
  CHECK(kg.incoming(0).empty());
  CHECK(kg.incoming(1).empty());
  REQUIRE(kg.incoming(2).size() == 1);
  CHECK(kg.incoming(2)[0] == IncomingEdge{0, 1, 5});
}

TEST_CASE("per-node lists are time sorted") {
  const TemporalKG kg = build_index({{0, 0, 2, 3}, {1, 0, 2, 1}}, {3, 1, 4});
  const auto in = kg.incoming(2);
  REQUIRE(in.size() == 2);
  CHECK(in[0].t == 1);
  CHECK(in[1].t == 3);
}

TEST_CASE("index properties on random graphs") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const VocabSizes vocab{10, 3, 12};
    const QuadrupleList aug = add_reciprocals(test::random_quads(rng, 10 + trial * 5, 10, 3, 12), 3);
    const TemporalKG kg = build_index(aug, vocab);
    std::size_t total = 0;
    for (EntityId n = 0; n < 10; ++n) {
      const auto in = kg.incoming(n);
      total += in.size();
      for (std::size_t i = 1; i < in.size(); ++i) CHECK(in[i - 1].t <= in[i].t);
    }
    // One entry per quadruple.
    CHECK(total == aug.size());
    // Rebuilding yields the same index.
    const TemporalKG again = build_index(aug, vocab);
    for (EntityId n = 0; n < 10; ++n) {
      CHECK(std::equal(kg.incoming(n).begin(), kg.incoming(n).end(), again.incoming(n).begin(),
                       again.incoming(n).end()));
    }
    // Round trip and brute-force equality for every node, time and range.
    for (const Quadruple& q : aug) {
      const auto all = kg.temporal_neighbors(q.o, static_cast<TimeIndex>(uniform_index(rng, 12)));
      CHECK(std::find(all.begin(), all.end(), IncomingEdge{q.s, q.r, q.t}) != all.end());
    }
    for (EntityId s = 0; s < 10; ++s) {
      for (TimeIndex t = 0; t < 12; t += 3) {
        for (std::optional<TimeIndex> range : {kUnbounded, std::optional<TimeIndex>(0),
                                               std::optional<TimeIndex>(2)}) {
          const auto got = kg.temporal_neighbors(s, t, range);
          CHECK(got == test::brute_force_neighbors(aug, s, t, range));
          for (const IncomingEdge& e : got) {
            const Quadruple fact{e.source, e.relation, s, e.t};
            CHECK(std::find(aug.begin(), aug.end(), fact) != aug.end());
          }
        }
      }
    }
  }
}

TEST_CASE("five-neighbor example with and without a range") {
  // Node 0 at t_q = 10 with neighbors at t_q-1, t_q+1, t_q-3, the first and the last step.
  const QuadrupleList quads = {{1, 0, 0, 9}, {2, 0, 0, 11}, {3, 0, 0, 7}, {4, 0, 0, 0}, {5, 0, 0, 19}};
  const TemporalKG kg = build_index(quads, {6, 1, 20});
  CHECK(kg.temporal_neighbors(0, 10).size() == 5);
  const auto near = kg.temporal_neighbors(0, 10, 1);
  REQUIRE(near.size() == 2);
  CHECK(near[0] == IncomingEdge{1, 0, 9});
  CHECK(near[1] == IncomingEdge{2, 0, 11});
}

TEST_CASE("same-time neighbors can be excluded") {
  const TemporalKG kg = build_index({{1, 0, 0, 4}, {2, 0, 0, 5}}, {3, 1, 6});
  CHECK(kg.temporal_neighbors(0, 4).size() == 2);
  const auto without = kg.temporal_neighbors(0, 4, kUnbounded, false);
  REQUIRE(without.size() == 1);
  CHECK(without[0].source == 2);
}

TEST_CASE("empty neighborhood is a valid result") {
  const TemporalKG kg = build_index({{1, 0, 0, 4}}, {3, 1, 6});
  CHECK(kg.temporal_neighbors(2, 3).empty());
  CHECK(kg.temporal_neighbors(0, 0, 1).empty());
}
