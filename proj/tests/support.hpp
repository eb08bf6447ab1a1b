#pragma once

// Shared fixtures for the test binaries: random instances, the copy-pattern
// dataset, brute-force oracles and scratch directories.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tkgc/config.hpp"
#include "tkgc/encoder.hpp"
#include "tkgc/graph.hpp"
#include "tkgc/ingest.hpp"
#include "tkgc/model.hpp"
#include "tkgc/rng.hpp"
#include "tkgc/scoring.hpp"

namespace tkgc::test {

namespace fs = std::filesystem;

inline QuadrupleList random_quads(Rng& rng, std::size_t n, std::size_t entities,
                                  std::size_t relations, std::size_t timestamps) {
  QuadrupleList out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({static_cast<EntityId>(uniform_index(rng, entities)),
                   static_cast<RelationId>(uniform_index(rng, relations)),
                   static_cast<EntityId>(uniform_index(rng, entities)),
                   static_cast<TimeIndex>(uniform_index(rng, timestamps))});
  }
  return out;
}

inline void randomize(ModelParams& p, Rng& rng, double scale) {
  for (Matrix* m : p.tensors()) {
    for (double& v : m->flat()) v = scale * (2.0 * uniform_open01(rng) - 1.0);
  }
}

// Small config used by most unit tests.
inline RunConfig tiny_config(std::size_t dim) {
  RunConfig c;
  c.embedding_size = dim;
  c.max_neighbors = 4;
  c.batch_size = 16;
  c.epochs = 2;
  c.eval_threads = 1;
  c.log_wall_seconds = false;
  return c;
}

// Copy pattern: every round pairs the 30 entities into 15 couples (s, e). The
// signal fact (e, signal, s, t - 1) is the unique neighbor of s one step
// before the query fact (s, answer, e, t). Rounds are 15 steps apart, so the
// Delta t = 1 neighbor dominates the TNG.
struct CopyPattern {
  SplitSet splits;
  VocabSizes vocab;
};

inline CopyPattern copy_pattern(std::uint64_t seed) {
  constexpr std::size_t kEntities = 30;
  constexpr std::size_t kRounds = 10;
  constexpr RelationId kSignal = 0;
  constexpr RelationId kAnswer = 1;
  Rng rng(seed);
  CopyPattern cp;
  QuadrupleList queries;
  for (std::size_t k = 0; k < kRounds; ++k) {
    const auto t = static_cast<TimeIndex>(1 + 15 * k);
    std::vector<EntityId> perm(kEntities);
    for (std::size_t i = 0; i < kEntities; ++i) perm[i] = static_cast<EntityId>(i);
    shuffle(std::span<EntityId>(perm), rng);
    for (std::size_t i = 0; i < kEntities; i += 2) {
      const EntityId s = perm[i];
      const EntityId e = perm[i + 1];
      cp.splits.train.push_back({e, kSignal, s, t - 1});
      queries.push_back({s, kAnswer, e, t});
    }
  }
  shuffle(std::span<Quadruple>(queries), rng);
  const std::size_t held = queries.size() / 5;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (i < held) {
      cp.splits.valid.push_back(queries[i]);
    } else {
      cp.splits.train.push_back(queries[i]);
    }
  }
  // Test mirrors valid so end-to-end runs report something meaningful.
  cp.splits.test = cp.splits.valid;
  cp.vocab = {kEntities, 2, 1 + 15 * kRounds};
  return cp;
}

inline std::string date_token(TimeIndex t) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{year{2014} / January / 1} + days{t}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline void write_quads(const fs::path& path, const QuadrupleList& quads) {
  std::ofstream out(path);
  for (const Quadruple& q : quads) {
    out << "ent" << q.s << '\t' << "rel" << q.r << '\t' << "ent" << q.o << '\t' << date_token(q.t)
        << '\n';
  }
}

inline void write_dataset(const fs::path& dir, const SplitSet& splits) {
  fs::create_directories(dir);
  write_quads(dir / "train.txt", splits.train);
  write_quads(dir / "valid.txt", splits.valid);
  write_quads(dir / "test.txt", splits.test);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("tkgc_" + tag + "_" + std::to_string(rd()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Linear scan over the augmented quadruples: every (e, r, t) with (e, r, s_q, t).
inline std::vector<IncomingEdge> brute_force_neighbors(std::span<const Quadruple> quads,
                                                       EntityId s_q, TimeIndex t_q,
                                                       std::optional<TimeIndex> range) {
  std::vector<IncomingEdge> out;
  for (const Quadruple& q : quads) {
    if (q.o != s_q) continue;
    if (range && std::abs(q.t - t_q) > *range) continue;
    out.push_back({q.s, q.r, q.t});
  }
  std::sort(out.begin(), out.end(), [](const IncomingEdge& a, const IncomingEdge& b) {
    return std::tie(a.t, a.source, a.relation) < std::tie(b.t, b.source, b.relation);
  });
  return out;
}

// Sorts candidates by score and walks down to the ground truth.
inline double sort_scan_rank(std::span<const double> scores, EntityId o_q,
                             const std::vector<EntityId>& filtered, TieMode mode) {
  std::vector<std::size_t> order;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (static_cast<EntityId>(e) != o_q &&
        std::find(filtered.begin(), filtered.end(), static_cast<EntityId>(e)) != filtered.end()) {
      continue;
    }
    order.push_back(e);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double target = scores[static_cast<std::size_t>(o_q)];
  std::size_t first = 0;
  while (scores[order[first]] > target) ++first;
  std::size_t last = first;
  while (last < order.size() && scores[order[last]] == target) ++last;
  // Positions first+1 .. last share the ground truth's score.
  const double best = static_cast<double>(first + 1);
  const double worst = static_cast<double>(last);
  return mode == TieMode::kPessimistic ? worst : (best + worst) / 2.0;
}

// Straightforward f(h_e || Phi(x)) written without the encoder.
inline Vector reference_rep(const ModelParams& p, EntityId e, double x, Activation act) {
  const std::size_t de = p.entity.cols();
  const std::size_t dt = p.omega.cols();
  Vector input;
  for (double v : p.entity.row(static_cast<std::size_t>(e))) input.push_back(v);
  for (std::size_t k = 0; k < dt; ++k) {
    input.push_back(std::sqrt(1.0 / static_cast<double>(dt)) * std::cos(p.omega(0, k) * x + p.phase(0, k)));
  }
  Vector out(p.comb_w.rows());
  for (std::size_t j = 0; j < out.size(); ++j) {
    double z = p.comb_b(0, j);
    for (std::size_t k = 0; k < de + dt; ++k) z += p.comb_w(j, k) * input[k];
    out[j] = act == Activation::kTanh ? std::tanh(z) : std::max(0.0, z);
  }
  return out;
}

// Mean of agg_W (a || h_r) + agg_b computed from scratch for a one-step sample.
inline Vector reference_aggregate(const ModelParams& p, const TngSample& sample,
                                  const RunConfig& config) {
  const std::size_t dh = p.comb_w.rows();
  if (sample.neighbors.empty()) return reference_rep(p, sample.center, 0.0, config.activation);
  Vector out(dh, 0.0);
  for (const TemporalNeighbor& n : sample.neighbors) {
    const double x = config.time_encoder_variant == TimeEncoderVariant::kAbsolute
                         ? static_cast<double>(n.t)
                         : static_cast<double>(n.t - sample.t_query);
    const Vector a = reference_rep(p, n.e, x, config.activation);
    const auto hr = p.relation.row(static_cast<std::size_t>(n.r));
    for (std::size_t j = 0; j < dh; ++j) {
      double z = p.agg_b(0, j);
      for (std::size_t k = 0; k < dh; ++k) z += p.agg_w(j, k) * a[k];
      for (std::size_t k = 0; k < hr.size(); ++k) z += p.agg_w(j, dh + k) * hr[k];
      out[j] += z / static_cast<double>(sample.neighbors.size());
    }
  }
  return out;
}

}  // namespace tkgc::test
