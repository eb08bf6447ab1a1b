#include <doctest.h>

#include <json.hpp>

#include "support.hpp"
#include "tkgc/training.hpp"

using namespace tkgc;

namespace {

struct Instance {
  VocabSizes vocab{14, 4, 25};
  QuadrupleList aug;
  TemporalKG kg;
  RunConfig cfg = test::tiny_config(6);
  ModelParams params;
  std::vector<std::uint64_t> seeds;

  explicit Instance(std::uint64_t seed, const RunConfig& config) : cfg(config) {
    Rng rng(seed);
    aug = add_reciprocals(test::random_quads(rng, 30, 14, 4, 25), 4);
    kg = build_index(aug, vocab);
    params = init_params(cfg, vocab, seed);
    for (double& v : params.phase.flat()) v = 2.0 * uniform_open01(rng) - 1.0;
    for (double& v : params.comb_b.flat()) v = 0.2 * (2.0 * uniform_open01(rng) - 1.0);
    for (double& v : params.agg_b.flat()) v = 0.2 * (2.0 * uniform_open01(rng) - 1.0);
    for (std::size_t i = 0; i < 8; ++i) seeds.push_back(derive_seed(seed, {i}));
  }

  [[nodiscard]] std::span<const Quadruple> batch() const { return {aug.data(), 8}; }
  [[nodiscard]] double loss() const { return loss_batch(batch(), seeds, kg, params, cfg).loss; }
};

// Relative errors of every partial derivative against central differences.
std::vector<double> gradient_errors(Instance& inst) {
  const BatchLoss analytic = loss_batch(inst.batch(), inst.seeds, inst.kg, inst.params, inst.cfg);
  std::vector<double> errors;
  auto tensors = inst.params.tensors();
  const auto grads = analytic.grad.tensors();
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    auto values = tensors[ti]->flat();
    const auto g = grads[ti]->flat();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double keep = values[k];
      values[k] = keep + 1e-5;
      const double up = inst.loss();
      values[k] = keep - 1e-5;
      const double down = inst.loss();
      values[k] = keep;
      const double numeric = (up - down) / 2e-5;
      errors.push_back(std::abs(g[k] - numeric) / std::max({std::abs(g[k]), std::abs(numeric), 1e-6}));
    }
  }
  return errors;
}

TrainingData copy_data(std::uint64_t seed) {
  const test::CopyPattern cp = test::copy_pattern(seed);
  return TrainingData::from_splits(cp.splits, cp.vocab);
}

}  // namespace

TEST_CASE("two indistinguishable candidates give loss ln 2") {
  const VocabSizes vocab{2, 1, 3};
  RunConfig cfg = test::tiny_config(4);
  ModelParams p = init_params(cfg, vocab, 1);
  std::copy(p.entity.row(0).begin(), p.entity.row(0).end(), p.entity.row(1).begin());
  const QuadrupleList aug = add_reciprocals(QuadrupleList{{0, 0, 1, 1}}, 1);
  const TemporalKG kg = build_index(aug, vocab);
  const std::vector<std::uint64_t> seeds = {1, 2};
  const BatchLoss bl = loss_batch(aug, seeds, kg, p, cfg);
  CHECK(bl.loss == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("loss is non-negative on random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Instance inst(seed, test::tiny_config(5));
    Rng rng(seed);
    test::randomize(inst.params, rng, 1.5);
    CHECK(inst.loss() >= 0.0);
  }
}

TEST_CASE("empty batch has zero loss and gradient") {
  Instance inst(1, test::tiny_config(4));
  const BatchLoss bl = loss_batch({}, {}, inst.kg, inst.params, inst.cfg);
  CHECK(bl.loss == 0.0);
  CHECK(bl.grad == ModelParams::zeros_like(inst.params));
}

TEST_CASE("seed count must match the batch") {
  Instance inst(1, test::tiny_config(4));
  CHECK_THROWS_AS((void)loss_batch(inst.batch(), std::span<const std::uint64_t>(inst.seeds).first(3),
                                   inst.kg, inst.params, inst.cfg),
                  ValidationError);
}

TEST_CASE("gradients match central differences across variants") {
  struct Variant {
    const char* name;
    void (*apply)(RunConfig&);
  };
  const Variant variants[] = {
      {"distmult", [](RunConfig&) {}},
      {"complex", [](RunConfig& c) { c.score_fn = ScoreFn::kComplex; }},
      {"two steps", [](RunConfig& c) { c.agg_steps = 2; }},
      {"absolute time", [](RunConfig& c) { c.time_encoder_variant = TimeEncoderVariant::kAbsolute; }},
      {"uniform sampler", [](RunConfig& c) { c.sampler_variant = SamplerVariant::kUniform; }},
      {"separate time dim", [](RunConfig& c) { c.time_dim = 3; }},
  };
  for (const Variant& v : variants) {
    CAPTURE(v.name);
    RunConfig cfg = test::tiny_config(6);
    v.apply(cfg);
    Instance inst(7, cfg);
    const auto errors = gradient_errors(inst);
    CHECK(*std::max_element(errors.begin(), errors.end()) < 1e-4);
  }
}

TEST_CASE("relu gradients agree away from the kink") {
  RunConfig cfg = test::tiny_config(6);
  cfg.activation = Activation::kRelu;
  Instance inst(8, cfg);
  const auto errors = gradient_errors(inst);
  const auto bad = std::count_if(errors.begin(), errors.end(), [](double e) { return e > 1e-4; });
  // A handful of pre-activations may sit within the probe step of zero.
  CHECK(static_cast<double>(bad) <= 0.01 * static_cast<double>(errors.size()));
}

TEST_CASE("an example never sees its own reciprocal edge") {
  const VocabSizes vocab{3, 1, 5};
  RunConfig cfg = test::tiny_config(4);
  const ModelParams p = init_params(cfg, vocab, 4);
  const QuadrupleList fact = add_reciprocals(QuadrupleList{{0, 0, 1, 2}}, 1);
  const TemporalKG with = build_index(fact, vocab);
  const TemporalKG without = build_index({}, vocab);
  const std::vector<std::uint64_t> seeds = {9};
  const std::span<const Quadruple> one(fact.data(), 1);
  CHECK(loss_batch(one, seeds, with, p, cfg).loss == loss_batch(one, seeds, without, p, cfg).loss);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  Instance inst(2, test::tiny_config(4));
  RunConfig cfg = inst.cfg;
  cfg.learning_rate = 0.0;
  ModelParams p = inst.params;
  AdamState st = AdamState::for_params(p);
  const BatchLoss bl = loss_batch(inst.batch(), inst.seeds, inst.kg, p, cfg);
  adam_step(p, bl.grad, st, cfg);
  CHECK(p == inst.params);
  CHECK(st.step == 1);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  Instance inst(3, test::tiny_config(4));
  ModelParams p = inst.params;
  AdamState st = AdamState::for_params(p);
  adam_step(p, ModelParams::zeros_like(p), st, inst.cfg);
  CHECK(p == inst.params);
}

TEST_CASE("adam steps against a scalar reimplementation") {
  Instance inst(4, test::tiny_config(4));
  RunConfig cfg = inst.cfg;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 0.001;
  ModelParams p = inst.params;
  AdamState st = AdamState::for_params(p);
  const auto before = inst.params.entity.flat();
  Vector ref(before.begin(), before.end());
  Vector m(ref.size(), 0.0), v(ref.size(), 0.0);
  Rng rng(5);
  for (int step = 1; step <= 3; ++step) {
    ModelParams g = ModelParams::zeros_like(p);
    test::randomize(g, rng, 1.0);
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const double gk = g.entity.flat()[k] + cfg.weight_decay * ref[k];
      m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * gk;
      v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * gk * gk;
      const double mh = m[k] / (1.0 - std::pow(cfg.adam_beta1, step));
      const double vh = v[k] / (1.0 - std::pow(cfg.adam_beta2, step));
      ref[k] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_eps);
    }
    adam_step(p, g, st, cfg);
  }
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(p.entity.flat()[k] - ref[k]) < 1e-14);
}

TEST_CASE("parameter count of the smallest model") {
  RunConfig cfg;
  cfg.embedding_size = 1;
  const ParameterCount pc = count_parameters(cfg, {1, 1, 1});
  CHECK(pc.total == 11);
  CHECK(pc.breakdown.size() == 8);
}

TEST_CASE("parameter count formula") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    RunConfig cfg;
    cfg.embedding_size = 1 + uniform_index(rng, 64);
    cfg.time_dim = uniform_index(rng, 3) == 0 ? 0 : 1 + uniform_index(rng, 32);
    const std::size_t e = 1 + uniform_index(rng, 5000), r = 1 + uniform_index(rng, 300);
    const std::size_t d = cfg.embedding_size, dt = cfg.resolved_time_dim();
    const std::size_t want = e * d + 2 * r * d + 2 * dt + d * (d + dt) + d + d * (2 * d) + d;
    const ParameterCount pc = count_parameters(cfg, {e, r, 10});
    CHECK(pc.total == want);
    std::size_t sum = 0;
    for (const auto& part : pc.breakdown) sum += part.second;
    CHECK(sum == pc.total);
    CHECK(nlohmann::json::parse(pc.to_json())["total"] == want);
  }
}

TEST_CASE("absolute time encoding at zero is the phase cosine") {
  Instance inst(5, test::tiny_config(5));
  const Vector v = absolute_time_encoding(inst.params, 0);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(v[k] == std::sqrt(1.0 / 5.0) * std::cos(inst.params.phase(0, k)));
  }
}

TEST_CASE("huge relation weights raise a divergence error naming the quadruple") {
  Instance inst(6, test::tiny_config(4));
  inst.params.relation.fill(1e308);
  try {
    (void)inst.loss();
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("quadruple") != std::string::npos);
  }
}

TEST_CASE("thread count does not change the batch loss") {
  RunConfig cfg = test::tiny_config(6);
  Instance one(9, cfg);
  cfg.threads = 3;
  Instance three(9, cfg);
  const BatchLoss a = loss_batch(one.batch(), one.seeds, one.kg, one.params, one.cfg);
  const BatchLoss b = loss_batch(three.batch(), three.seeds, three.kg, three.params, three.cfg);
  CHECK(a.loss == b.loss);
  const auto ga = a.grad.tensors();
  const auto gb = b.grad.tensors();
  for (std::size_t ti = 0; ti < ga.size(); ++ti) {
    for (std::size_t k = 0; k < ga[ti]->size(); ++k) {
      CHECK(std::abs(ga[ti]->flat()[k] - gb[ti]->flat()[k]) < 1e-13);
    }
  }
}

TEST_CASE("same seed gives the same run, a different seed does not") {
  const TrainingData data = copy_data(3);
  RunConfig cfg = test::tiny_config(8);
  cfg.seed = 12;
  const TrainResult a = train(data, cfg);
  const TrainResult b = train(data, cfg);
  REQUIRE(a.log.size() == 2);
  CHECK(a.log[0].train_loss == b.log[0].train_loss);
  CHECK(a.state.params == b.state.params);
  cfg.seed = 13;
  CHECK(train(data, cfg).log[0].train_loss != a.log[0].train_loss);
}

TEST_CASE("spelling out the defaults changes nothing") {
  const TrainingData data = copy_data(4);
  RunConfig cfg = test::tiny_config(6);
  cfg.epochs = 1;
  RunConfig spelled = cfg;
  spelled.set("time_encoder_variant", "difference");
  spelled.set("sampler_variant", "weighted");
  spelled.set("score_fn", "distmult");
  CHECK(spelled == cfg);
  CHECK(train(data, cfg).state.params == train(data, spelled).state.params);
}

TEST_CASE("resuming reproduces an uninterrupted run") {
  const TrainingData data = copy_data(5);
  RunConfig cfg = test::tiny_config(6);
  cfg.epochs = 3;
  const TrainResult full = train(data, cfg);
  RunConfig first = cfg;
  first.epochs = 1;
  TrainResult part = train(data, first);
  const TrainResult rest = train(data, cfg, {}, part.state);
  CHECK(rest.log.size() == 2);
  CHECK(rest.state.params == full.state.params);
  CHECK(rest.state.adam == full.state.adam);
  CHECK(rest.log.back().train_loss == full.log.back().train_loss);
}

TEST_CASE("validation cadence and best epoch tracking") {
  const TrainingData data = copy_data(6);
  RunConfig cfg = test::tiny_config(6);
  cfg.epochs = 5;
  cfg.eval_every = 2;
  std::size_t callbacks = 0;
  const TrainResult r = train(data, cfg, [&](const EpochRecord&, const TrainState&) { ++callbacks; });
  CHECK(callbacks == 5);
  CHECK_FALSE(r.log[0].valid.has_value());
  CHECK(r.log[1].valid.has_value());
  CHECK_FALSE(r.log[2].valid.has_value());
  CHECK(r.log[3].valid.has_value());
  CHECK(r.log[4].valid.has_value());
  double best = -1.0;
  for (const EpochRecord& rec : r.log) {
    if (rec.valid) best = std::max(best, rec.valid->mrr);
  }
  CHECK(r.state.best_valid_mrr == best);
  CHECK(r.log[r.state.best_epoch - 1].valid->mrr == best);
}

TEST_CASE("epoch record json") {
  EpochRecord rec;
  rec.epoch = 3;
  rec.train_loss = 1.5;
  rec.wall_seconds = 2.0;
  const auto without = nlohmann::json::parse(rec.to_json_line(false));
  CHECK(without["epoch"] == 3);
  CHECK(without["valid_mrr"].is_null());
  CHECK_FALSE(without.contains("wall_seconds"));
  CHECK(nlohmann::json::parse(rec.to_json_line(true))["wall_seconds"] == 2.0);
}

TEST_CASE("training data doubles every split for the filter") {
  const test::CopyPattern cp = test::copy_pattern(7);
  const TrainingData data = TrainingData::from_splits(cp.splits, cp.vocab);
  CHECK(data.train_examples.size() == 2 * cp.splits.train.size());
  CHECK(data.valid_raw == cp.splits.valid);
  const Quadruple v = cp.splits.valid.front();
  // The test split mirrors valid here, so a held-out object is filtered only
  // when some other object is also known for the same query.
  CHECK(data.filter.filter_set(v, FilterMode::kTimeAware).empty());
}
