#include "tkgc/training.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tkgc/encoder.hpp"
#include "tkgc/kernels.hpp"
#include "tkgc/rng.hpp"
#include "tkgc/scoring.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tkgc {
namespace {

constexpr std::uint64_t kTrainStream = 0x7a11;
constexpr std::uint64_t kShuffleStream = 0x5eed;

int thread_index() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

std::string describe(const Quadruple& q) {
  return "(" + std::to_string(q.s) + ", " + std::to_string(q.r) + ", " + std::to_string(q.o) +
         ", " + std::to_string(q.t) + ")";
}

}  // namespace

std::uint64_t training_seed(std::uint64_t base, std::size_t epoch, std::size_t position) {
  return derive_seed(base, {kTrainStream, epoch, position});
}

BatchLoss loss_batch(std::span<const Quadruple> batch, std::span<const std::uint64_t> seeds,
                     const TemporalKG& kg_train, const ModelParams& params,
                     const RunConfig& config) {
  if (seeds.size() != batch.size()) throw ValidationError("loss_batch: one seed per example");
  BatchLoss result{0.0, ModelParams::zeros_like(params)};
  if (batch.empty()) return result;

  const int threads = std::max(1, config.threads);
  kernels::ThreadScope scope(threads);
  const Encoder encoder(kg_train, params, config);
  const std::size_t num_entities = params.entity.rows();
  const std::size_t dh = params.hidden_dim();
  const std::size_t dr = params.relation.cols();
  const std::size_t num_base = kg_train.vocab().num_base_relations;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    groups[encoder.self_time_arg(batch[i].t)].push_back(i);
  }

  CandidateTable candidates(params, config.activation, threads);
  std::vector<EncoderGrad> encoder_grads(static_cast<std::size_t>(threads), EncoderGrad(params));
  std::vector<double> losses(batch.size(), 0.0);
  Matrix candidate_grad_sum(num_entities, dh);  // sum over groups of dL/dpre

  for (const auto& [arg, members] : groups) {
    if (candidates.time_arg() != arg) candidates.set_time_arg(arg);
    const Matrix& reps = candidates.reps();
    Matrix dscores(members.size(), num_entities);
    Matrix qvecs(members.size(), dh);
    const auto count = static_cast<std::int64_t>(members.size());

#pragma omp parallel if (threads > 1)
    {
      EncoderGrad& g = encoder_grads[static_cast<std::size_t>(thread_index())];
      Vector dq(dh), dhs(dh);
#pragma omp for schedule(static)
      for (std::int64_t m = 0; m < count; ++m) {
        const auto mi = static_cast<std::size_t>(m);
        const std::size_t bi = members[mi];
        const Quadruple& q = batch[bi];
        const ExcludedEdge own{q.s, {q.o, inverse_relation(q.r, num_base), q.t}};
        const NodeTape tape = encoder.encode_query(q.s, q.t, seeds[bi], own);
        const auto hr = params.relation.row(static_cast<std::size_t>(q.r));
        const Vector qv = query_vector(config.score_fn, tape.output, hr);
        std::copy(qv.begin(), qv.end(), qvecs.row(mi).begin());

        auto scores = dscores.row(mi);
        kernels::serial::matvec(reps, qv, scores);
        double top = scores[0];
        for (double s : scores) top = std::max(top, s);
        double z = 0.0;
        for (double s : scores) z += std::exp(s - top);
        const double log_z = top + std::log(z);
        const double loss = log_z - scores[static_cast<std::size_t>(q.o)];
        losses[bi] = loss;
        if (!std::isfinite(loss)) continue;

        // dL/dscore = (softmax - onehot) / |batch|
        for (double& s : scores) s = std::exp(s - log_z) * inv_batch;
        scores[static_cast<std::size_t>(q.o)] -= inv_batch;

        std::fill(dq.begin(), dq.end(), 0.0);
        for (std::size_t o = 0; o < num_entities; ++o) axpy(scores[o], reps.row(o), dq);
        std::fill(dhs.begin(), dhs.end(), 0.0);
        auto dhr = g.relation_row(q.r, dr);
        query_vector_backward(config.score_fn, tape.output, hr, dq, dhs, dhr);
        encoder.backward(tape, dhs, g);
      }
    }

    for (std::size_t mi = 0; mi < members.size(); ++mi) {
      const std::size_t bi = members[mi];
      if (!std::isfinite(losses[bi])) {
        throw DivergenceError("non-finite loss at quadruple " + describe(batch[bi]));
      }
    }

    // Candidate side: dL/dreps = dscores^T q, then through the activation.
    Matrix rep_grad(num_entities, dh);
    kernels::accumulate_outer(threads, dscores, qvecs, rep_grad);
    const Matrix& pre = candidates.pre();
    Vector col_sum(dh, 0.0);
    for (std::size_t o = 0; o < num_entities; ++o) {
      for (std::size_t j = 0; j < dh; ++j) {
        const double g = rep_grad(o, j) * activate_grad(config.activation, pre(o, j), reps(o, j));
        candidate_grad_sum(o, j) += g;
        col_sum[j] += g;
      }
    }
    // Time block of the combiner, its bias, and Phi at this argument.
    const Vector& code = candidates.time_code();
    const std::size_t de = params.entity_dim();
    const std::size_t dt = params.time_dim();
    Vector dcode(dt, 0.0);
    for (std::size_t j = 0; j < dh; ++j) {
      result.grad.comb_b(0, j) += col_sum[j];
      auto gw = result.grad.comb_w.row(j);
      const auto w = params.comb_w.row(j);
      for (std::size_t k = 0; k < dt; ++k) {
        gw[de + k] += col_sum[j] * code[k];
        dcode[k] += col_sum[j] * w[de + k];
      }
    }
    const double scale = std::sqrt(1.0 / static_cast<double>(dt));
    for (std::size_t k = 0; k < dt; ++k) {
      const double dphase =
          -dcode[k] * scale * std::sin(params.omega(0, k) * arg + params.phase(0, k));
      result.grad.phase(0, k) += dphase;
      result.grad.omega(0, k) += dphase * arg;
    }
  }

  // Entity block of the combiner and the entity table, summed over groups.
  kernels::accumulate_at_b(threads, candidate_grad_sum, params.entity, result.grad.comb_w, 0);
  kernels::accumulate_a_w(threads, candidate_grad_sum, params.comb_w, result.grad.entity);

  for (const EncoderGrad& g : encoder_grads) g.add_into(result.grad);
  double total = 0.0;
  for (double l : losses) total += l;
  result.loss = total * inv_batch;
  return result;
}

AdamState AdamState::for_params(const ModelParams& params) {
  return {ModelParams::zeros_like(params), ModelParams::zeros_like(params), 0};
}

void adam_step(ModelParams& params, const ModelParams& grad, AdamState& state,
               const RunConfig& config) {
  state.step += 1;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  auto p = params.tensors();
  auto g = grad.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t t = 0; t < p.size(); ++t) {
    auto pf = p[t]->flat();
    auto gf = g[t]->flat();
    auto mf = m[t]->flat();
    auto vf = v[t]->flat();
    for (std::size_t i = 0; i < pf.size(); ++i) {
      const double gi = gf[i] + config.weight_decay * pf[i];
      mf[i] = b1 * mf[i] + (1.0 - b1) * gi;
      vf[i] = b2 * vf[i] + (1.0 - b2) * gi * gi;
      const double mhat = mf[i] / c1;
      const double vhat = vf[i] / c2;
      pf[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
  }
}

std::string EpochRecord::to_json_line(bool with_wall_seconds) const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  if (valid) {
    j["valid_mrr"] = valid->mrr;
    j["valid_hits1"] = valid->hits1;
    j["valid_hits3"] = valid->hits3;
    j["valid_hits10"] = valid->hits10;
  } else {
    j["valid_mrr"] = nullptr;
    j["valid_hits1"] = nullptr;
    j["valid_hits3"] = nullptr;
    j["valid_hits10"] = nullptr;
  }
  if (with_wall_seconds) j["wall_seconds"] = wall_seconds;
  return j.dump();
}

TrainingData TrainingData::from_splits(const SplitSet& splits, const VocabSizes& vocab) {
  TrainingData data;
  const std::size_t base = vocab.num_base_relations;
  data.train_examples = add_reciprocals(splits.train, base);
  data.train_kg = build_index(data.train_examples, vocab, Split::kTrain);
  data.valid_raw = splits.valid;
  data.test_raw = splits.test;
  data.filter.add(data.train_examples);
  data.filter.add(add_reciprocals(splits.valid, base));
  data.filter.add(add_reciprocals(splits.test, base));
  return data;
}

TrainResult train(const TrainingData& data, const RunConfig& config, const EpochCallback& on_epoch,
                  std::optional<TrainState> resume) {
  config.validate();
  const VocabSizes& vocab = data.train_kg.vocab();
  TrainResult result;
  if (resume) {
    result.state = std::move(*resume);
  } else {
    result.state.params = init_params(config, vocab, config.seed);
    result.state.adam = AdamState::for_params(result.state.params);
    result.state.best_params = result.state.params;
  }
  TrainState& st = result.state;

  std::vector<std::size_t> order(data.train_examples.size());
  QuadrupleList batch;
  std::vector<std::uint64_t> seeds;
  for (std::size_t epoch = st.epochs_done + 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffler(derive_seed(config.seed, {kShuffleStream, epoch}));
    shuffle(std::span<std::size_t>(order), shuffler);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      seeds.clear();
      for (std::size_t k = start; k < stop; ++k) {
        batch.push_back(data.train_examples[order[k]]);
        seeds.push_back(training_seed(config.seed, epoch, k));
      }
      BatchLoss bl = loss_batch(batch, seeds, data.train_kg, st.params, config);
      loss_sum += bl.loss * static_cast<double>(batch.size());
      adam_step(st.params, bl.grad, st.adam, config);
      if (!all_finite(st.params)) {
        throw DivergenceError("parameters became non-finite in epoch " + std::to_string(epoch));
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = order.empty() ? 0.0 : loss_sum / static_cast<double>(order.size());
    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      rec.valid = evaluate(data.train_kg, data.valid_raw, data.filter, st.params, config);
      rec.valid->ranks.clear();
      if (rec.valid->mrr > st.best_valid_mrr) {
        st.best_valid_mrr = rec.valid->mrr;
        st.best_epoch = epoch;
        st.best_params = st.params;
      }
    }
    st.epochs_done = epoch;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec, st);
  }
  return result;
}

std::string ParameterCount::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  nlohmann::ordered_json parts;
  for (const auto& [name, n] : breakdown) parts[name] = n;
  j["breakdown"] = parts;
  return j.dump(2);
}

std::string ParameterCount::to_csv() const {
  std::ostringstream out;
  out << "tensor,count\n";
  for (const auto& [name, n] : breakdown) out << name << ',' << n << '\n';
  out << "total," << total << '\n';
  return out.str();
}

ParameterCount count_parameters(const RunConfig& config, const VocabSizes& vocab) {
  const ModelParams shape = ModelParams::zeros(config, vocab);
  ParameterCount out;
  auto tensors = shape.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    out.breakdown.emplace_back(std::string(ModelParams::kTensorNames[i]), tensors[i]->size());
    out.total += tensors[i]->size();
  }
  return out;
}

Vector absolute_time_encoding(const ModelParams& params, TimeIndex t) {
  return phi(static_cast<double>(t), params.omega.flat(), params.phase.flat());
}

}  // namespace tkgc
