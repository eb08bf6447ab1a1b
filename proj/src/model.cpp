#include "tkgc/model.hpp"

#include <algorithm>
#include <cmath>

#include "tkgc/rng.hpp"

namespace tkgc {

ModelParams ModelParams::zeros(const RunConfig& config, const VocabSizes& vocab) {
  const std::size_t de = config.entity_dim();
  const std::size_t dr = config.relation_dim();
  const std::size_t dh = config.hidden_dim();
  const std::size_t dt = config.resolved_time_dim();
  ModelParams p;
  p.entity = Matrix(vocab.num_entities, de);
  p.relation = Matrix(vocab.num_relations(), dr);
  p.omega = Matrix(1, dt);
  p.phase = Matrix(1, dt);
  p.comb_w = Matrix(dh, de + dt);
  p.comb_b = Matrix(1, dh);
  p.agg_w = Matrix(dh, dh + dr);
  p.agg_b = Matrix(1, dh);
  return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& like) {
  ModelParams p;
  auto dst = p.tensors();
  auto src = like.tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] = Matrix(src[i]->rows(), src[i]->cols());
  return p;
}

ModelParams init_params(const RunConfig& config, const VocabSizes& vocab, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(config, vocab);
  Rng rng(derive_seed(seed, {0x1a17}));
  auto xavier = [&](Matrix& m, double fan_in, double fan_out) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : m.flat()) v = (2.0 * uniform_open01(rng) - 1.0) * bound;
  };
  // Embedding rows are treated as d -> d maps for the fan computation.
  xavier(p.entity, static_cast<double>(p.entity.cols()), static_cast<double>(p.entity.cols()));
  xavier(p.relation, static_cast<double>(p.relation.cols()), static_cast<double>(p.relation.cols()));
  xavier(p.comb_w, static_cast<double>(p.comb_w.cols()), static_cast<double>(p.comb_w.rows()));
  xavier(p.agg_w, static_cast<double>(p.agg_w.cols()), static_cast<double>(p.agg_w.rows()));

  const std::size_t dt = p.omega.cols();
  const double horizon = static_cast<double>(std::max<std::size_t>(vocab.num_timestamps, 1));
  for (std::size_t i = 0; i < dt; ++i) {
    const double frac = dt > 1 ? static_cast<double>(i) / static_cast<double>(dt - 1) : 0.0;
    p.omega(0, i) = std::pow(1.0 / horizon, frac);
  }
  return p;
}

bool all_finite(const ModelParams& params) {
  for (const Matrix* m : params.tensors()) {
    for (double v : m->flat()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace tkgc
