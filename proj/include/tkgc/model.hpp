#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "tkgc/config.hpp"
#include "tkgc/graph.hpp"
#include "tkgc/tensor.hpp"

namespace tkgc {

// All trainable tensors. Vectors are stored as 1 x n matrices so every tensor
// shares one code path in the optimizer, the checkpoint and the gradient check.
struct ModelParams {
  Matrix entity;    // |E| x d_e
  Matrix relation;  // 2|R| x d_r (reciprocals included)
  Matrix omega;     // 1 x d_t, time-encoder frequencies
  Matrix phase;     // 1 x d_t, time-encoder phases
  Matrix comb_w;    // d_h x (d_e + d_t), feed-forward combiner f
  Matrix comb_b;    // 1 x d_h
  Matrix agg_w;     // d_h x (d_h + d_r), relational aggregator W
  Matrix agg_b;     // 1 x d_h

  static constexpr std::array<std::string_view, 8> kTensorNames = {
      "entity", "relation", "omega", "phase", "comb_w", "comb_b", "agg_w", "agg_b"};

  [[nodiscard]] std::array<Matrix*, 8> tensors() {
    return {&entity, &relation, &omega, &phase, &comb_w, &comb_b, &agg_w, &agg_b};
  }
  [[nodiscard]] std::array<const Matrix*, 8> tensors() const {
    return {&entity, &relation, &omega, &phase, &comb_w, &comb_b, &agg_w, &agg_b};
  }

  [[nodiscard]] std::size_t entity_dim() const { return entity.cols(); }
  [[nodiscard]] std::size_t time_dim() const { return omega.cols(); }
  [[nodiscard]] std::size_t hidden_dim() const { return comb_w.rows(); }

  // Zero tensors with the shapes implied by (config, vocab).
  static ModelParams zeros(const RunConfig& config, const VocabSizes& vocab);
  // Same shapes as `like`, all zeros.
  static ModelParams zeros_like(const ModelParams& like);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Xavier-uniform tables and layers, omega geometric from 1 down to 1/|T|,
// phases zero.
ModelParams init_params(const RunConfig& config, const VocabSizes& vocab, std::uint64_t seed);

bool all_finite(const ModelParams& params);

}  // namespace tkgc
