#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tkgc/sampler.hpp"
#include "tkgc/types.hpp"

namespace tkgc {

enum class Activation { kTanh, kRelu };
enum class ScoreFn { kDistmult, kComplex };
enum class TimeEncoderVariant { kDifference, kAbsolute };
enum class TieMode { kPessimistic, kMean };
enum class FilterMode { kTimeAware, kStatic };

// Every hyperparameter and variant switch of a run. Text form is flat
// "key = value" lines in declaration order; that text is also what gets hashed.
struct RunConfig {
  std::size_t embedding_size = 300;
  std::size_t time_dim = 0;  // 0: same as embedding_size
  int agg_steps = 1;
  Activation activation = Activation::kTanh;
  std::optional<TimeIndex> search_range = kUnbounded;
  std::size_t max_neighbors = 100;
  bool include_same_time = true;
  ScoreFn score_fn = ScoreFn::kDistmult;
  SamplerVariant sampler_variant = SamplerVariant::kWeighted;
  TimeEncoderVariant time_encoder_variant = TimeEncoderVariant::kDifference;

  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  std::size_t batch_size = 256;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  int eval_threads = 0;  // 0: all available cores
  std::size_t eval_every = 1;
  bool log_wall_seconds = true;

  TieMode tie_mode = TieMode::kPessimistic;
  FilterMode filter_mode = FilterMode::kTimeAware;

  [[nodiscard]] std::size_t entity_dim() const { return embedding_size; }
  [[nodiscard]] std::size_t relation_dim() const { return embedding_size; }
  [[nodiscard]] std::size_t hidden_dim() const { return embedding_size; }
  [[nodiscard]] std::size_t resolved_time_dim() const {
    return time_dim == 0 ? embedding_size : time_dim;
  }
  [[nodiscard]] SamplerOptions sampler_options() const {
    return {max_neighbors, search_range, sampler_variant, include_same_time};
  }

  // Throws ValidationError on inconsistent values.
  void validate() const;

  [[nodiscard]] std::string to_text() const;
  [[nodiscard]] std::uint64_t hash() const;

  // Applies one "key = value" assignment. Unknown keys throw ValidationError.
  void set(std::string_view key, std::string_view value);

  static RunConfig from_text(std::string_view text);
  static RunConfig from_file(const std::string& path);

  // Best settings per benchmark: embedding size 300 / 200 / 200 for
  // icews14 / icews05-15 / gdelt; everything else at the defaults above.
  static RunConfig for_dataset(std::string_view name);

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Keys whose values differ between two configs, in declaration order.
std::vector<std::string> config_diff(const RunConfig& a, const RunConfig& b);

std::string to_string(Activation v);
std::string to_string(ScoreFn v);
std::string to_string(SamplerVariant v);
std::string to_string(TimeEncoderVariant v);
std::string to_string(TieMode v);
std::string to_string(FilterMode v);

// 64-bit FNV-1a, used for config and input-content hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace tkgc
