#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tkgc/config.hpp"
#include "tkgc/graph.hpp"
#include "tkgc/model.hpp"
#include "tkgc/sampler.hpp"

namespace tkgc {

// Phi(x)_i = sqrt(1/d_t) * cos(omega_i * x + phase_i). x is the signed time
// difference t - t_q (or the absolute time under the absolute-time variant).
Vector phi(double x, std::span<const double> omega, std::span<const double> phase);
void phi_into(double x, std::span<const double> omega, std::span<const double> phase,
              std::span<double> out);

double activate(Activation act, double z);
// Derivative expressed through the pre-activation z and the output a.
double activate_grad(Activation act, double z, double a);

// An edge that must not enter the TNG of `target` (a training fact's own
// reciprocal edge).
struct ExcludedEdge {
  EntityId target = 0;
  IncomingEdge edge;
};

// Forward record of f(h_e || Phi(x)).
struct RepTape {
  EntityId entity = 0;
  double time_arg = 0.0;
  Vector time_code;  // Phi(x)
  Vector pre;        // affine output before the activation
  Vector out;
};

// Forward record of one TNG aggregation (or of the fallback when the TNG is empty).
struct NodeTape {
  EntityId center = 0;
  TimeIndex t_query = 0;
  bool fallback = false;
  RepTape self;  // fallback only
  std::vector<TemporalNeighbor> neighbors;
  std::vector<RepTape> reps;      // agg_steps == 1: one per neighbor
  std::vector<NodeTape> inner;    // agg_steps == 2: one-hop aggregate per neighbor
  Vector output;
};

// Sparse-row gradient buffer for the encoder path of a set of queries.
struct EncoderGrad {
  std::map<EntityId, Vector> entity_rows;
  std::map<RelationId, Vector> relation_rows;
  Matrix omega, phase, comb_w, comb_b, agg_w, agg_b;

  explicit EncoderGrad(const ModelParams& shape);
  void clear();
  // Adds this buffer into a dense gradient with the same shapes.
  void add_into(ModelParams& grad) const;
  std::span<double> entity_row(EntityId e, std::size_t dim);
  std::span<double> relation_row(RelationId r, std::size_t dim);
};

// Query encoder bound to a training graph, parameters and config.
// Forward passes are read-only and may run concurrently.
class Encoder {
 public:
  Encoder(const TemporalKG& kg, const ModelParams& params, const RunConfig& config);

  // Argument fed to Phi for a neighbor at `t` around query time `t_query`.
  [[nodiscard]] double time_arg(TimeIndex t, TimeIndex t_query) const;
  // Argument used for candidates and for the empty-neighborhood fallback.
  [[nodiscard]] double self_time_arg(TimeIndex t_query) const { return time_arg(t_query, t_query); }

  [[nodiscard]] RepTape time_aware_rep(EntityId e, double x) const;

  // Mean of agg_W (a_n || h_r) + agg_b over the sampled neighbors, where a_n is
  // the time-aware representation of each neighbor. Empty sample: fallback
  // f(h_s || Phi(self)).
  [[nodiscard]] NodeTape aggregate(const TngSample& sample) const;

  // Samples the TNG of (s, t_q) with the given seed and aggregates it;
  // agg_steps == 2 re-samples each neighbor's own TNG with derived seeds.
  [[nodiscard]] NodeTape encode_query(EntityId s, TimeIndex t_query, std::uint64_t seed,
                                      const std::optional<ExcludedEdge>& exclude = std::nullopt) const;

  void backward(const NodeTape& tape, std::span<const double> grad_out, EncoderGrad& grad) const;
  void backward_rep(const RepTape& tape, std::span<const double> grad_out, EncoderGrad& grad) const;

  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] const RunConfig& config() const { return config_; }
  [[nodiscard]] const TemporalKG& graph() const { return kg_; }

 private:
  [[nodiscard]] NodeTape encode_node(EntityId center, TimeIndex t_query, std::uint64_t seed,
                                     int depth, const std::optional<ExcludedEdge>& exclude) const;
  [[nodiscard]] NodeTape aggregate_with(const TngSample& sample, std::vector<NodeTape> inner) const;

  const TemporalKG& kg_;
  const ModelParams& params_;
  const RunConfig& config_;
};

}  // namespace tkgc
