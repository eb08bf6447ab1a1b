#include "tkgc/encoder.hpp"

#include <cmath>

#include "tkgc/rng.hpp"

namespace tkgc {

void phi_into(double x, std::span<const double> omega, std::span<const double> phase,
              std::span<double> out) {
  const double scale = std::sqrt(1.0 / static_cast<double>(omega.size()));
  for (std::size_t i = 0; i < omega.size(); ++i) out[i] = scale * std::cos(omega[i] * x + phase[i]);
}

Vector phi(double x, std::span<const double> omega, std::span<const double> phase) {
  if (omega.size() != phase.size()) throw ValidationError("phi: omega/phase size mismatch");
  Vector out(omega.size());
  phi_into(x, omega, phase, out);
  return out;
}

double activate(Activation act, double z) {
  return act == Activation::kTanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

double activate_grad(Activation act, double z, double a) {
  return act == Activation::kTanh ? 1.0 - a * a : (z > 0.0 ? 1.0 : 0.0);
}

EncoderGrad::EncoderGrad(const ModelParams& shape)
    : omega(shape.omega.rows(), shape.omega.cols()),
      phase(shape.phase.rows(), shape.phase.cols()),
      comb_w(shape.comb_w.rows(), shape.comb_w.cols()),
      comb_b(shape.comb_b.rows(), shape.comb_b.cols()),
      agg_w(shape.agg_w.rows(), shape.agg_w.cols()),
      agg_b(shape.agg_b.rows(), shape.agg_b.cols()) {}

void EncoderGrad::clear() {
  entity_rows.clear();
  relation_rows.clear();
  for (Matrix* m : {&omega, &phase, &comb_w, &comb_b, &agg_w, &agg_b}) m->fill(0.0);
}

void EncoderGrad::add_into(ModelParams& grad) const {
  for (const auto& [e, row] : entity_rows) axpy(1.0, row, grad.entity.row(static_cast<std::size_t>(e)));
  for (const auto& [r, row] : relation_rows) {
    axpy(1.0, row, grad.relation.row(static_cast<std::size_t>(r)));
  }
  axpy(1.0, omega.flat(), grad.omega.flat());
  axpy(1.0, phase.flat(), grad.phase.flat());
  axpy(1.0, comb_w.flat(), grad.comb_w.flat());
  axpy(1.0, comb_b.flat(), grad.comb_b.flat());
  axpy(1.0, agg_w.flat(), grad.agg_w.flat());
  axpy(1.0, agg_b.flat(), grad.agg_b.flat());
}

std::span<double> EncoderGrad::entity_row(EntityId e, std::size_t dim) {
  auto [it, inserted] = entity_rows.try_emplace(e);
  if (inserted) it->second.assign(dim, 0.0);
  return it->second;
}

std::span<double> EncoderGrad::relation_row(RelationId r, std::size_t dim) {
  auto [it, inserted] = relation_rows.try_emplace(r);
  if (inserted) it->second.assign(dim, 0.0);
  return it->second;
}

Encoder::Encoder(const TemporalKG& kg, const ModelParams& params, const RunConfig& config)
    : kg_(kg), params_(params), config_(config) {}

double Encoder::time_arg(TimeIndex t, TimeIndex t_query) const {
  if (config_.time_encoder_variant == TimeEncoderVariant::kAbsolute) return static_cast<double>(t);
  return static_cast<double>(t - t_query);
}

RepTape Encoder::time_aware_rep(EntityId e, double x) const {
  const std::size_t de = params_.entity_dim();
  const std::size_t dt = params_.time_dim();
  const std::size_t dh = params_.hidden_dim();
  RepTape tape;
  tape.entity = e;
  tape.time_arg = x;
  tape.time_code = phi(x, params_.omega.flat(), params_.phase.flat());
  tape.pre.resize(dh);
  tape.out.resize(dh);
  const auto h = params_.entity.row(static_cast<std::size_t>(e));
  for (std::size_t j = 0; j < dh; ++j) {
    // Same association as CandidateTable: (W_e h) + (b + W_t Phi).
    const auto w = params_.comb_w.row(j);
    double entity_part = 0.0;
    for (std::size_t k = 0; k < de; ++k) entity_part += w[k] * h[k];
    double time_part = params_.comb_b(0, j);
    for (std::size_t k = 0; k < dt; ++k) time_part += w[de + k] * tape.time_code[k];
    tape.pre[j] = entity_part + time_part;
    tape.out[j] = activate(config_.activation, tape.pre[j]);
  }
  return tape;
}

NodeTape Encoder::aggregate_with(const TngSample& sample, std::vector<NodeTape> inner) const {
  NodeTape tape;
  tape.center = sample.center;
  tape.t_query = sample.t_query;
  const std::size_t dh = params_.hidden_dim();
  if (sample.neighbors.empty()) {
    tape.fallback = true;
    tape.self = time_aware_rep(sample.center, self_time_arg(sample.t_query));
    tape.output = tape.self.out;
    return tape;
  }
  tape.neighbors = sample.neighbors;
  tape.inner = std::move(inner);
  const bool nested = !tape.inner.empty();
  if (!nested) {
    tape.reps.reserve(tape.neighbors.size());
    for (const TemporalNeighbor& n : tape.neighbors) {
      tape.reps.push_back(time_aware_rep(n.e, time_arg(n.t, sample.t_query)));
    }
  }
  const double inv = 1.0 / static_cast<double>(tape.neighbors.size());
  tape.output.assign(dh, 0.0);
  Vector message(dh);
  for (std::size_t i = 0; i < tape.neighbors.size(); ++i) {
    const Vector& a = nested ? tape.inner[i].output : tape.reps[i].out;
    const auto hr = params_.relation.row(static_cast<std::size_t>(tape.neighbors[i].r));
    for (std::size_t j = 0; j < dh; ++j) {
      const auto w = params_.agg_w.row(j);
      double acc = params_.agg_b(0, j);
      for (std::size_t k = 0; k < dh; ++k) acc += w[k] * a[k];
      for (std::size_t k = 0; k < hr.size(); ++k) acc += w[dh + k] * hr[k];
      message[j] = acc;
    }
    axpy(inv, message, tape.output);
  }
  return tape;
}

NodeTape Encoder::aggregate(const TngSample& sample) const { return aggregate_with(sample, {}); }

NodeTape Encoder::encode_node(EntityId center, TimeIndex t_query, std::uint64_t seed, int depth,
                              const std::optional<ExcludedEdge>& exclude) const {
  Rng rng(seed);
  std::optional<IncomingEdge> hidden;
  if (exclude && exclude->target == center) hidden = exclude->edge;
  const TngSample sample =
      sample_tng(kg_, center, t_query, config_.sampler_options(), rng, hidden);
  std::vector<NodeTape> inner;
  if (depth > 1 && !sample.neighbors.empty()) {
    inner.reserve(sample.neighbors.size());
    for (std::size_t i = 0; i < sample.neighbors.size(); ++i) {
      const TemporalNeighbor& n = sample.neighbors[i];
      inner.push_back(encode_node(n.e, n.t, derive_seed(seed, {i + 1}), depth - 1, exclude));
    }
  }
  return aggregate_with(sample, std::move(inner));
}

NodeTape Encoder::encode_query(EntityId s, TimeIndex t_query, std::uint64_t seed,
                               const std::optional<ExcludedEdge>& exclude) const {
  return encode_node(s, t_query, seed, config_.agg_steps, exclude);
}

void Encoder::backward_rep(const RepTape& tape, std::span<const double> grad_out,
                           EncoderGrad& grad) const {
  const std::size_t de = params_.entity_dim();
  const std::size_t dt = params_.time_dim();
  const std::size_t dh = params_.hidden_dim();
  const auto h = params_.entity.row(static_cast<std::size_t>(tape.entity));
  auto dh_e = grad.entity_row(tape.entity, de);
  Vector dcode(dt, 0.0);
  for (std::size_t j = 0; j < dh; ++j) {
    const double dz = grad_out[j] * activate_grad(config_.activation, tape.pre[j], tape.out[j]);
    if (dz == 0.0) continue;
    grad.comb_b(0, j) += dz;
    auto gw = grad.comb_w.row(j);
    const auto w = params_.comb_w.row(j);
    for (std::size_t k = 0; k < de; ++k) {
      gw[k] += dz * h[k];
      dh_e[k] += dz * w[k];
    }
    for (std::size_t k = 0; k < dt; ++k) {
      gw[de + k] += dz * tape.time_code[k];
      dcode[k] += dz * w[de + k];
    }
  }
  const double scale = std::sqrt(1.0 / static_cast<double>(dt));
  for (std::size_t k = 0; k < dt; ++k) {
    const double dphase = -dcode[k] * scale *
                          std::sin(params_.omega(0, k) * tape.time_arg + params_.phase(0, k));
    grad.phase(0, k) += dphase;
    grad.omega(0, k) += dphase * tape.time_arg;
  }
}

void Encoder::backward(const NodeTape& tape, std::span<const double> grad_out,
                       EncoderGrad& grad) const {
  if (tape.fallback) {
    backward_rep(tape.self, grad_out, grad);
    return;
  }
  const std::size_t dh = params_.hidden_dim();
  const std::size_t dr = params_.relation.cols();
  const double inv = 1.0 / static_cast<double>(tape.neighbors.size());
  const bool nested = !tape.inner.empty();
  Vector dmsg(dh);
  for (std::size_t j = 0; j < dh; ++j) dmsg[j] = grad_out[j] * inv;

  Vector da(dh);
  for (std::size_t i = 0; i < tape.neighbors.size(); ++i) {
    const Vector& a = nested ? tape.inner[i].output : tape.reps[i].out;
    const RelationId r = tape.neighbors[i].r;
    const auto hr = params_.relation.row(static_cast<std::size_t>(r));
    auto dhr = grad.relation_row(r, dr);
    std::fill(da.begin(), da.end(), 0.0);
    for (std::size_t j = 0; j < dh; ++j) {
      const double g = dmsg[j];
      if (g == 0.0) continue;
      grad.agg_b(0, j) += g;
      auto gw = grad.agg_w.row(j);
      const auto w = params_.agg_w.row(j);
      for (std::size_t k = 0; k < dh; ++k) {
        gw[k] += g * a[k];
        da[k] += g * w[k];
      }
      for (std::size_t k = 0; k < dr; ++k) {
        gw[dh + k] += g * hr[k];
        dhr[k] += g * w[dh + k];
      }
    }
    if (nested) {
      backward(tape.inner[i], da, grad);
    } else {
      backward_rep(tape.reps[i], da, grad);
    }
  }
}

}  // namespace tkgc
