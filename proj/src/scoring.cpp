#include "tkgc/scoring.hpp"

#include <string>

#include "tkgc/encoder.hpp"
#include "tkgc/kernels.hpp"

namespace tkgc {
namespace {

void check_same_size(std::span<const double> a, std::span<const double> b,
                     std::span<const double> c, const char* what) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                          ", " + std::to_string(b.size()) + ", " + std::to_string(c.size()) + ")");
  }
}

}  // namespace

double distmult(std::span<const double> h_s, std::span<const double> h_r,
                std::span<const double> h_o) {
  check_same_size(h_s, h_r, h_o, "distmult");
  double acc = 0.0;
  for (std::size_t i = 0; i < h_s.size(); ++i) acc += h_s[i] * h_r[i] * h_o[i];
  return acc;
}

double complex_score(std::span<const double> h_s, std::span<const double> h_r,
                     std::span<const double> h_o) {
  check_same_size(h_s, h_r, h_o, "complex_score");
  if (h_s.size() % 2 != 0) throw ValidationError("complex_score: odd dimension");
  const std::size_t n = h_s.size() / 2;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sr = h_s[i], si = h_s[n + i];
    const double rr = h_r[i], ri = h_r[n + i];
    const double orr = h_o[i], oi = h_o[n + i];
    acc += (sr * rr - si * ri) * orr + (sr * ri + si * rr) * oi;
  }
  return acc;
}

double score(ScoreFn fn, std::span<const double> h_s, std::span<const double> h_r,
             std::span<const double> h_o) {
  return fn == ScoreFn::kDistmult ? distmult(h_s, h_r, h_o) : complex_score(h_s, h_r, h_o);
}

Vector query_vector(ScoreFn fn, std::span<const double> h_s, std::span<const double> h_r) {
  Vector q(h_s.size());
  if (fn == ScoreFn::kDistmult) {
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = h_s[i] * h_r[i];
    return q;
  }
  const std::size_t n = q.size() / 2;
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = h_s[i] * h_r[i] - h_s[n + i] * h_r[n + i];
    q[n + i] = h_s[i] * h_r[n + i] + h_s[n + i] * h_r[i];
  }
  return q;
}

void query_vector_backward(ScoreFn fn, std::span<const double> h_s, std::span<const double> h_r,
                           std::span<const double> dq, std::span<double> dh_s,
                           std::span<double> dh_r) {
  if (fn == ScoreFn::kDistmult) {
    for (std::size_t i = 0; i < dq.size(); ++i) {
      dh_s[i] += dq[i] * h_r[i];
      dh_r[i] += dq[i] * h_s[i];
    }
    return;
  }
  const std::size_t n = dq.size() / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double gre = dq[i], gim = dq[n + i];
    dh_s[i] += gre * h_r[i] + gim * h_r[n + i];
    dh_s[n + i] += -gre * h_r[n + i] + gim * h_r[i];
    dh_r[i] += gre * h_s[i] + gim * h_s[n + i];
    dh_r[n + i] += -gre * h_s[n + i] + gim * h_s[i];
  }
}

CandidateTable::CandidateTable(const ModelParams& params, Activation activation, int threads)
    : params_(params),
      activation_(activation),
      threads_(threads),
      projected_(params.entity.rows(), params.hidden_dim()),
      pre_(params.entity.rows(), params.hidden_dim()),
      reps_(params.entity.rows(), params.hidden_dim()) {
  kernels::project_rows(threads_, params_.entity, params_.comb_w, 0, projected_);
  set_time_arg(0.0);
}

void CandidateTable::set_time_arg(double x) {
  time_arg_ = x;
  time_code_ = phi(x, params_.omega.flat(), params_.phase.flat());
  const std::size_t de = params_.entity_dim();
  const std::size_t dh = params_.hidden_dim();
  Vector offset(dh);
  for (std::size_t j = 0; j < dh; ++j) {
    const auto w = params_.comb_w.row(j);
    double acc = params_.comb_b(0, j);
    for (std::size_t k = 0; k < time_code_.size(); ++k) acc += w[de + k] * time_code_[k];
    offset[j] = acc;
  }
  const auto rows = static_cast<std::int64_t>(projected_.rows());
#pragma omp parallel for schedule(static) if (threads_ > 1)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto src = projected_.row(i);
    auto z = pre_.row(i);
    auto a = reps_.row(i);
    for (std::size_t j = 0; j < dh; ++j) {
      z[j] = src[j] + offset[j];
      a[j] = activate(activation_, z[j]);
    }
  }
}

void CandidateTable::score(std::span<const double> q, std::span<double> scores) const {
  kernels::matvec(threads_, reps_, q, scores);
}

Vector score_all_candidates(std::span<const double> h_sq, RelationId r_q, TimeIndex t_q,
                            const ModelParams& params, const RunConfig& config) {
  CandidateTable table(params, config.activation, 1);
  const double x = config.time_encoder_variant == TimeEncoderVariant::kAbsolute
                       ? static_cast<double>(t_q)
                       : 0.0;
  if (x != 0.0) table.set_time_arg(x);
  const Vector q = query_vector(config.score_fn, h_sq, params.relation.row(static_cast<std::size_t>(r_q)));
  Vector scores(params.entity.rows());
  table.score(q, scores);
  return scores;
}

}  // namespace tkgc
