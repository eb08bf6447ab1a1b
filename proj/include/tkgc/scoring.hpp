#pragma once

#include <span>

#include "tkgc/config.hpp"
#include "tkgc/model.hpp"
#include "tkgc/tensor.hpp"

namespace tkgc {

// (h_s . h_r)^T h_o with . the elementwise product. Throws ValidationError on
// a dimension mismatch.
double distmult(std::span<const double> h_s, std::span<const double> h_r,
                std::span<const double> h_o);

// Re(<h_s, h_r, conj(h_o)>) with each vector split into real || imaginary
// halves. Throws ValidationError on odd or mismatched dimensions.
double complex_score(std::span<const double> h_s, std::span<const double> h_r,
                     std::span<const double> h_o);

double score(ScoreFn fn, std::span<const double> h_s, std::span<const double> h_r,
             std::span<const double> h_o);

// Both score functions are linear in the object: score = <q(h_s, h_r), h_o>.
// Candidate scoring is therefore one matrix-vector product per query.
Vector query_vector(ScoreFn fn, std::span<const double> h_s, std::span<const double> h_r);

// Accumulates d/dh_s and d/dh_r of <q(h_s, h_r), c> given dq = d loss / d q.
void query_vector_backward(ScoreFn fn, std::span<const double> h_s, std::span<const double> h_r,
                           std::span<const double> dq, std::span<double> dh_s,
                           std::span<double> dh_r);

// Zero-delta candidate representations f(h_o || Phi(x)) for every entity at a
// fixed Phi argument x (0 under time differences, t_q under absolute time).
// The entity projection is shared across arguments and computed once.
class CandidateTable {
 public:
  CandidateTable(const ModelParams& params, Activation activation, int threads = 1);

  // Recomputes the representations for argument x.
  void set_time_arg(double x);

  [[nodiscard]] double time_arg() const { return time_arg_; }
  [[nodiscard]] const Matrix& reps() const { return reps_; }
  [[nodiscard]] const Matrix& pre() const { return pre_; }
  [[nodiscard]] const Vector& time_code() const { return time_code_; }

  // scores[o] = <q, rep(o)>.
  void score(std::span<const double> q, std::span<double> scores) const;

 private:
  const ModelParams& params_;
  Activation activation_;
  int threads_;
  Matrix projected_;  // h_o projected through the entity block of the combiner
  Matrix pre_;
  Matrix reps_;
  Vector time_code_;
  double time_arg_ = 0.0;
};

// Scores every candidate object for an encoded subject.
Vector score_all_candidates(std::span<const double> h_sq, RelationId r_q, TimeIndex t_q,
                            const ModelParams& params, const RunConfig& config);

}  // namespace tkgc
