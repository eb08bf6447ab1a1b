#pragma once

// Dense row-parallel kernels behind candidate scoring and its backward pass.
// `serial` is the reference implementation; `omp` parallelises over output
// rows with a static schedule, so each output element is produced by exactly
// one thread with the same summation order as the reference. Results are
// therefore bit-identical between the two.

#include <cstddef>
#include <span>

#include "tkgc/tensor.hpp"

namespace tkgc::kernels {

// Number of threads the omp kernels would use in the current scope.
int max_threads();

// Sets the OpenMP thread count for the lifetime of the guard.
class ThreadScope {
 public:
  explicit ThreadScope(int threads);
  ~ThreadScope();
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int previous_;
};

namespace serial {

// out[i][j] = sum_k x[i][k] * w[j][w_offset + k] for k < x.cols()
void project_rows(const Matrix& x, const Matrix& w, std::size_t w_offset, Matrix& out);
// out[i] = dot(m[i], v)
void matvec(const Matrix& m, std::span<const double> v, std::span<double> out);
// out[i][j] += sum_b a[b][i] * c[b][j]
void accumulate_outer(const Matrix& a, const Matrix& c, Matrix& out);
// out[j][out_offset + k] += sum_i a[i][j] * b[i][k]
void accumulate_at_b(const Matrix& a, const Matrix& b, Matrix& out, std::size_t out_offset);
// out[i][k] += sum_j a[i][j] * w[j][k] for k < out.cols()
void accumulate_a_w(const Matrix& a, const Matrix& w, Matrix& out);
// Candidates other than `target` and not marked in `skip` that score strictly
// above / exactly equal to scores[target].
void rank_counts(std::span<const double> scores, std::size_t target,
                 std::span<const unsigned char> skip, std::size_t& greater, std::size_t& ties);

}  // namespace serial

namespace omp {

void project_rows(const Matrix& x, const Matrix& w, std::size_t w_offset, Matrix& out);
void matvec(const Matrix& m, std::span<const double> v, std::span<double> out);
void accumulate_outer(const Matrix& a, const Matrix& c, Matrix& out);
void accumulate_at_b(const Matrix& a, const Matrix& b, Matrix& out, std::size_t out_offset);
void accumulate_a_w(const Matrix& a, const Matrix& w, Matrix& out);
void rank_counts(std::span<const double> scores, std::size_t target,
                 std::span<const unsigned char> skip, std::size_t& greater, std::size_t& ties);

}  // namespace omp

// Dispatch: the omp variant when threads > 1, otherwise the reference.
void project_rows(int threads, const Matrix& x, const Matrix& w, std::size_t w_offset, Matrix& out);
void matvec(int threads, const Matrix& m, std::span<const double> v, std::span<double> out);
void accumulate_outer(int threads, const Matrix& a, const Matrix& c, Matrix& out);
void accumulate_at_b(int threads, const Matrix& a, const Matrix& b, Matrix& out,
                     std::size_t out_offset);
void accumulate_a_w(int threads, const Matrix& a, const Matrix& w, Matrix& out);

}  // namespace tkgc::kernels
