#include "tkgc/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tkgc::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

ThreadScope::ThreadScope(int threads) : previous_(max_threads()) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

ThreadScope::~ThreadScope() {
#ifdef _OPENMP
  omp_set_num_threads(previous_);
#endif
}

namespace omp {

void project_rows(const Matrix& x, const Matrix& w, std::size_t w_offset, Matrix& out) {
  const auto rows = static_cast<std::int64_t>(x.rows());
  const std::size_t n = x.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* xi = x.data() + i * n;
    double* oi = out.data() + i * out.cols();
    for (std::size_t j = 0; j < w.rows(); ++j) {
      const double* wj = w.data() + j * w.cols() + w_offset;
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += xi[k] * wj[k];
      oi[j] = acc;
    }
  }
}

void matvec(const Matrix& m, std::span<const double> v, std::span<double> out) {
  const auto rows = static_cast<std::int64_t>(m.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* mi = m.data() + i * m.cols();
    double acc = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k) acc += mi[k] * v[k];
    out[i] = acc;
  }
}

void accumulate_outer(const Matrix& a, const Matrix& c, Matrix& out) {
  const auto rows = static_cast<std::int64_t>(out.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double* oi = out.data() + i * out.cols();
    for (std::size_t b = 0; b < a.rows(); ++b) {
      const double s = a(b, i);
      if (s == 0.0) continue;
      const double* cb = c.data() + b * c.cols();
      for (std::size_t j = 0; j < out.cols(); ++j) oi[j] += s * cb[j];
    }
  }
}

void accumulate_at_b(const Matrix& a, const Matrix& b, Matrix& out, std::size_t out_offset) {
  const auto cols = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t jj = 0; jj < cols; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    double* oj = out.data() + j * out.cols() + out_offset;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double s = a(i, j);
      if (s == 0.0) continue;
      const double* bi = b.data() + i * b.cols();
      for (std::size_t k = 0; k < b.cols(); ++k) oj[k] += s * bi[k];
    }
  }
}

void accumulate_a_w(const Matrix& a, const Matrix& w, Matrix& out) {
  const auto rows = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double* oi = out.data() + i * out.cols();
    const double* ai = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double s = ai[j];
      if (s == 0.0) continue;
      const double* wj = w.data() + j * w.cols();
      for (std::size_t k = 0; k < out.cols(); ++k) oi[k] += s * wj[k];
    }
  }
}

void rank_counts(std::span<const double> scores, std::size_t target,
                 std::span<const unsigned char> skip, std::size_t& greater, std::size_t& ties) {
  const double ref = scores[target];
  std::size_t g = 0;
  std::size_t t = 0;
  const auto n = static_cast<std::int64_t>(scores.size());
#pragma omp parallel for schedule(static) reduction(+ : g, t)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    if (i == target || skip[i]) continue;
    g += scores[i] > ref;
    t += scores[i] == ref;
  }
  greater = g;
  ties = t;
}

}  // namespace omp

void project_rows(int threads, const Matrix& x, const Matrix& w, std::size_t w_offset, Matrix& out) {
  threads > 1 ? omp::project_rows(x, w, w_offset, out) : serial::project_rows(x, w, w_offset, out);
}

void matvec(int threads, const Matrix& m, std::span<const double> v, std::span<double> out) {
  threads > 1 ? omp::matvec(m, v, out) : serial::matvec(m, v, out);
}

void accumulate_outer(int threads, const Matrix& a, const Matrix& c, Matrix& out) {
  threads > 1 ? omp::accumulate_outer(a, c, out) : serial::accumulate_outer(a, c, out);
}

void accumulate_at_b(int threads, const Matrix& a, const Matrix& b, Matrix& out,
                     std::size_t out_offset) {
  threads > 1 ? omp::accumulate_at_b(a, b, out, out_offset)
              : serial::accumulate_at_b(a, b, out, out_offset);
}

void accumulate_a_w(int threads, const Matrix& a, const Matrix& w, Matrix& out) {
  threads > 1 ? omp::accumulate_a_w(a, w, out) : serial::accumulate_a_w(a, w, out);
}

}  // namespace tkgc::kernels
