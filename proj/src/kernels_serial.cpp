#include "tkgc/kernels.hpp"

namespace tkgc::kernels::serial {

void project_rows(const Matrix& x, const Matrix& w, std::size_t w_offset, Matrix& out) {
  const std::size_t n = x.cols();
  for (std::size_t i = 0; i < x.rows(); ++i) {
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
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* mi = m.data() + i * m.cols();
    double acc = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k) acc += mi[k] * v[k];
    out[i] = acc;
  }
}

void accumulate_outer(const Matrix& a, const Matrix& c, Matrix& out) {
  for (std::size_t i = 0; i < out.rows(); ++i) {
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
  for (std::size_t j = 0; j < a.cols(); ++j) {
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
  for (std::size_t i = 0; i < a.rows(); ++i) {
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
  greater = 0;
  ties = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == target || skip[i]) continue;
    greater += scores[i] > ref;
    ties += scores[i] == ref;
  }
}

}  // namespace tkgc::kernels::serial
