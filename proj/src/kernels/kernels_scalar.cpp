// Scalar reference kernels. These define the semantics the SIMD variants are
// tested against; keep them simple and obviously correct.

#include <cmath>
#include <cstddef>

#include "redline/kernels.hpp"

namespace redline::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_scalar(const double* w, const double* x, const double* b,
                   double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b ? b[r] : 0.0;
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void matvec_t_acc_scalar(const double* w, const double* dy, double* dx,
                         std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    const double d = dy[r];
    for (std::size_t c = 0; c < cols; ++c) dx[c] += d * row[c];
  }
}

void ger_acc_scalar(const double* dy, const double* x, double* dw,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = dw + r * cols;
    const double d = dy[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += d * x[c];
  }
}

void adam_step_scalar(double* p, const double* g, double* m, double* v,
                      std::size_t n, double lr, double b1, double b2,
                      double eps, double c1, double c2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table{dot_scalar,       axpy_scalar,    matvec_scalar,
                         matvec_t_acc_scalar, ger_acc_scalar, adam_step_scalar};
  return table;
}

}  // namespace redline::kernels
