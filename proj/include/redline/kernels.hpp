#ifndef REDLINE_KERNELS_HPP_
#define REDLINE_KERNELS_HPP_

#include <cstddef>
#include <string>

namespace redline::kernels {

// Double-precision inner-loop kernels used by the policy network and the
// optimizer. A scalar reference implementation always exists; an AVX2 variant
// is selected at runtime when the CPU supports it. Both variants satisfy the
// same contracts and are equivalence-tested against each other.
struct Ops {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + b, W row-major (rows x cols), b may be null
  void (*matvec)(const double* w, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols);
  // dx += W^T dy, W row-major (rows x cols)
  void (*matvec_t_acc)(const double* w, const double* dy, double* dx,
                       std::size_t rows, std::size_t cols);
  // dW += dy x^T (rank-1 accumulate), dW row-major (rows x cols)
  void (*ger_acc)(const double* dy, const double* x, double* dw,
                  std::size_t rows, std::size_t cols);
  // fused Adam update over n parameters:
  //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g*g
  //   p -= lr * (m/c1) / (sqrt(v/c2) + eps)
  // where c1, c2 are the bias corrections 1-b1^t, 1-b2^t.
  void (*adam_step)(double* p, const double* g, double* m, double* v,
                    std::size_t n, double lr, double b1, double b2, double eps,
                    double c1, double c2);
};

enum class Backend { Auto, Scalar, Avx2 };

const Ops& scalar_ops();
bool avx2_available();   // compiled in and supported by this CPU
const Ops& avx2_ops();   // falls back to scalar_ops() when unavailable

// Active table. Auto-detected on first use; force_backend overrides
// (Backend::Avx2 on a CPU without AVX2 silently stays scalar).
const Ops& ops();
void force_backend(Backend backend);
std::string backend_name();

}  // namespace redline::kernels

#endif  // REDLINE_KERNELS_HPP_
