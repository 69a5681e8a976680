#include <cmath>
#include <vector>

#include "doctest.h"
#include "redline/kernels.hpp"
#include "redline/rng.hpp"

using namespace redline;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar dot and axpy match hand values") {
  const auto& k = kernels::scalar_ops();
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, -5.0, 6.0};
  CHECK(k.dot(a, b, 3) == doctest::Approx(12.0).epsilon(1e-15));

  double y[] = {1.0, 1.0, 1.0};
  k.axpy(2.0, a, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 5.0);
  CHECK(y[2] == 7.0);
}

TEST_CASE("scalar matvec with and without bias") {
  const auto& k = kernels::scalar_ops();
  // W = [[1, 2], [3, 4], [5, 6]], x = [1, -1]
  const double w[] = {1, 2, 3, 4, 5, 6};
  const double x[] = {1, -1};
  const double bias[] = {10, 20, 30};
  double y[3];
  k.matvec(w, x, bias, y, 3, 2);
  CHECK(y[0] == 9.0);
  CHECK(y[1] == 19.0);
  CHECK(y[2] == 29.0);
  k.matvec(w, x, nullptr, y, 3, 2);
  CHECK(y[0] == -1.0);
  CHECK(y[1] == -1.0);
  CHECK(y[2] == -1.0);
}

TEST_CASE("scalar transpose-matvec and rank-1 update accumulate") {
  const auto& k = kernels::scalar_ops();
  const double w[] = {1, 2, 3, 4};  // [[1,2],[3,4]]
  const double dy[] = {1, 10};
  double dx[] = {100, 100};
  k.matvec_t_acc(w, dy, dx, 2, 2);
  // dx += W^T dy = [1*1 + 3*10, 2*1 + 4*10]
  CHECK(dx[0] == 131.0);
  CHECK(dx[1] == 142.0);

  const double col[] = {2, 3};
  double dw[] = {0, 0, 0, 0};
  k.ger_acc(dy, col, dw, 2, 2);
  CHECK(dw[0] == 2.0);
  CHECK(dw[1] == 3.0);
  CHECK(dw[2] == 20.0);
  CHECK(dw[3] == 30.0);
}

TEST_CASE("scalar adam step matches the closed form") {
  const auto& k = kernels::scalar_ops();
  double p = 1.0;
  double g = 0.5;
  double m = 0.0;
  double v = 0.0;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.1;
  const double c1 = 1.0 - b1, c2 = 1.0 - b2;  // t = 1
  k.adam_step(&p, &g, &m, &v, 1, lr, b1, b2, eps, c1, c2);
  CHECK(m == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(v == doctest::Approx(0.00025).epsilon(1e-12));
  // bias-corrected m/c1 = 0.5, sqrt(v/c2) = 0.5
  CHECK(p == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + eps)).epsilon(1e-12));
}

TEST_CASE("avx2 variants agree with scalar on awkward sizes") {
  if (!kernels::avx2_available()) {
    MESSAGE("AVX2 not available on this host; equivalence not exercised");
    return;
  }
  const auto& s = kernels::scalar_ops();
  const auto& a = kernels::avx2_ops();
  Rng rng(42);

  // 1..9 covers sub-width, exact-width, and remainder lanes; 64 the hot size.
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{3},
                        std::size_t{4}, std::size_t{5}, std::size_t{7},
                        std::size_t{8}, std::size_t{9}, std::size_t{64},
                        std::size_t{67}}) {
    CAPTURE(n);
    const std::vector<double> x = random_vec(rng, n);
    const std::vector<double> y = random_vec(rng, n);
    CHECK(a.dot(x.data(), y.data(), n) ==
          doctest::Approx(s.dot(x.data(), y.data(), n)).epsilon(1e-13));

    std::vector<double> y1 = y;
    std::vector<double> y2 = y;
    s.axpy(1.7, x.data(), y1.data(), n);
    a.axpy(1.7, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-13));
    }
  }

  for (std::size_t rows : {std::size_t{1}, std::size_t{3}, std::size_t{8}}) {
    for (std::size_t cols :
         {std::size_t{1}, std::size_t{5}, std::size_t{8}, std::size_t{13}}) {
      CAPTURE(rows);
      CAPTURE(cols);
      const std::vector<double> w = random_vec(rng, rows * cols);
      const std::vector<double> x = random_vec(rng, cols);
      const std::vector<double> bias = random_vec(rng, rows);
      std::vector<double> y1(rows), y2(rows);
      s.matvec(w.data(), x.data(), bias.data(), y1.data(), rows, cols);
      a.matvec(w.data(), x.data(), bias.data(), y2.data(), rows, cols);
      for (std::size_t i = 0; i < rows; ++i) {
        CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-13));
      }

      const std::vector<double> dy = random_vec(rng, rows);
      std::vector<double> dx1 = random_vec(rng, cols);
      std::vector<double> dx2 = dx1;
      s.matvec_t_acc(w.data(), dy.data(), dx1.data(), rows, cols);
      a.matvec_t_acc(w.data(), dy.data(), dx2.data(), rows, cols);
      for (std::size_t i = 0; i < cols; ++i) {
        CHECK(dx2[i] == doctest::Approx(dx1[i]).epsilon(1e-13));
      }

      std::vector<double> dw1 = random_vec(rng, rows * cols);
      std::vector<double> dw2 = dw1;
      s.ger_acc(dy.data(), x.data(), dw1.data(), rows, cols);
      a.ger_acc(dy.data(), x.data(), dw2.data(), rows, cols);
      for (std::size_t i = 0; i < rows * cols; ++i) {
        CHECK(dw2[i] == doctest::Approx(dw1[i]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("avx2 adam step is bitwise equal to scalar") {
  if (!kernels::avx2_available()) return;
  const auto& s = kernels::scalar_ops();
  const auto& a = kernels::avx2_ops();
  Rng rng(7);
  const std::size_t n = 11;  // two full lanes plus a remainder
  const std::vector<double> g = random_vec(rng, n);
  std::vector<double> p1 = random_vec(rng, n);
  std::vector<double> p2 = p1;
  std::vector<double> m1(n, 0.0), m2(n, 0.0), v1(n, 0.0), v2(n, 0.0);
  for (int t = 1; t <= 3; ++t) {
    const double c1 = 1.0 - std::pow(0.9, t);
    const double c2 = 1.0 - std::pow(0.999, t);
    s.adam_step(p1.data(), g.data(), m1.data(), v1.data(), n, 3e-4, 0.9,
                0.999, 1e-8, c1, c2);
    a.adam_step(p2.data(), g.data(), m2.data(), v2.data(), n, 3e-4, 0.9,
                0.999, 1e-8, c1, c2);
  }
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(p2[i] == p1[i]);
    CHECK(m2[i] == m1[i]);
    CHECK(v2[i] == v1[i]);
  }
}

TEST_CASE("backend dispatch honours forcing and falls back cleanly") {
  kernels::force_backend(kernels::Backend::Scalar);
  CHECK(kernels::backend_name() == "scalar");
  CHECK(&kernels::ops() == &kernels::scalar_ops());

  kernels::force_backend(kernels::Backend::Avx2);
  if (kernels::avx2_available()) {
    CHECK(kernels::backend_name() == "avx2");
    CHECK(&kernels::ops() == &kernels::avx2_ops());
  } else {
    CHECK(kernels::backend_name() == "scalar");
  }

  kernels::force_backend(kernels::Backend::Auto);
  const std::string name = kernels::backend_name();
  CHECK(name == (kernels::avx2_available() ? "avx2" : "scalar"));
}

}  // TEST_SUITE
