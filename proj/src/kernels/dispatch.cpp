// Runtime backend selection for the kernel table.

#include <atomic>

#include "redline/kernels.hpp"

namespace redline::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops_impl();  // defined in kernels_avx2.cpp
#endif

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops& avx2_ops() {
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_available()) return avx2_ops_impl();
#endif
  return scalar_ops();
}

namespace {
std::atomic<const Ops*> g_active{nullptr};
std::atomic<bool> g_is_avx2{false};

const Ops* detect() {
  if (avx2_available()) {
    g_is_avx2.store(true, std::memory_order_relaxed);
    return &avx2_ops();
  }
  g_is_avx2.store(false, std::memory_order_relaxed);
  return &scalar_ops();
}
}  // namespace

const Ops& ops() {
  const Ops* p = g_active.load(std::memory_order_acquire);
  if (!p) {
    p = detect();
    g_active.store(p, std::memory_order_release);
  }
  return *p;
}

void force_backend(Backend backend) {
  switch (backend) {
    case Backend::Auto:
      g_active.store(detect(), std::memory_order_release);
      break;
    case Backend::Scalar:
      g_is_avx2.store(false, std::memory_order_relaxed);
      g_active.store(&scalar_ops(), std::memory_order_release);
      break;
    case Backend::Avx2:
      g_is_avx2.store(avx2_available(), std::memory_order_relaxed);
      g_active.store(&avx2_ops(), std::memory_order_release);
      break;
  }
}

std::string backend_name() {
  ops();  // force detection
  return g_is_avx2.load(std::memory_order_relaxed) ? "avx2" : "scalar";
}

}  // namespace redline::kernels
