#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "gblend/kernels.hpp"

namespace gblend {
namespace {

KernelIsa detect_default() {
  if (const char* env = std::getenv("GBLEND_ISA")) {
    if (std::string(env) == "scalar") return KernelIsa::Scalar;
  }
  return avx2_available() ? KernelIsa::Avx2 : KernelIsa::Scalar;
}

std::atomic<KernelIsa>& isa_slot() {
  static std::atomic<KernelIsa> slot{detect_default()};
  return slot;
}

}  // namespace

std::string_view to_string(KernelIsa isa) {
  switch (isa) {
    case KernelIsa::Scalar: return "scalar";
    case KernelIsa::Avx2: return "avx2";
  }
  return "unknown";
}

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

KernelIsa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void set_active_isa(KernelIsa isa) {
  if (isa == KernelIsa::Avx2 && !avx2_available())
    throw std::runtime_error("AVX2 kernel requested but the CPU does not support AVX2+FMA");
  isa_slot().store(isa, std::memory_order_relaxed);
}

void composite_samples(std::span<const SampleSplat> splats, std::span<const double> xs,
                       std::span<const double> ys, const CompositeParams& params,
                       SampleOutputs out) {
  if (ys.size() != xs.size() || out.r.size() != xs.size() || out.g.size() != xs.size() ||
      out.b.size() != xs.size() || out.t.size() != xs.size())
    throw std::invalid_argument("composite_samples: span sizes differ");
  if (active_isa() == KernelIsa::Avx2)
    kernels::composite_samples_avx2(splats, xs, ys, params, out);
  else
    kernels::composite_samples_scalar(splats, xs, ys, params, out);
}

}  // namespace gblend
