#include <atomic>
#include <cstdlib>
#include <string>

#include "fluxreg/error.hpp"
#include "kernels_impl.hpp"

namespace fluxreg::kernels {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, &scalar::dot, &scalar::axpy, &scalar::xpby,
                              &scalar::stencil9, &scalar::psi_reduced_batch};
constexpr KernelTable kAvx2{Isa::Avx2, &avx2::dot, &avx2::axpy, &avx2::xpby, &avx2::stencil9,
                            &avx2::psi_reduced_batch};

Isa detect() {
  if (const char* env = std::getenv("FLUXREG_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && cpu_supports(Isa::Avx2)) return Isa::Avx2;
  }
  return cpu_supports(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table_ptr{&table(detect())};
  return table_ptr;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool cpu_supports(Isa isa) noexcept {
  if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table(Isa isa) {
  if (isa == Isa::Avx2) {
    if (!cpu_supports(Isa::Avx2)) throw Error(ErrorCode::InvalidArgument, "CPU lacks AVX2/FMA");
    return kAvx2;
  }
  return kScalar;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

Isa active_isa() { return active().isa; }

void force_isa(Isa isa) { current().store(&table(isa), std::memory_order_release); }

}  // namespace fluxreg::kernels
