#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and an AVX2
// variant; the variant is chosen once at first use from the CPU features and
// can be overridden with FLUXREG_ISA=scalar|avx2 or force_isa().

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace fluxreg::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

/// 9-point stencil in structure-of-arrays form. coeff[(dy+1)*3 + (dx+1)][i]
/// multiplies x[i + dy*stride + dx].
struct Stencil9 {
  std::ptrdiff_t stride = 0;
  std::array<const double*, 9> coeff{};
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);  // y += a x
  void (*xpby)(const double* x, double b, double* y, std::size_t n);  // y = x + b y
  void (*stencil9)(const Stencil9& s, const double* x, double* y, std::size_t begin,
                   std::size_t end);
  // lambda and eta are n x m, component-major: lambda[k*m + s].
  void (*psi_reduced_batch)(double theta, std::size_t n, std::size_t m, const double* lambda,
                            const double* eta, double* out);
};

bool cpu_supports(Isa isa) noexcept;
const KernelTable& table(Isa isa);
const KernelTable& active();
Isa active_isa();
/// Throws InvalidArgument if the CPU lacks the requested ISA.
void force_isa(Isa isa);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void xpby(std::span<const double> x, double b, std::span<double> y) {
  active().xpby(x.data(), b, y.data(), x.size());
}

}  // namespace fluxreg::kernels
