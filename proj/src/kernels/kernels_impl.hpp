#pragma once

#include "fluxreg/kernels.hpp"

namespace fluxreg::kernels::scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void xpby(const double* x, double b, double* y, std::size_t n);
void stencil9(const Stencil9& s, const double* x, double* y, std::size_t begin, std::size_t end);
void psi_reduced_batch(double theta, std::size_t n, std::size_t m, const double* lambda,
                       const double* eta, double* out);
}  // namespace fluxreg::kernels::scalar

namespace fluxreg::kernels::avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void xpby(const double* x, double b, double* y, std::size_t n);
void stencil9(const Stencil9& s, const double* x, double* y, std::size_t begin, std::size_t end);
void psi_reduced_batch(double theta, std::size_t n, std::size_t m, const double* lambda,
                       const double* eta, double* out);
}  // namespace fluxreg::kernels::avx2
