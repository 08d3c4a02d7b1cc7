#pragma once

#include <cstddef>

// Dense double-precision inner loops used by every solver in this library.
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant; the active instruction set is picked once at startup and can be
// overridden for testing. Element-wise kernels produce identical values
// across variants (same per-element rounding sequence); reductions may
// differ by accumulation order.

namespace asmd::kernels {

enum class Isa { Scalar, Avx2 };

Isa active_isa() noexcept;
bool isa_supported(Isa isa) noexcept;
// Throws std::invalid_argument if the requested ISA is not supported here.
void force_isa(Isa isa);

// Reductions.
double dot(const double* a, const double* b, std::size_t n) noexcept;
double squared_norm(const double* a, std::size_t n) noexcept;
double sum(const double* a, std::size_t n) noexcept;
double l1_norm(const double* a, std::size_t n) noexcept;
double max_abs(const double* a, std::size_t n) noexcept;

// Element-wise.
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
// out = base + scale * dir
void step(double* out, const double* base, const double* dir, double scale,
          std::size_t n) noexcept;
// out = base + w * (a - b)
void diff_axpy(double* out, const double* base, const double* a,
               const double* b, double w, std::size_t n) noexcept;
// out = c1*x1 + c2*x2 + c3*x3
void combine3(double* out, double c1, const double* x1, double c2,
              const double* x2, double c3, const double* x3,
              std::size_t n) noexcept;
void scale_store(double* out, const double* x, double alpha,
                 std::size_t n) noexcept;
void add_inplace(double* y, const double* x, std::size_t n) noexcept;
void sub(double* out, const double* a, const double* b,
         std::size_t n) noexcept;
void div_scalar(double* x, double denom, std::size_t n) noexcept;
// out_i = sign(w_i) * max(|w_i| - tau, 0)
void soft_threshold(double* out, const double* w, double tau,
                    std::size_t n) noexcept;
void clamp(double* out, const double* w, const double* lo, const double* hi,
           std::size_t n) noexcept;

}  // namespace asmd::kernels
