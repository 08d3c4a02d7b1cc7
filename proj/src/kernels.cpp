#include "asmd/kernels.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "kernels_detail.hpp"

namespace asmd::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double l1_norm_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i]);
  return acc;
}

double max_abs_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void step_scalar(double* out, const double* base, const double* dir,
                 double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + scale * dir[i];
}

void diff_axpy_scalar(double* out, const double* base, const double* a,
                      const double* b, double w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + w * (a[i] - b[i]);
}

void combine3_scalar(double* out, double c1, const double* x1, double c2,
                     const double* x2, double c3, const double* x3,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = c1 * x1[i] + c2 * x2[i] + c3 * x3[i];
}

void scale_store_scalar(double* out, const double* x, double alpha,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void add_inplace_scalar(double* y, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void sub_scalar(double* out, const double* a, const double* b,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void div_scalar_scalar(double* x, double denom, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] /= denom;
}

void soft_threshold_scalar(double* out, const double* w, double tau,
                           std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::max(std::fabs(w[i]) - tau, 0.0);
    out[i] = std::copysign(t, w[i]);
  }
}

void clamp_scalar(double* out, const double* w, const double* lo,
                  const double* hi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::min(std::max(w[i], lo[i]), hi[i]);
}

std::atomic<const detail::Table*> g_active{nullptr};

const detail::Table* pick_default() noexcept {
#if defined(ASMD_HAVE_AVX2_TU)
  if (isa_supported(Isa::Avx2)) return &detail::avx2_table();
#endif
  return &detail::scalar_table();
}

const detail::Table* active() noexcept {
  const detail::Table* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = pick_default();
    g_active.store(t, std::memory_order_release);
  }
  return t;
}

}  // namespace

namespace detail {
const Table& scalar_table() noexcept {
  static const Table t = {
      dot_scalar,          squared_norm_scalar, sum_scalar,
      l1_norm_scalar,      max_abs_scalar,      axpy_scalar,
      step_scalar,         diff_axpy_scalar,    combine3_scalar,
      scale_store_scalar,  add_inplace_scalar,  sub_scalar,
      div_scalar_scalar,   soft_threshold_scalar, clamp_scalar,
  };
  return t;
}
}  // namespace detail

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(ASMD_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept {
#if defined(ASMD_HAVE_AVX2_TU)
  return active() == &detail::avx2_table() ? Isa::Avx2 : Isa::Scalar;
#else
  (void)active();
  return Isa::Scalar;
#endif
}

void force_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument("unsupported ISA");
  switch (isa) {
    case Isa::Scalar:
      g_active.store(&detail::scalar_table(), std::memory_order_release);
      break;
    case Isa::Avx2:
#if defined(ASMD_HAVE_AVX2_TU)
      g_active.store(&detail::avx2_table(), std::memory_order_release);
#endif
      break;
  }
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  return active()->dot(a, b, n);
}
double squared_norm(const double* a, std::size_t n) noexcept {
  return active()->squared_norm(a, n);
}
double sum(const double* a, std::size_t n) noexcept {
  return active()->sum(a, n);
}
double l1_norm(const double* a, std::size_t n) noexcept {
  return active()->l1_norm(a, n);
}
double max_abs(const double* a, std::size_t n) noexcept {
  return active()->max_abs(a, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  active()->axpy(alpha, x, y, n);
}
void step(double* out, const double* base, const double* dir, double scale,
          std::size_t n) noexcept {
  active()->step(out, base, dir, scale, n);
}
void diff_axpy(double* out, const double* base, const double* a,
               const double* b, double w, std::size_t n) noexcept {
  active()->diff_axpy(out, base, a, b, w, n);
}
void combine3(double* out, double c1, const double* x1, double c2,
              const double* x2, double c3, const double* x3,
              std::size_t n) noexcept {
  active()->combine3(out, c1, x1, c2, x2, c3, x3, n);
}
void scale_store(double* out, const double* x, double alpha,
                 std::size_t n) noexcept {
  active()->scale_store(out, x, alpha, n);
}
void add_inplace(double* y, const double* x, std::size_t n) noexcept {
  active()->add_inplace(y, x, n);
}
void sub(double* out, const double* a, const double* b,
         std::size_t n) noexcept {
  active()->sub(out, a, b, n);
}
void div_scalar(double* x, double denom, std::size_t n) noexcept {
  active()->div_scalar(x, denom, n);
}
void soft_threshold(double* out, const double* w, double tau,
                    std::size_t n) noexcept {
  active()->soft_threshold(out, w, tau, n);
}
void clamp(double* out, const double* w, const double* lo, const double* hi,
           std::size_t n) noexcept {
  active()->clamp(out, w, lo, hi, n);
}

}  // namespace asmd::kernels
