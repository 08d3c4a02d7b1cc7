// AVX2 kernel variants. Compiled with -mavx2 only in this translation unit;
// callers reach it through the runtime dispatch table.
//
// Element-wise kernels perform exactly the scalar sequence of roundings
// (mul then add, no FMA), so they are bit-identical to the scalar table.
// Reductions use a 4-lane accumulator and differ from the scalar order.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "kernels_detail.hpp"

namespace asmd::kernels::detail {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double squared_norm_avx2(const double* a, std::size_t n) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, va));
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * a[i];
  return r;
}

double sum_avx2(const double* a, std::size_t n) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i];
  return r;
}

const __m256d kAbsMask =
    _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

double l1_norm_avx2(const double* a, std::size_t n) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_and_pd(_mm256_loadu_pd(a + i), kAbsMask);
    acc = _mm256_add_pd(acc, va);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += std::fabs(a[i]);
  return r;
}

double max_abs_avx2(const double* a, std::size_t n) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_and_pd(_mm256_loadu_pd(a + i), kAbsMask);
    acc = _mm256_max_pd(acc, va);
  }
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  double m = _mm_cvtsd_f64(_mm_max_sd(lo, sh));
  for (; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  const __m256d va = _mm256_set1_pd(alpha);
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void step_avx2(double* out, const double* base, const double* dir,
               double scale, std::size_t n) {
  std::size_t i = 0;
  const __m256d vs = _mm256_set1_pd(scale);
  for (; i + 4 <= n; i += 4) {
    __m256d vb = _mm256_loadu_pd(base + i);
    __m256d vd = _mm256_loadu_pd(dir + i);
    _mm256_storeu_pd(out + i, _mm256_add_pd(vb, _mm256_mul_pd(vs, vd)));
  }
  for (; i < n; ++i) out[i] = base[i] + scale * dir[i];
}

void diff_axpy_avx2(double* out, const double* base, const double* a,
                    const double* b, double w, std::size_t n) {
  std::size_t i = 0;
  const __m256d vw = _mm256_set1_pd(w);
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    __m256d vb = _mm256_loadu_pd(base + i);
    _mm256_storeu_pd(out + i, _mm256_add_pd(vb, _mm256_mul_pd(vw, d)));
  }
  for (; i < n; ++i) out[i] = base[i] + w * (a[i] - b[i]);
}

void combine3_avx2(double* out, double c1, const double* x1, double c2,
                   const double* x2, double c3, const double* x3,
                   std::size_t n) {
  std::size_t i = 0;
  const __m256d v1 = _mm256_set1_pd(c1);
  const __m256d v2 = _mm256_set1_pd(c2);
  const __m256d v3 = _mm256_set1_pd(c3);
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(v1, _mm256_loadu_pd(x1 + i));
    t = _mm256_add_pd(t, _mm256_mul_pd(v2, _mm256_loadu_pd(x2 + i)));
    t = _mm256_add_pd(t, _mm256_mul_pd(v3, _mm256_loadu_pd(x3 + i)));
    _mm256_storeu_pd(out + i, t);
  }
  for (; i < n; ++i) out[i] = c1 * x1[i] + c2 * x2[i] + c3 * x3[i];
}

void scale_store_avx2(double* out, const double* x, double alpha,
                      std::size_t n) {
  std::size_t i = 0;
  const __m256d va = _mm256_set1_pd(alpha);
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void add_inplace_avx2(double* y, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += x[i];
}

void sub_avx2(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void div_scalar_avx2(double* x, double denom, std::size_t n) {
  std::size_t i = 0;
  const __m256d vd = _mm256_set1_pd(denom);
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_div_pd(_mm256_loadu_pd(x + i), vd));
  for (; i < n; ++i) x[i] /= denom;
}

void soft_threshold_avx2(double* out, const double* w, double tau,
                         std::size_t n) {
  std::size_t i = 0;
  const __m256d vt = _mm256_set1_pd(tau);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d sign_mask =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000LL));
  for (; i + 4 <= n; i += 4) {
    __m256d vw = _mm256_loadu_pd(w + i);
    __m256d mag = _mm256_max_pd(_mm256_sub_pd(_mm256_and_pd(vw, kAbsMask), vt),
                                zero);
    _mm256_storeu_pd(out + i,
                     _mm256_or_pd(mag, _mm256_and_pd(vw, sign_mask)));
  }
  for (; i < n; ++i) {
    const double t = std::max(std::fabs(w[i]) - tau, 0.0);
    out[i] = std::copysign(t, w[i]);
  }
}

void clamp_avx2(double* out, const double* w, const double* lo,
                const double* hi, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_max_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(lo + i));
    v = _mm256_min_pd(v, _mm256_loadu_pd(hi + i));
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) out[i] = std::min(std::max(w[i], lo[i]), hi[i]);
}

}  // namespace

const Table& avx2_table() noexcept {
  static const Table t = {
      dot_avx2,          squared_norm_avx2, sum_avx2,
      l1_norm_avx2,      max_abs_avx2,      axpy_avx2,
      step_avx2,         diff_axpy_avx2,    combine3_avx2,
      scale_store_avx2,  add_inplace_avx2,  sub_avx2,
      div_scalar_avx2,   soft_threshold_avx2, clamp_avx2,
  };
  return t;
}

}  // namespace asmd::kernels::detail
