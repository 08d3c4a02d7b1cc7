#pragma once

#include <cstddef>

namespace asmd::kernels::detail {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*l1_norm)(const double*, std::size_t);
  double (*max_abs)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*step)(double*, const double*, const double*, double, std::size_t);
  void (*diff_axpy)(double*, const double*, const double*, const double*,
                    double, std::size_t);
  void (*combine3)(double*, double, const double*, double, const double*,
                   double, const double*, std::size_t);
  void (*scale_store)(double*, const double*, double, std::size_t);
  void (*add_inplace)(double*, const double*, std::size_t);
  void (*sub)(double*, const double*, const double*, std::size_t);
  void (*div_scalar)(double*, double, std::size_t);
  void (*soft_threshold)(double*, const double*, double, std::size_t);
  void (*clamp)(double*, const double*, const double*, const double*,
                std::size_t);
};

const Table& scalar_table() noexcept;
#if defined(ASMD_HAVE_AVX2_TU)
const Table& avx2_table() noexcept;
#endif

}  // namespace asmd::kernels::detail
