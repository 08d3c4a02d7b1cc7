#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "asmd/kernels.hpp"

namespace asmd {

using Vector = std::vector<double>;

inline void check_same_dim(const Vector& a, const Vector& b,
                           const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string("dimension mismatch in ") + what);
}

inline double dot(const Vector& a, const Vector& b) {
  check_same_dim(a, b, "dot");
  return kernels::dot(a.data(), b.data(), a.size());
}

inline double squared_norm(const Vector& a) {
  return kernels::squared_norm(a.data(), a.size());
}

inline double norm(const Vector& a) { return std::sqrt(squared_norm(a)); }

inline double l1_norm(const Vector& a) {
  return kernels::l1_norm(a.data(), a.size());
}

inline double max_abs(const Vector& a) {
  return kernels::max_abs(a.data(), a.size());
}

inline bool all_finite(const Vector& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline double distance(const Vector& a, const Vector& b) {
  check_same_dim(a, b, "distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace asmd
