#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asmd/problem.hpp"
#include "asmd/prox.hpp"
#include "asmd/vec.hpp"

namespace asmd {

/// Dense regression/classification dataset: N rows of D features plus one
/// label per row.
struct Dataset {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::vector<double> features;  // row-major, rows x dims
  std::vector<double> labels;
  std::string name;
  bool scaled = false;

  const double* row(std::size_t i) const { return features.data() + i * dims; }
};

struct SyntheticLasso {
  Dataset data;
  Vector x_true;
};

/// Rows uniform on [0, 10]^D; a {0,1}-valued target with exactly ceil(D/2)
/// ones at seeded-random positions; labels b_i = <a_i, x*> + eps with
/// eps ~ N(0, 0.01^2). Deterministic for a given seed.
SyntheticLasso generate_synthetic_lasso(std::size_t n, std::size_t d,
                                        std::uint64_t seed);

/// Text format: one sample per line, "<label> <index>:<value> ...",
/// 1-based ascending indices; absent indices are zero and D is the largest
/// index seen. Malformed lines raise std::runtime_error with a line number.
Dataset load_libsvm(const std::string& path);

/// Writes the same text format with 17 significant digits.
void save_libsvm(const Dataset& data, const std::string& path);

/// n = N squared-loss components (L_i = ||a_i||^2) with an l1 penalty;
/// lambda == 0 gives plain least squares. The problem borrows the dataset's
/// feature storage, which must outlive it.
FiniteSumProblem build_lasso_problem(const Dataset& data, double lambda);

/// Same smooth part with the overlapping-group penalty instead of l1.
FiniteSumProblem build_overlap_problem(const Dataset& data, double lambda,
                                       const OverlapGroups& groups);

/// Chain pattern {1,2,3}, {3,4,5}, {5,6,7}, ... (returned zero-based) with a
/// final possibly-shorter group so the union covers all of 1..D.
OverlapGroups chain_groups(std::size_t d);

}  // namespace asmd
