#include "asmd/data_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "asmd/rng.hpp"

namespace asmd {

SyntheticLasso generate_synthetic_lasso(std::size_t n, std::size_t d,
                                        std::uint64_t seed) {
  if (n < 1 || d < 1)
    throw std::invalid_argument("synthetic dataset needs N, D >= 1");
  SplitMix64 rng(seed);
  SyntheticLasso out;
  out.data.rows = n;
  out.data.dims = d;
  out.data.name = "synthetic";
  out.data.features.resize(n * d);
  for (double& f : out.data.features) f = rng.uniform(0.0, 10.0);

  // Exactly ceil(D/2) ones at random positions (partial Fisher-Yates).
  const std::size_t ones = (d + 1) / 2;
  std::vector<std::size_t> perm(d);
  for (std::size_t i = 0; i < d; ++i) perm[i] = i;
  for (std::size_t i = 0; i < ones; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(
                rng.next_below(static_cast<std::uint64_t>(d - i)));
    std::swap(perm[i], perm[j]);
  }
  out.x_true.assign(d, 0.0);
  for (std::size_t i = 0; i < ones; ++i) out.x_true[perm[i]] = 1.0;

  out.data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double clean =
        kernels::dot(out.data.row(i), out.x_true.data(), d);
    out.data.labels[i] = clean + rng.gaussian(0.0, 0.01);
  }
  return out;
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  struct Entry {
    std::size_t index;
    double value;
  };
  std::vector<std::vector<Entry>> rows;
  std::vector<double> labels;
  std::size_t max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Skip blank lines but still count them for diagnostics.
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::istringstream ls(line);
    double label;
    if (!(ls >> label))
      throw std::runtime_error("malformed label at line " +
                               std::to_string(line_no) + " of " + path);
    std::vector<Entry> row;
    std::string tok;
    std::size_t prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw std::runtime_error("malformed feature '" + tok + "' at line " +
                                 std::to_string(line_no) + " of " + path);
      std::size_t index;
      double value;
      try {
        std::size_t used = 0;
        index = std::stoull(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(tok);
        value = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw std::runtime_error("malformed feature '" + tok + "' at line " +
                                 std::to_string(line_no) + " of " + path);
      }
      if (index == 0 || index <= prev_index)
        throw std::runtime_error(
            "indices must be 1-based and ascending at line " +
            std::to_string(line_no) + " of " + path);
      prev_index = index;
      max_index = std::max(max_index, index);
      row.push_back({index, value});
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw std::runtime_error("dataset file has no samples: " + path);

  Dataset data;
  data.rows = rows.size();
  data.dims = max_index;
  data.name = path;
  data.labels = std::move(labels);
  data.features.assign(data.rows * data.dims, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& e : rows[i])
      data.features[i * data.dims + (e.index - 1)] = e.value;
  return data;
}

void save_libsvm(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  char buf[64];
  for (std::size_t i = 0; i < data.rows; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", data.labels[i]);
    out << buf;
    const double* row = data.row(i);
    for (std::size_t j = 0; j < data.dims; ++j) {
      if (row[j] == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
      out << ' ' << (j + 1) << ':' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing dataset file: " + path);
}

namespace {

std::vector<std::shared_ptr<const Component>> squared_loss_components(
    const Dataset& data) {
  std::vector<std::shared_ptr<const Component>> components;
  components.reserve(data.rows);
  for (std::size_t i = 0; i < data.rows; ++i)
    components.push_back(std::make_shared<SquaredLossComponent>(
        data.row(i), data.dims, data.labels[i]));
  return components;
}

}  // namespace

FiniteSumProblem build_lasso_problem(const Dataset& data, double lambda) {
  std::shared_ptr<const Regularizer> reg;
  if (lambda == 0.0) reg = std::make_shared<ZeroRegularizer>();
  else reg = std::make_shared<L1Regularizer>(lambda);
  return FiniteSumProblem(squared_loss_components(data), std::move(reg),
                          data.dims);
}

FiniteSumProblem build_overlap_problem(const Dataset& data, double lambda,
                                       const OverlapGroups& groups) {
  return FiniteSumProblem(
      squared_loss_components(data),
      std::make_shared<OverlapGroupRegularizer>(lambda, groups), data.dims);
}

OverlapGroups chain_groups(std::size_t d) {
  if (d < 1) throw std::invalid_argument("need D >= 1");
  std::vector<std::vector<std::size_t>> groups;
  std::size_t start = 0;  // zero-based
  while (true) {
    std::vector<std::size_t> g;
    for (std::size_t j = start; j < std::min(start + 3, d); ++j)
      g.push_back(j);
    groups.push_back(std::move(g));
    if (start + 3 >= d) break;
    start += 2;
  }
  return OverlapGroups(std::move(groups));
}

}  // namespace asmd
