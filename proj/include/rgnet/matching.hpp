#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace rgnet {

// Row-major cost matrix: rows are predictions, columns are targets.
struct CostMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> values;

  double operator()(std::int64_t r, std::int64_t c) const { return values[static_cast<std::size_t>(r * cols + c)]; }
};

struct Assignment {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;  // (prediction, target), sorted by target
  std::vector<std::int64_t> unmatched_predictions;           // ascending
  double total_cost = 0.0;
};

// Exact minimum-cost assignment of every target to a distinct prediction
// (requires cols <= rows). O(cols^2 * rows) shortest augmenting paths with
// potentials. Throws NumericError on a non-finite cost and InvalidArgument
// when cols > rows.
Assignment hungarian_match(const CostMatrix& cost);

}  // namespace rgnet
