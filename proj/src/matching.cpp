#include "rgnet/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rgnet/errors.hpp"

namespace rgnet {

Assignment hungarian_match(const CostMatrix& cost) {
  const std::int64_t n_pred = cost.rows;
  const std::int64_t n_tgt = cost.cols;
  if (static_cast<std::int64_t>(cost.values.size()) != n_pred * n_tgt) {
    throw InvalidArgument("cost matrix payload does not match its shape");
  }
  if (n_tgt > n_pred) {
    throw InvalidArgument("more targets (" + std::to_string(n_tgt) + ") than predictions (" + std::to_string(n_pred) +
                          ")");
  }
  for (double v : cost.values) {
    if (!std::isfinite(v)) throw NumericError("non-finite entry in matching cost matrix");
  }

  // Targets play the role of "workers" (n <= m), predictions are "jobs".
  // Arrays are 1-based; index 0 is the virtual source column.
  const auto n = static_cast<std::size_t>(n_tgt);
  const auto m = static_cast<std::size_t>(n_pred);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  auto c = [&](std::size_t target, std::size_t pred) {
    return cost(static_cast<std::int64_t>(pred - 1), static_cast<std::int64_t>(target - 1));
  };

  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = c(i0, j) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  for (std::size_t j = 1; j <= m; ++j) {
    const auto pred = static_cast<std::int64_t>(j - 1);
    if (owner[j] == 0) {
      out.unmatched_predictions.push_back(pred);
    } else {
      const auto tgt = static_cast<std::int64_t>(owner[j] - 1);
      out.pairs.emplace_back(pred, tgt);
      out.total_cost += cost(pred, tgt);
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  return out;
}

}  // namespace rgnet
