#include "mbo/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mbo {

namespace {

// `before(a, b)` is a strict total order on cell indices, so nth_element
// yields a unique, schedule-independent split.
template <class Before>
SelectionResult select(const RealField& scores, std::size_t target, Before before) {
  const std::size_t n = scores.values.size();
  if (target > n) throw std::out_of_range("select cells: target exceeds cell count");
  for (double v : scores.values) {
    if (std::isnan(v)) throw std::invalid_argument("select cells: NaN score");
  }
  SelectionResult result{std::nullopt, PhaseField(scores.grid), target};
  if (target == 0) return result;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto cut = order.begin() + static_cast<std::ptrdiff_t>(target - 1);
  std::nth_element(order.begin(), cut, order.end(), before);
  for (auto it = order.begin(); it != cut + 1; ++it) result.mask.mask[*it] = 1;
  result.lambda = scores.values[*cut];
  return result;
}

}  // namespace

SelectionResult select_top_cells(const RealField& scores, std::size_t target_cells) {
  const auto& s = scores.values;
  return select(scores, target_cells, [&](std::size_t a, std::size_t b) {
    return s[a] > s[b] || (s[a] == s[b] && a < b);
  });
}

SelectionResult select_bottom_cells(const RealField& scores, std::size_t target_cells) {
  const auto& s = scores.values;
  return select(scores, target_cells, [&](std::size_t a, std::size_t b) {
    return s[a] < s[b] || (s[a] == s[b] && a < b);
  });
}

}  // namespace mbo
