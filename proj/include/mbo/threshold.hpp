#pragma once

#include <cstddef>
#include <optional>

#include "mbo/grid.hpp"

namespace mbo {

/// Order-statistic threshold selection with exact cell count.
///
/// Cells are ranked by score, ties broken by ascending row-major index, and
/// the first `target_cells` of that ranking are selected. `lambda` is the
/// score of the last selected cell; it is empty when nothing is selected.
struct SelectionResult {
  std::optional<double> lambda;
  PhaseField mask;
  std::size_t target_cells = 0;
};

/// Selects the target_cells largest scores.
SelectionResult select_top_cells(const RealField& scores, std::size_t target_cells);

/// Selects the target_cells smallest scores.
SelectionResult select_bottom_cells(const RealField& scores, std::size_t target_cells);

}  // namespace mbo
