#pragma once

#include "koopbrs/polytope.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace koopbrs {

/// Transition triples (x, u, x+), one per row of X, U and Xp.
struct Dataset {
  Mat X;
  Mat U;
  Mat Xp;

  /// Set for grid-sampled data: the (x, u) box the grid covers and its spacings.
  std::optional<Box> grid_box;
  std::optional<Vec> grid_spacing;
  std::optional<std::uint64_t> seed;

  Dataset() = default;
  Dataset(Mat X, Mat U, Mat Xp);

  int size() const { return static_cast<int>(X.rows()); }
  int state_dim() const { return static_cast<int>(X.cols()); }
  int input_dim() const { return static_cast<int>(U.cols()); }
  /// Stacked [X U], one (x, u) pair per row.
  Mat xu() const;
  /// Rows in the given order; sampling metadata is dropped.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// CSV with header x1..xn,u1..um,xp1..xpn.
void write_csv(const Dataset& D, std::ostream& out);
Dataset read_csv(std::istream& in);

}  // namespace koopbrs
