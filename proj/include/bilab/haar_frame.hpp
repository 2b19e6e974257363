#pragma once

// The Haar system of one (shifted) dyadic grid as a dense frame.
//
// Elements are all pairs (cube, eta) of the grid: every cube at levels 0..L
// with the averaging function h^0, plus the 2^d - 1 cancellative functions of
// every cube above the finest level. Rows of values() are the functions on
// mesh cells; rows of analysis() are the same scaled by the cell volume, so
// analysis() * v is the vector of pairings <v, h>.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "bilab/dyadic.hpp"

namespace bilab {

class HaarFrame {
 public:
  struct Element {
    int level;
    int label;
    int eta;
  };

  explicit HaarFrame(const DyadicGrid& grid);

  const DyadicGrid& grid() const { return grid_; }
  const Side& side() const { return grid_.side(); }
  Index size() const { return Index(elements_.size()); }

  /// Element number of (level, label, eta); -1 if that function does not exist.
  Index element(int level, int label, int eta) const;
  Index average(int level, int label) const { return element(level, label, 0); }
  const Element& info(Index e) const { return elements_[e]; }
  DyadicCube cube_of(Index e) const { return grid_.cube(elements_[e].level, elements_[e].label); }
  HaarIndex haar_of(Index e) const { return HaarIndex{cube_of(e), elements_[e].eta}; }
  double volume_of(Index e) const { return std::ldexp(1.0, -elements_[e].level * side().dim); }

  /// Number of eta patterns (2^d).
  int patterns() const { return 1 << side().dim; }
  /// Cancellative elements of one cube (empty at the finest level).
  std::vector<Index> cancellative(int level, int label) const;
  /// Orthonormal basis: the top average followed by every cancellative element.
  const std::vector<Index>& basis() const { return basis_; }
  /// Cancellative elements of every cube, level-major.
  const std::vector<Index>& cancellative_elements() const { return cancellative_; }

  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::MatrixXd& analysis() const { return analysis_; }

 private:
  DyadicGrid grid_;
  std::vector<Element> elements_;
  std::vector<Index> level_base_;
  std::vector<Index> basis_;
  std::vector<Index> cancellative_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd analysis_;
};

/// Frames for both sides of a grid pair.
struct FramePair {
  HaarFrame first;
  HaarFrame second;

  explicit FramePair(const GridPair& g) : first(g.first), second(g.second) {}
  const HaarFrame& on(Axis a) const { return a == Axis::first ? first : second; }
  GridPair grids() const { return GridPair(first.grid(), second.grid()); }
};

}  // namespace bilab
