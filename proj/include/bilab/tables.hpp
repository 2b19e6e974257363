#pragma once

// Haar pairing tables of grid functions against frames, and the pointwise
// products h_I^a h_I^b that paraproducts are built from.

#include <vector>

#include "bilab/haar_frame.hpp"
#include "bilab/signal.hpp"

namespace bilab {

/// C(e1, e2) = <f, h_e1 (x) h_e2> over all frame elements of both sides.
template <typename S>
MatrixX<S> haar_table(const FramePair& frames, const GridFunction<S>& f) {
  return frames.first.analysis().template cast<S>() * f.values() *
         frames.second.analysis().transpose().template cast<S>();
}

/// Row e is <f, h_e>_1 as a function of x_2 (elements x second-side cells).
template <typename S>
MatrixX<S> partial_table_first(const HaarFrame& frame, const GridFunction<S>& f) {
  return frame.analysis().template cast<S>() * f.values();
}

/// Column e is <f, h_e>_2 as a function of x_1 (first-side cells x elements).
template <typename S>
MatrixX<S> partial_table_second(const HaarFrame& frame, const GridFunction<S>& f) {
  return f.values() * frame.analysis().transpose().template cast<S>();
}

/// The inverse of haar_table for coefficient matrices over frame elements.
template <typename S>
GridFunction<S> synthesize_table(const FramePair& frames, const Mesh& mesh, const MatrixX<S>& c) {
  return GridFunction<S>(mesh, frames.first.values().transpose().template cast<S>() * c *
                                   frames.second.values().template cast<S>());
}

/// Which projection a factor carries on one axis: Delta (all cancellative
/// eta) or E (the h^0 element).
enum class Factor { delta, average };

/// Same-cube element pairs (e_b, e_f) with their pointwise products as rows.
/// Cubes range over levels where every requested factor exists.
struct ProductRows {
  std::vector<Index> left;
  std::vector<Index> right;
  std::vector<Index> level;
  Eigen::MatrixXd rows;  // pairs x side cells
};

ProductRows product_rows(const HaarFrame& frame, Factor a, Factor b);

/// Elements of a cube carrying the given factor.
std::vector<Index> factor_elements(const HaarFrame& frame, int level, int label, Factor f);

}  // namespace bilab
