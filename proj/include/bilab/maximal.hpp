#pragma once

// Maximal functions, square functions and the auxiliary operators phi and
// Phi. Everything here is real valued and acts on |f|.
//
// "Non-dyadic" means the supremum over every mesh-aligned cube (or product of
// cubes) of the torus, wrapped ones included, so it dominates the maximal
// function of every shifted dyadic grid.

#include <cstdint>
#include <vector>

#include "bilab/haar_frame.hpp"
#include "bilab/signal.hpp"

namespace bilab {

/// Cell -> label of the level-`level` cube of the grid containing it.
std::vector<int> cube_labels(const DyadicGrid& grid, int level);

/// E at a level of the grid along its axis (identity at the finest level).
template <typename S>
GridFunction<S> level_expectation(const GridFunction<S>& f, const DyadicGrid& grid, int level) {
  const Axis axis = grid.side().axis;
  if (!(f.mesh().side(axis) == grid.side())) throw MeshError("grid does not match the mesh");
  if (level == grid.levels()) return f;
  const std::vector<int> lab = cube_labels(grid, level);
  const double per_cube = double(grid.side().cells()) / grid.count(level);
  const Index n = Index(lab.size());
  MatrixX<S> out(f.values().rows(), f.values().cols());
  if (axis == Axis::first) {
    MatrixX<S> sums = MatrixX<S>::Zero(grid.count(level), f.values().cols());
    for (Index c = 0; c < n; ++c) sums.row(lab[c]) += f.values().row(c);
    for (Index c = 0; c < n; ++c) out.row(c) = sums.row(lab[c]) / per_cube;
  } else {
    MatrixX<S> sums = MatrixX<S>::Zero(f.values().rows(), grid.count(level));
    for (Index c = 0; c < n; ++c) sums.col(lab[c]) += f.values().col(c);
    for (Index c = 0; c < n; ++c) out.col(c) = sums.col(lab[c]) / per_cube;
  }
  return GridFunction<S>(f.mesh(), std::move(out));
}

// ---- maximal functions ----

/// M_D u on one side: sup over the cubes of the grid containing the cell.
SideFunction<double> maximal(const SideFunction<double>& u, const DyadicGrid& grid);
/// Non-dyadic M u on one side.
SideFunction<double> maximal(const SideFunction<double>& u);

enum class MaximalMode {
  strong,                  // M_{D^n, D^m} over rectangles of the grid pair
  partial_first,           // M^1 over the first grid, x_2 frozen
  partial_second,          // M^2
  nondyadic_strong,        // every mesh-aligned rectangle
  nondyadic_partial_first,
  nondyadic_partial_second,
};

/// Grid-function maximal operators. Non-dyadic modes ignore the grids.
RealFunction maximal(const RealFunction& f, MaximalMode mode, const GridPair& grids);
RealFunction maximal(const RealFunction& f, MaximalMode mode);

/// M_b f(x) = sup_{Q containing x} <|b - <b>_Q| |f|>_Q over every mesh-aligned
/// cube of the side.
SideFunction<double> adapted_maximal(const SideFunction<double>& b, const SideFunction<double>& f);
/// Bi-parameter version over every mesh-aligned rectangle. Brute force,
/// O(N^2) rectangles times their area; meant for L <= 5 with n = m = 1.
RealFunction adapted_maximal(const RealFunction& b, const RealFunction& f);

// ---- square functions ----

enum class SquareMode {
  biparameter,  // (sum_{I,J} |Delta_{IxJ} f|^2)^{1/2}
  first,        // (sum_I |Delta^1_I f|^2)^{1/2}
  second,
};

RealFunction square_function(const RealFunction& f, const GridPair& grids, SquareMode mode);

/// S~_omega u = (sum_V |<u, h_{V+omega}>|^2 1_V/|V|)^{1/2}: coefficients in the
/// shifted grid, indicators of the standard cube with the same label.
SideFunction<double> shifted_square_function(const SideFunction<double>& u, const DyadicGrid& shifted);
/// The same in one variable of a grid function (S~^2 when the grid is on axis 2).
RealFunction shifted_square_function(const RealFunction& f, const DyadicGrid& shifted);

// ---- phi operators ----

/// phi^axis f = sum_I h_I (x) M<f, h_I>_axis, M non-dyadic in the other variable.
RealFunction phi_sharp(const RealFunction& f, const DyadicGrid& grid);
/// phi^axis_b f = sum_J M_{<b>_{J,axis}} <f, h_J>_axis (x) h_J.
RealFunction phi_adapted(const RealFunction& b, const RealFunction& f, const DyadicGrid& grid);

/// (sum_V (M<f, h_{V+omega}>_axis)^2 (x) 1_V/|V|)^{1/2}, M non-dyadic in the other variable.
RealFunction shifted_maximal_square(const RealFunction& f, const DyadicGrid& shifted);

/// Seeded source of random shifts for omega-expectations. exact = true
/// enumerates every shift of the side instead.
struct ShiftSampler {
  std::uint64_t seed = 0;
  int count = 64;
  bool exact = false;

  /// Throws std::invalid_argument when count < 1 and not exact.
  std::vector<GridShift> shifts(const Side& side) const;
};

enum class AuxKind {
  phi1_partial,  // E_w2 M^1 S~^2_w2 (phi^2_{w2,b} f)
  phi2_partial,  // (sum_K E_w1 (M^1 Delta^1_{K+w1,l} phi^1_w1 f)^2)^{1/2}
  phi1_full,     // E_w2 (sum_V (M<f,h_{V+w2}>_2)^2 (x) 1_V/|V|)^{1/2}
  phi2_full,     // E_w1 (sum_K 1_K/|K| (x) (M<a^1_i(b,f),h_{K+w1}>_1)^2)^{1/2}
};

struct AuxParams {
  const RealFunction* b = nullptr;  // phi1_partial, phi2_full
  int l = 0;                        // phi2_partial
  int i = 1;                        // phi2_full
};

RealFunction aux_phi(const RealFunction& f, AuxKind kind, const AuxParams& params, const ShiftSampler& sampler);

}  // namespace bilab
