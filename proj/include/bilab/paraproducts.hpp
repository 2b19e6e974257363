#pragma once

// The bi-parameter paraproducts A_1..A_8, the one-parameter a^1_j, a^2_j,
// and the expansions of <bf, .> against Haar functions and averages.
//
// Same-cube products h_I^a h_I^b are evaluated pointwise and never paired
// back as cancellative functions.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "bilab/tables.hpp"

namespace bilab {

struct ParaproductModes {
  Factor b_first, b_second;
  Factor f_first, f_second;
};

/// Factor table of A_i: A_1 = sum Delta_{IxJ}b Delta_{IxJ}f, ..., A_8 = sum
/// Delta^1_I E^2_J b E^1_I Delta^2_J f. Throws std::invalid_argument for i outside 1..8.
ParaproductModes paraproduct_modes(int i);

/// sum over same-cube product rows: U^T X V with X(p,q) = Cb(.,.) Cf(.,.).
template <typename S>
GridFunction<S> product_sum(const FramePair& frames, const Mesh& mesh, const MatrixX<S>& cb, const MatrixX<S>& cf,
                            const ParaproductModes& m) {
  const ProductRows u = product_rows(frames.first, m.b_first, m.f_first);
  const ProductRows v = product_rows(frames.second, m.b_second, m.f_second);
  MatrixX<S> x(Index(u.left.size()), Index(v.left.size()));
  for (Index q = 0; q < x.cols(); ++q) {
    for (Index p = 0; p < x.rows(); ++p) x(p, q) = cb(u.left[p], v.left[q]) * cf(u.right[p], v.right[q]);
  }
  return GridFunction<S>(mesh, u.rows.transpose().template cast<S>() * x * v.rows.template cast<S>());
}

inline void check_frames(const FramePair& frames, const Mesh& mesh) {
  if (!(frames.first.side() == mesh.side(Axis::first)) || !(frames.second.side() == mesh.side(Axis::second)))
    throw MeshError("grids do not match the mesh");
}

/// A_i(b, f) on the grid pair of the frames.
template <typename B, typename S>
GridFunction<S> paraproduct_A(int i, const GridFunction<B>& b, const GridFunction<S>& f, const FramePair& frames) {
  const ParaproductModes m = paraproduct_modes(i);
  check_same(b.mesh(), f.mesh());
  check_frames(frames, f.mesh());
  const MatrixX<S> cb = haar_table(frames, b.template cast<S>());
  const MatrixX<S> cf = haar_table(frames, f);
  return product_sum(frames, f.mesh(), cb, cf, m);
}

template <typename B, typename S>
GridFunction<S> paraproduct_A(int i, const GridFunction<B>& b, const GridFunction<S>& f, const GridPair& grids) {
  return paraproduct_A(i, b, f, FramePair(grids));
}

/// a^axis_j(b, f) = sum_I Delta^axis_I b Delta^axis_I f (j = 1) or
/// sum_I Delta^axis_I b E^axis_I f (j = 2); the frame's side names the axis.
template <typename B, typename S>
GridFunction<S> paraproduct_a(int j, const GridFunction<B>& b, const GridFunction<S>& f, const HaarFrame& frame) {
  if (j != 1 && j != 2) throw std::invalid_argument("paraproduct_a: j must be 1 or 2");
  check_same(b.mesh(), f.mesh());
  const Axis axis = frame.side().axis;
  if (!(frame.side() == f.mesh().side(axis))) throw MeshError("grid does not match the mesh");
  const ProductRows u = product_rows(frame, Factor::delta, j == 1 ? Factor::delta : Factor::average);
  const Index np = Index(u.left.size());
  if (axis == Axis::first) {
    const MatrixX<S> bt = partial_table_first(frame, b.template cast<S>());
    const MatrixX<S> ft = partial_table_first(frame, f);
    MatrixX<S> x(np, bt.cols());
    for (Index p = 0; p < np; ++p) x.row(p) = bt.row(u.left[p]).cwiseProduct(ft.row(u.right[p]));
    return GridFunction<S>(f.mesh(), u.rows.transpose().template cast<S>() * x);
  }
  const MatrixX<S> bt = partial_table_second(frame, b.template cast<S>());
  const MatrixX<S> ft = partial_table_second(frame, f);
  MatrixX<S> x(bt.rows(), np);
  for (Index p = 0; p < np; ++p) x.col(p) = bt.col(u.left[p]).cwiseProduct(ft.col(u.right[p]));
  return GridFunction<S>(f.mesh(), x * u.rows.template cast<S>());
}

/// a^axis_j with axis given as 1 or 2.
template <typename B, typename S>
GridFunction<S> paraproduct_a(int j, int axis, const GridFunction<B>& b, const GridFunction<S>& f,
                              const FramePair& frames) {
  if (axis != 1 && axis != 2) throw std::invalid_argument("paraproduct_a: axis must be 1 or 2");
  return paraproduct_a(j, b, f, axis == 1 ? frames.first : frames.second);
}

template <typename B, typename S>
GridFunction<S> paraproduct_a(int j, const GridFunction<B>& b, const GridFunction<S>& f, const DyadicGrid& grid) {
  return paraproduct_a(j, b, f, HaarFrame(grid));
}

/// Which identity to expand <bf, phi> with.
///  biparameter  phi = h_I0 (x) h_J0, both cancellative
///  mixed_first  phi = h_I0 (x) 1_J0/|J0|
///  mixed_second phi = 1_I0/|I0| (x) h_J0
///  none         phi = 1_R/|R|
enum class Expansion { biparameter, mixed_first, mixed_second, none };

template <typename S>
struct Decomposition {
  S lhs{};
  std::vector<std::pair<std::string, S>> terms;
  S residual{};

  S total() const {
    S t{};
    for (const auto& kv : terms) t += kv.second;
    return t;
  }
  /// |residual| / (|lhs| + sum |terms|), zero when everything vanishes.
  double relative_residual() const {
    double scale = std::abs(lhs);
    for (const auto& kv : terms) scale += std::abs(kv.second);
    return scale > 0 ? std::abs(residual) / scale : 0.0;
  }
};

/// The test function phi of an expansion target.
RealFunction expansion_target(const Mesh& mesh, const HaarIndex& hI, const HaarIndex& hJ, Expansion mode);

/// Expand <bf, phi> at one target. Cancellative targets take the eta of hI,
/// hJ; for averaged sides only the cube is used.
template <typename S>
Decomposition<S> expand_product(const RealFunction& b, const GridFunction<S>& f, const FramePair& frames,
                                const HaarIndex& hI, const HaarIndex& hJ, Expansion mode) {
  check_same(b.mesh(), f.mesh());
  const Mesh& mesh = f.mesh();
  const GridFunction<S> phi = expansion_target(mesh, hI, hJ, mode).template cast<S>();
  const DyadicRectangle R{hI.cube, hJ.cube};
  const S bR = S(cube_average(b, R));
  Decomposition<S> d;
  d.lhs = pair(multiply(b, f), phi);
  switch (mode) {
    case Expansion::biparameter:
      for (int i = 1; i <= 8; ++i)
        d.terms.emplace_back("A" + std::to_string(i), pair(paraproduct_A(i, b, f, frames), phi));
      break;
    case Expansion::mixed_first:
    case Expansion::mixed_second: {
      const bool first = mode == Expansion::mixed_first;
      const HaarFrame& frame = first ? frames.first : frames.second;
      const std::string tag = first ? "a1_" : "a2_";
      for (int j = 1; j <= 2; ++j)
        d.terms.emplace_back(tag + std::to_string(j), pair(paraproduct_a(j, b, f, frame), phi));
      // <(<b>_{I0,axis} - <b>_R) <f, h_I0>_axis>_{J0}
      const HaarIndex& h = first ? hI : hJ;
      const DyadicCube& other = first ? hJ.cube : hI.cube;
      const SideFunction<double> bslice = cube_average(b, h.cube);
      const SideFunction<S> fslice = partial_pair(f, h);
      SideFunction<S> g(fslice.side, (bslice.values.array() - cube_average(b, R)).matrix().template cast<S>()
                                         .cwiseProduct(fslice.values));
      d.terms.emplace_back("slice", cube_average(g, other));
      break;
    }
    case Expansion::none: {
      RealFunction osc = b;
      osc.values().array() -= cube_average(b, R);
      d.terms.emplace_back("oscillation", cube_average(multiply(osc, f), R));
      break;
    }
  }
  d.terms.emplace_back("mean", bR * pair(f, phi));
  d.residual = d.lhs - d.total();
  return d;
}

/// Largest relative residual of an expansion over every admissible target
/// of the frames (all eta), computed from pairing tables.
template <typename S>
double max_expansion_residual(const RealFunction& b, const GridFunction<S>& f, const FramePair& frames,
                              Expansion mode);

/// The four blocks of 1_{I0 x J0} b: sum Delta_{I1xJ1} b, sum E^1_{I0} Delta^2_{J1} b,
/// sum Delta^1_{I1} E^2_{J0} b and E_{I0xJ0} b, over I1 in I0, J1 in J0.
std::array<RealFunction, 4> localized_blocks(const RealFunction& b, const DyadicCube& I0, const DyadicCube& J0);

}  // namespace bilab

#include "bilab/paraproducts_impl.hpp"
