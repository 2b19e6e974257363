#include "bilab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "bilab/paraproducts.hpp"
#include "windows.hpp"

namespace bilab {

using namespace windows;

std::vector<int> cube_labels(const DyadicGrid& grid, int level) {
  const Index n = grid.side().cells();
  std::vector<int> lab(n);
  for (Index c = 0; c < n; ++c) lab[c] = grid.label(grid.cube_containing(c, level));
  return lab;
}

SideFunction<double> maximal(const SideFunction<double>& u, const DyadicGrid& grid) {
  if (!(u.side == grid.side())) throw MeshError("grid does not match the side");
  SideFunction<double> out(u.side);
  const Eigen::VectorXd a = u.values.cwiseAbs();
  for (int level = 0; level <= grid.levels(); ++level) {
    const std::vector<int> lab = cube_labels(grid, level);
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(grid.count(level));
    for (Index c = 0; c < a.size(); ++c) sums[lab[c]] += a[c];
    sums /= double(a.size()) / grid.count(level);
    for (Index c = 0; c < a.size(); ++c) out.values[c] = std::max(out.values[c], sums[lab[c]]);
  }
  return out;
}

SideFunction<double> maximal(const SideFunction<double>& u) {
  const Box box = box_of(u.side);
  const std::vector<double> r = window_maximal(u.values.data(), box, {range(0, u.side.dim)});
  SideFunction<double> out(u.side);
  out.values = Eigen::Map<const Eigen::VectorXd>(r.data(), Index(r.size()));
  return out;
}

RealFunction maximal(const RealFunction& f, MaximalMode mode) {
  const Mesh& mesh = f.mesh();
  const Box box = box_of(mesh);
  std::vector<std::vector<int>> groups;
  switch (mode) {
    case MaximalMode::nondyadic_strong: groups = {range(0, mesh.n), range(mesh.n, mesh.m)}; break;
    case MaximalMode::nondyadic_partial_first: groups = {range(0, mesh.n)}; break;
    case MaximalMode::nondyadic_partial_second: groups = {range(mesh.n, mesh.m)}; break;
    default: throw std::invalid_argument("dyadic maximal modes need a grid pair");
  }
  const std::vector<double> r = window_maximal(f.values().data(), box, groups);
  RealFunction out(mesh);
  out.values() = Eigen::Map<const Eigen::MatrixXd>(r.data(), f.values().rows(), f.values().cols());
  return out;
}

RealFunction maximal(const RealFunction& f, MaximalMode mode, const GridPair& grids) {
  if (mode == MaximalMode::nondyadic_strong || mode == MaximalMode::nondyadic_partial_first ||
      mode == MaximalMode::nondyadic_partial_second)
    return maximal(f, mode);
  const Mesh& mesh = f.mesh();
  RealFunction a(mesh, f.values().cwiseAbs());
  RealFunction out(mesh);
  const int L = mesh.levels;
  auto update = [&](const RealFunction& g) { out.values() = out.values().cwiseMax(g.values()); };
  switch (mode) {
    case MaximalMode::strong:
      for (int i = 0; i <= L; ++i) {
        const RealFunction ai = level_expectation(a, grids.first, i);
        for (int j = 0; j <= L; ++j) update(level_expectation(ai, grids.second, j));
      }
      break;
    case MaximalMode::partial_first:
      for (int i = 0; i <= L; ++i) update(level_expectation(a, grids.first, i));
      break;
    case MaximalMode::partial_second:
      for (int j = 0; j <= L; ++j) update(level_expectation(a, grids.second, j));
      break;
    default: break;
  }
  return out;
}

SideFunction<double> adapted_maximal(const SideFunction<double>& b, const SideFunction<double>& f) {
  if (!(b.side == f.side)) throw MeshError("side mismatch");
  SideFunction<double> out(f.side);
  for_each_window(f.side, [&](const std::vector<Index>& cells) {
    double mean = 0.0;
    for (Index c : cells) mean += b.values[c];
    mean /= double(cells.size());
    double v = 0.0;
    for (Index c : cells) v += std::abs(b.values[c] - mean) * std::abs(f.values[c]);
    v /= double(cells.size());
    for (Index c : cells) out.values[c] = std::max(out.values[c], v);
  });
  return out;
}

RealFunction adapted_maximal(const RealFunction& b, const RealFunction& f) {
  check_same(b.mesh(), f.mesh());
  const Mesh& mesh = f.mesh();
  const Eigen::MatrixXd& B = b.values();
  const Eigen::MatrixXd F = f.values().cwiseAbs();
  RealFunction out(mesh);
  Eigen::MatrixXd& O = out.values();
  for_each_window(mesh.side(Axis::first), [&](const std::vector<Index>& rows) {
    for_each_window(mesh.side(Axis::second), [&](const std::vector<Index>& cols) {
      double mean = 0.0;
      for (Index q : cols)
        for (Index p : rows) mean += B(p, q);
      mean /= double(rows.size() * cols.size());
      double v = 0.0;
      for (Index q : cols)
        for (Index p : rows) v += std::abs(B(p, q) - mean) * F(p, q);
      v /= double(rows.size() * cols.size());
      for (Index q : cols)
        for (Index p : rows) O(p, q) = std::max(O(p, q), v);
    });
  });
  return out;
}

namespace {

// Delta at one level of the grid, as E_{level+1} - E_level.
RealFunction level_difference(const RealFunction& f, const DyadicGrid& grid, int level) {
  return level_expectation(f, grid, level + 1) - level_expectation(f, grid, level);
}

}  // namespace

RealFunction square_function(const RealFunction& f, const GridPair& grids, SquareMode mode) {
  const int L = f.mesh().levels;
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(f.values().rows(), f.values().cols());
  switch (mode) {
    case SquareMode::biparameter:
      for (int i = 0; i < L; ++i) {
        const RealFunction di = level_difference(f, grids.first, i);
        for (int j = 0; j < L; ++j) sq += level_difference(di, grids.second, j).values().array().square().matrix();
      }
      break;
    case SquareMode::first:
      for (int i = 0; i < L; ++i) sq += level_difference(f, grids.first, i).values().array().square().matrix();
      break;
    case SquareMode::second:
      for (int j = 0; j < L; ++j) sq += level_difference(f, grids.second, j).values().array().square().matrix();
      break;
  }
  return RealFunction(f.mesh(), sq.cwiseSqrt());
}

SideFunction<double> shifted_square_function(const SideFunction<double>& u, const DyadicGrid& shifted) {
  if (!(u.side == shifted.side())) throw MeshError("grid does not match the side");
  const HaarFrame frame(shifted);
  const DyadicGrid standard(shifted.side());
  const Eigen::VectorXd c = frame.analysis() * u.values;
  SideFunction<double> out(u.side);
  for (Index e : frame.cancellative_elements()) {
    const auto& info = frame.info(e);
    const DyadicCube V = standard.cube(info.level, info.label);
    const double add = c[e] * c[e] / V.volume();
    for (Index cell : V.cells()) out.values[cell] += add;
  }
  out.values = out.values.cwiseSqrt();
  return out;
}

namespace {

// Rows of <f, h_e>_axis over the frame elements, each a function of the other variable.
Eigen::MatrixXd partial_rows(const RealFunction& f, const HaarFrame& frame) {
  if (frame.side().axis == Axis::first) return frame.analysis() * f.values();
  return (f.values() * frame.analysis().transpose()).transpose();
}

// out(x_axis, x_other) += a(x_axis) g(x_other)
void add_outer(RealFunction& out, Axis axis, const Eigen::VectorXd& a, const Eigen::VectorXd& g) {
  if (axis == Axis::first)
    out.values() += a * g.transpose();
  else
    out.values() += g * a.transpose();
}

// (sum_e row(e)^2 (x) 1_{V(e)}/|V(e)|)^{1/2}, V(e) the standard cube carrying e's label
RealFunction shifted_sum(const Mesh& mesh, const HaarFrame& frame,
                         const std::function<Eigen::VectorXd(Index)>& row) {
  const Axis axis = frame.side().axis;
  const DyadicGrid standard(frame.side());
  RealFunction out(mesh);
  for (Index e : frame.cancellative_elements()) {
    const auto& info = frame.info(e);
    const DyadicCube V = standard.cube(info.level, info.label);
    const Eigen::VectorXd r = row(e);
    add_outer(out, axis, V.indicator() / V.volume(), r.cwiseProduct(r));
  }
  out.values() = out.values().cwiseSqrt();
  return out;
}

}  // namespace

RealFunction shifted_square_function(const RealFunction& f, const DyadicGrid& shifted) {
  const Axis axis = shifted.side().axis;
  if (!(f.mesh().side(axis) == shifted.side())) throw MeshError("grid does not match the mesh");
  const HaarFrame frame(shifted);
  const Eigen::MatrixXd rows = partial_rows(f, frame);
  return shifted_sum(f.mesh(), frame, [&](Index e) { return Eigen::VectorXd(rows.row(e).transpose()); });
}

RealFunction shifted_maximal_square(const RealFunction& f, const DyadicGrid& shifted) {
  const Axis axis = shifted.side().axis;
  if (!(f.mesh().side(axis) == shifted.side())) throw MeshError("grid does not match the mesh");
  const HaarFrame frame(shifted);
  const Eigen::MatrixXd rows = partial_rows(f, frame);
  const Side os = f.mesh().side(other(axis));
  return shifted_sum(f.mesh(), frame, [&](Index e) {
    return maximal(SideFunction<double>(os, rows.row(e).transpose())).values;
  });
}

RealFunction phi_sharp(const RealFunction& f, const DyadicGrid& grid) {
  const Axis axis = grid.side().axis;
  if (!(f.mesh().side(axis) == grid.side())) throw MeshError("grid does not match the mesh");
  const HaarFrame frame(grid);
  const Eigen::MatrixXd rows = partial_rows(f, frame);
  const Side os = f.mesh().side(other(axis));
  RealFunction out(f.mesh());
  for (Index e : frame.cancellative_elements()) {
    const Eigen::VectorXd m = maximal(SideFunction<double>(os, rows.row(e).transpose())).values;
    add_outer(out, axis, frame.values().row(e).transpose(), m);
  }
  return out;
}

RealFunction phi_adapted(const RealFunction& b, const RealFunction& f, const DyadicGrid& grid) {
  check_same(b.mesh(), f.mesh());
  const Axis axis = grid.side().axis;
  if (!(f.mesh().side(axis) == grid.side())) throw MeshError("grid does not match the mesh");
  const HaarFrame frame(grid);
  const Eigen::MatrixXd frows = partial_rows(f, frame);
  const Eigen::MatrixXd brows = partial_rows(b, frame);
  const Side os = f.mesh().side(other(axis));
  RealFunction out(f.mesh());
  for (Index e : frame.cancellative_elements()) {
    const auto& info = frame.info(e);
    const Index avg = frame.average(info.level, info.label);
    const SideFunction<double> beta(os, brows.row(avg).transpose() / std::sqrt(frame.volume_of(e)));
    const SideFunction<double> g(os, frows.row(e).transpose());
    add_outer(out, axis, frame.values().row(e).transpose(), adapted_maximal(beta, g).values);
  }
  return out;
}

std::vector<GridShift> ShiftSampler::shifts(const Side& side) const {
  if (exact) return enumerate_shifts(side);
  if (count < 1) throw std::invalid_argument("shift sampler needs at least one sample");
  std::vector<GridShift> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(axis_number(side.axis)),
                      std::uint32_t(k)};
    std::mt19937_64 rng(seq);
    out.push_back(sample_shift(rng, side));
  }
  return out;
}

RealFunction aux_phi(const RealFunction& f, AuxKind kind, const AuxParams& params, const ShiftSampler& sampler) {
  const Mesh& mesh = f.mesh();
  const int L = mesh.levels;
  const bool on_first = kind == AuxKind::phi2_partial || kind == AuxKind::phi2_full;
  const Side side = mesh.side(on_first ? Axis::first : Axis::second);
  if ((kind == AuxKind::phi1_partial || kind == AuxKind::phi2_full) && params.b == nullptr)
    throw std::invalid_argument("this auxiliary operator needs a symbol b");
  if (kind == AuxKind::phi2_partial && (params.l < 0 || params.l >= L))
    throw ResolutionError("block depth l must satisfy 0 <= l < L");
  if (kind == AuxKind::phi2_full && params.i != 1 && params.i != 2)
    throw std::invalid_argument("paraproduct index must be 1 or 2");

  const std::vector<GridShift> shifts = sampler.shifts(side);
  RealFunction acc(mesh);
  for (const GridShift& w : shifts) {
    const DyadicGrid grid(side, w);
    switch (kind) {
      case AuxKind::phi1_partial:
        acc += maximal(shifted_square_function(phi_adapted(*params.b, f, grid), grid),
                       MaximalMode::nondyadic_partial_first);
        break;
      case AuxKind::phi2_partial: {
        // sum over K of (M^1 1_K Delta_{level(K)+l} phi)^2; the square is averaged here
        const RealFunction phi = phi_sharp(f, grid);
        for (int k = 0; k + params.l < L; ++k) {
          const RealFunction d = level_difference(phi, grid, k + params.l);
          const std::vector<int> lab = cube_labels(grid, k);
          for (int K = 0; K < grid.count(k); ++K) {
            RealFunction block(mesh);
            for (Index c = 0; c < Index(lab.size()); ++c)
              if (lab[c] == K) block.values().row(c) = d.values().row(c);
            const RealFunction m = maximal(block, MaximalMode::nondyadic_partial_first);
            acc.values() += m.values().cwiseProduct(m.values());
          }
        }
        break;
      }
      case AuxKind::phi1_full: acc += shifted_maximal_square(f, grid); break;
      case AuxKind::phi2_full: acc += shifted_maximal_square(paraproduct_a(params.i, *params.b, f, grid), grid); break;
    }
  }
  acc.values() /= double(shifts.size());
  if (kind == AuxKind::phi2_partial) acc.values() = acc.values().cwiseSqrt();
  return acc;
}

}  // namespace bilab
