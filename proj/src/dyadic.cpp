#include "bilab/dyadic.hpp"

#include <sstream>

namespace bilab {

namespace {

int wrap(int x, int n) {
  x %= n;
  return x < 0 ? x + n : x;
}

// Coordinates of a cell on a side with 2^L cells per coordinate.
std::array<int, 2> cell_coords(Index cell, int dim, int levels) {
  const int n = 1 << levels;
  std::array<int, 2> x{static_cast<int>(cell % n), 0};
  if (dim == 2) x[1] = static_cast<int>(cell / n);
  return x;
}

}  // namespace

void Mesh::validate() const {
  if (levels < 1 || levels > 12) {
    throw MeshError("mesh: levels must lie in [1, 12], got " + std::to_string(levels));
  }
  if (n < 1 || n > 2 || m < 1 || m > 2) {
    throw MeshError("mesh: side dimensions must be 1 or 2");
  }
}

bool DyadicCube::contains_cell(Index cell) const {
  const auto x = cell_coords(cell, dim, resolution);
  const int n = 1 << resolution;
  for (int c = 0; c < dim; ++c) {
    if (wrap(x[c] - offset[c], n) >= span()) return false;
  }
  return true;
}

bool DyadicCube::contains(const DyadicCube& o) const {
  if (o.axis != axis || o.dim != dim || o.resolution != resolution) return false;
  const int n = 1 << resolution;
  for (int c = 0; c < dim; ++c) {
    if (o.span() > span()) return false;
    if (wrap(o.offset[c] - offset[c], n) > span() - o.span()) return false;
  }
  return true;
}

std::vector<Index> DyadicCube::cells() const {
  const int n = 1 << resolution;
  const int s = span();
  std::vector<Index> out;
  if (dim == 1) {
    out.reserve(s);
    for (int t = 0; t < s; ++t) out.push_back(wrap(offset[0] + t, n));
  } else {
    out.reserve(std::size_t(s) * s);
    for (int t1 = 0; t1 < s; ++t1) {
      for (int t0 = 0; t0 < s; ++t0) {
        out.push_back(wrap(offset[0] + t0, n) + Index(n) * wrap(offset[1] + t1, n));
      }
    }
  }
  return out;
}

Eigen::VectorXd DyadicCube::indicator() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Index(1) << (resolution * dim));
  for (Index c : cells()) v[c] = 1.0;
  return v;
}

std::string DyadicCube::to_string() const {
  std::ostringstream os;
  const double n = std::ldexp(1.0, resolution);
  for (int c = 0; c < dim; ++c) {
    if (c) os << " x ";
    const double a = offset[c] / n;
    const double b = (offset[c] + span()) / n;
    if (b > 1.0) {
      os << "[" << a << ",1)u[0," << b - 1.0 << ")";
    } else {
      os << "[" << a << "," << b << ")";
    }
  }
  return os.str();
}

GridShift GridShift::zero(const Side& side) {
  GridShift s;
  s.axis = side.axis;
  s.dim = side.dim;
  s.levels = side.levels;
  s.bits.assign(side.levels, {0, 0});
  return s;
}

std::array<int, 2> GridShift::translation(int level) const {
  std::array<int, 2> t{0, 0};
  for (int i = level + 1; i <= levels; ++i) {
    for (int c = 0; c < dim; ++c) t[c] += bits[i - 1][c] << (levels - i);
  }
  return t;
}

std::array<double, 2> GridShift::total_translation() const {
  std::array<double, 2> t{0.0, 0.0};
  for (int i = 1; i <= levels; ++i) {
    for (int c = 0; c < dim; ++c) t[c] += std::ldexp(double(bits[i - 1][c]), -i);
  }
  return t;
}

bool GridShift::is_zero() const {
  for (const auto& b : bits) {
    if (b[0] || b[1]) return false;
  }
  return true;
}

Eigen::VectorXd haar_values(const HaarIndex& h) {
  const DyadicCube& q = h.cube;
  if (h.eta < 0 || h.eta >= (1 << q.dim)) throw std::invalid_argument("haar: eta out of range");
  if (h.eta != 0 && q.level >= q.resolution) {
    throw ResolutionError("haar: cancellative Haar function below mesh resolution");
  }
  const int n = 1 << q.resolution;
  const int s = q.span();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Index(1) << (q.resolution * q.dim));
  const double scale = std::sqrt(std::ldexp(1.0, q.level * q.dim));  // |I|^{-1/2}
  for (Index cell : q.cells()) {
    const auto x = cell_coords(cell, q.dim, q.resolution);
    double val = scale;
    for (int c = 0; c < q.dim; ++c) {
      if ((h.eta >> c) & 1) {
        const int t = wrap(x[c] - q.offset[c], n);
        if (t >= s / 2) val = -val;
      }
    }
    v[cell] = val;
  }
  return v;
}

DyadicGrid::DyadicGrid(const Side& side) : DyadicGrid(side, GridShift::zero(side)) {}

DyadicGrid::DyadicGrid(const Side& side, GridShift shift) : side_(side), shift_(std::move(shift)) {
  if (shift_.levels != side_.levels || shift_.dim != side_.dim ||
      shift_.bits.size() != std::size_t(side_.levels)) {
    throw MeshError("grid: shift does not match the side");
  }
  translation_.resize(side_.levels + 1);
  for (int j = 0; j <= side_.levels; ++j) translation_[j] = shift_.translation(j);
}

void DyadicGrid::check_level(int level) const {
  if (level < 0 || level > side_.levels) {
    throw ResolutionError("grid: level " + std::to_string(level) + " outside [0, " +
                          std::to_string(side_.levels) + "]");
  }
}

int DyadicGrid::count(int level) const {
  check_level(level);
  return 1 << (level * side_.dim);
}

DyadicCube DyadicGrid::cube(int level, int label) const {
  check_level(level);
  if (label < 0 || label >= count(level)) throw std::out_of_range("grid: cube label out of range");
  DyadicCube q;
  q.axis = side_.axis;
  q.dim = side_.dim;
  q.resolution = side_.levels;
  q.level = level;
  const int per = 1 << level;
  const int n = side_.extent();
  const int s = q.span();
  const int k[2] = {label % per, label / per};
  for (int c = 0; c < side_.dim; ++c) q.offset[c] = wrap(k[c] * s + translation_[level][c], n);
  return q;
}

int DyadicGrid::label(const DyadicCube& q) const {
  if (!contains(q)) throw std::invalid_argument("grid: cube " + q.to_string() + " not in grid");
  const int per = 1 << q.level;
  const int n = side_.extent();
  int lab = 0;
  int stride = 1;
  for (int c = 0; c < side_.dim; ++c) {
    lab += stride * (wrap(q.offset[c] - translation_[q.level][c], n) / q.span());
    stride *= per;
  }
  return lab;
}

bool DyadicGrid::contains(const DyadicCube& q) const {
  if (q.axis != side_.axis || q.dim != side_.dim || q.resolution != side_.levels) return false;
  if (q.level < 0 || q.level > side_.levels) return false;
  const int n = side_.extent();
  for (int c = 0; c < side_.dim; ++c) {
    if (wrap(q.offset[c] - translation_[q.level][c], n) % q.span() != 0) return false;
  }
  return true;
}

DyadicCube DyadicGrid::cube_containing(Index cell, int level) const {
  check_level(level);
  const auto x = cell_coords(cell, side_.dim, side_.levels);
  const int n = side_.extent();
  const int s = 1 << (side_.levels - level);
  const int per = 1 << level;
  int lab = 0;
  int stride = 1;
  for (int c = 0; c < side_.dim; ++c) {
    lab += stride * (wrap(x[c] - translation_[level][c], n) / s);
    stride *= per;
  }
  return cube(level, lab);
}

DyadicCube DyadicGrid::ancestor(const DyadicCube& q, int k) const {
  if (k < 0 || k > q.level) {
    throw ResolutionError("ancestor: k = " + std::to_string(k) + " exceeds the cube level " +
                          std::to_string(q.level));
  }
  if (!contains(q)) throw std::invalid_argument("ancestor: cube not in grid");
  Index first_cell = q.offset[0];
  if (side_.dim == 2) first_cell += Index(side_.extent()) * q.offset[1];
  return cube_containing(first_cell, q.level - k);
}

std::vector<DyadicCube> enumerate_cubes(const DyadicGrid& grid, int level) {
  const int c = grid.count(level);
  std::vector<DyadicCube> out;
  out.reserve(c);
  for (int l = 0; l < c; ++l) out.push_back(grid.cube(level, l));
  return out;
}

DyadicCube ancestor(const DyadicGrid& grid, const DyadicCube& cube, int k) {
  return grid.ancestor(cube, k);
}

std::vector<DyadicCube> children(const DyadicCube& q) {
  if (q.level >= q.resolution) {
    throw ResolutionError("children: cube " + q.to_string() + " is at the finest level");
  }
  const int n = 1 << q.resolution;
  const int h = q.span() / 2;
  std::vector<DyadicCube> out;
  for (int pat = 0; pat < (1 << q.dim); ++pat) {
    DyadicCube c = q;
    c.level = q.level + 1;
    for (int d = 0; d < q.dim; ++d) c.offset[d] = wrap(q.offset[d] + ((pat >> d) & 1) * h, n);
    out.push_back(c);
  }
  return out;
}

DyadicCube shift_cube(const DyadicCube& q, const GridShift& shift) {
  if (shift.axis != q.axis || shift.dim != q.dim || shift.levels != q.resolution) {
    throw MeshError("shift_cube: shift does not match the cube's side");
  }
  const int n = 1 << q.resolution;
  DyadicCube out = q;
  const auto t = shift.translation(q.level);
  for (int c = 0; c < q.dim; ++c) out.offset[c] = wrap(q.offset[c] + t[c], n);
  return out;
}

std::vector<GridShift> enumerate_shifts(const Side& side) {
  const int nbits = side.levels * side.dim;
  if (nbits > 20) throw ResolutionError("enumerate_shifts: too many shifts to enumerate");
  std::vector<GridShift> out;
  out.reserve(std::size_t(1) << nbits);
  for (std::uint32_t code = 0; code < (1u << nbits); ++code) {
    GridShift s = GridShift::zero(side);
    for (int b = 0; b < nbits; ++b) {
      s.bits[b / side.dim][b % side.dim] = static_cast<std::uint8_t>((code >> (nbits - 1 - b)) & 1u);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace bilab
