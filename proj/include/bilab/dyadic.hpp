#pragma once

// Dyadic grids on the torus [0,1)^d, random grid shifts and Haar indexing.
//
// Every side of the product domain is a d-dimensional torus (d = 1 or 2)
// discretised by a uniform mesh of 2^L cells per coordinate. Dyadic cubes
// have side 2^-j for 0 <= j <= L and are stored by their left corner in mesh
// units, so wrapped cubes (mod 1) need no special representation.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bilab {

using Eigen::Index;

/// Which factor of R^n x R^m a one-variable object lives on.
enum class Axis : int { first = 0, second = 1 };

inline Axis other(Axis a) { return a == Axis::first ? Axis::second : Axis::first; }
inline int axis_number(Axis a) { return a == Axis::first ? 1 : 2; }

class ResolutionError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class MeshError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One factor of the product torus: dimension and resolution.
struct Side {
  Axis axis = Axis::first;
  int dim = 1;
  int levels = 5;

  /// Mesh cells per coordinate.
  int extent() const { return 1 << levels; }
  Index cells() const { return Index(1) << (levels * dim); }
  double cell_volume() const { return std::ldexp(1.0, -levels * dim); }

  friend bool operator==(const Side&, const Side&) = default;
};

/// Discretisation of [0,1)^{n+m}: L levels, side dimensions n and m.
struct Mesh {
  int levels = 5;
  int n = 1;
  int m = 1;

  Side side(Axis a) const { return Side{a, a == Axis::first ? n : m, levels}; }
  Index cells(Axis a) const { return side(a).cells(); }
  double cell_volume() const { return std::ldexp(1.0, -levels * (n + m)); }

  /// Throws MeshError unless 1 <= L <= 12 and n, m in {1, 2}.
  void validate() const;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// A dyadic cube of one side, possibly wrapped mod 1.
struct DyadicCube {
  Axis axis = Axis::first;
  int dim = 1;
  int resolution = 0;
  int level = 0;
  std::array<int, 2> offset{0, 0};

  /// Side length in mesh units.
  int span() const { return 1 << (resolution - level); }
  double side_length() const { return std::ldexp(1.0, -level); }
  double volume() const { return std::ldexp(1.0, -level * dim); }

  bool contains_cell(Index cell) const;
  /// Containment mod 1 (cubes on the same side).
  bool contains(const DyadicCube& other) const;
  /// Mesh cells covered, coordinate 0 fastest within the side's cell numbering.
  std::vector<Index> cells() const;
  /// Indicator of the cube as a vector over the side's cells.
  Eigen::VectorXd indicator() const;

  std::string to_string() const;

  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
};

struct DyadicRectangle {
  DyadicCube first;
  DyadicCube second;

  double volume() const { return first.volume() * second.volume(); }
  bool contains(const DyadicRectangle& r) const {
    return first.contains(r.first) && second.contains(r.second);
  }
  friend bool operator==(const DyadicRectangle&, const DyadicRectangle&) = default;
};

/// Random translation bits omega^i, one d-bit vector per scale 2^-i,
/// i = 1..L. Stored bits[i - 1].
struct GridShift {
  Axis axis = Axis::first;
  int dim = 1;
  int levels = 0;
  std::vector<std::array<std::uint8_t, 2>> bits;

  static GridShift zero(const Side& side);

  /// Translation applied to cubes of the given level, in mesh units:
  /// sum over scales i > level of omega^i 2^{L-i}.
  std::array<int, 2> translation(int level) const;
  /// sum_i 2^-i omega^i, a point of [0,1)^d.
  std::array<double, 2> total_translation() const;
  bool is_zero() const;

  friend bool operator==(const GridShift&, const GridShift&) = default;
};

/// L^2-normalised Haar function h_I^eta; bit c of eta selects the oscillating
/// factor in coordinate c. eta == 0 is the non-cancellative h^0.
struct HaarIndex {
  DyadicCube cube;
  int eta = 1;

  bool cancellative() const { return eta != 0; }
  friend bool operator==(const HaarIndex&, const HaarIndex&) = default;
};

/// Values of h_I^eta on the side's mesh cells.
Eigen::VectorXd haar_values(const HaarIndex& h);

/// The shifted dyadic grid D_omega of one side, truncated to levels 0..L.
class DyadicGrid {
 public:
  explicit DyadicGrid(const Side& side);
  DyadicGrid(const Side& side, GridShift shift);

  const Side& side() const { return side_; }
  const GridShift& shift() const { return shift_; }
  int levels() const { return side_.levels; }
  int dim() const { return side_.dim; }

  /// Number of cubes at a level, 2^{level*d}.
  int count(int level) const;
  /// Cubes are labelled by their position k in the unshifted grid:
  /// label = k_0 + 2^level k_1. The label of K + omega equals that of K.
  DyadicCube cube(int level, int label) const;
  int label(const DyadicCube& cube) const;
  bool contains(const DyadicCube& cube) const;

  DyadicCube cube_containing(Index cell, int level) const;
  /// The unique S in this grid with cube subset S and l(S) = 2^k l(cube).
  DyadicCube ancestor(const DyadicCube& cube, int k) const;

  const std::array<int, 2>& translation(int level) const { return translation_[level]; }

  friend bool operator==(const DyadicGrid& a, const DyadicGrid& b) {
    return a.side_ == b.side_ && a.shift_ == b.shift_;
  }

 private:
  void check_level(int level) const;

  Side side_;
  GridShift shift_;
  std::vector<std::array<int, 2>> translation_;
};

/// The grid pair D_omega = D^n_{omega_1} x D^m_{omega_2}.
struct GridPair {
  DyadicGrid first;
  DyadicGrid second;

  explicit GridPair(const Mesh& mesh)
      : first(mesh.side(Axis::first)), second(mesh.side(Axis::second)) {}
  GridPair(DyadicGrid a, DyadicGrid b) : first(std::move(a)), second(std::move(b)) {}

  const DyadicGrid& on(Axis a) const { return a == Axis::first ? first : second; }
  Mesh mesh() const { return Mesh{first.levels(), first.dim(), second.dim()}; }
};

/// All 2^level cubes (2^{level d} for d = 2) of a level, pairwise disjoint
/// and covering the torus. Throws ResolutionError when level > L.
std::vector<DyadicCube> enumerate_cubes(const DyadicGrid& grid, int level);

/// I^{(k)}. Throws ResolutionError when k > cube.level or k < 0.
DyadicCube ancestor(const DyadicGrid& grid, const DyadicCube& cube, int k);

/// The 2^d halves of a cube, coordinate 0 varying fastest, left before right.
/// Throws ResolutionError at the finest level.
std::vector<DyadicCube> children(const DyadicCube& cube);

/// I + omega for I in the standard grid.
DyadicCube shift_cube(const DyadicCube& cube, const GridShift& shift);

/// I.i.d. uniform bits for every representable scale.
template <typename Rng>
GridShift sample_shift(Rng& rng, const Side& side) {
  GridShift s = GridShift::zero(side);
  for (auto& b : s.bits) {
    for (int c = 0; c < side.dim; ++c) b[c] = static_cast<std::uint8_t>(rng() & 1u);
  }
  return s;
}

/// Every shift of a side, in lexicographic order of the bit string.
std::vector<GridShift> enumerate_shifts(const Side& side);

}  // namespace bilab
