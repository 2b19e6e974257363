#pragma once

// Piecewise constant functions on the 2^-L mesh of [0,1)^{n+m}, pairings and
// the martingale difference calculus.
//
// Values are stored as a matrix: row = cell of the first side, column = cell
// of the second side. All integrals are exact cell sums times cell volume.

#include <complex>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>

#include <Eigen/Core>

#include "bilab/dyadic.hpp"

namespace bilab {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

/// A function of one side's variable, e.g. <f, h_I>_1 as a function of x_2.
template <typename Scalar>
struct SideFunction {
  Side side;
  VectorX<Scalar> values;

  SideFunction() = default;
  explicit SideFunction(const Side& s) : side(s), values(VectorX<Scalar>::Zero(s.cells())) {}
  SideFunction(const Side& s, VectorX<Scalar> v) : side(s), values(std::move(v)) {
    if (values.size() != side.cells()) throw MeshError("side function size does not match side");
  }
};

template <typename Scalar>
class GridFunction {
 public:
  using Matrix = MatrixX<Scalar>;

  GridFunction() = default;
  explicit GridFunction(const Mesh& mesh)
      : mesh_(mesh), values_(Matrix::Zero(mesh.cells(Axis::first), mesh.cells(Axis::second))) {}
  GridFunction(const Mesh& mesh, Matrix values) : mesh_(mesh), values_(std::move(values)) {
    if (values_.rows() != mesh.cells(Axis::first) || values_.cols() != mesh.cells(Axis::second))
      throw MeshError("value matrix does not match mesh");
  }

  static GridFunction constant(const Mesh& mesh, Scalar c) {
    return GridFunction(mesh, Matrix::Constant(mesh.cells(Axis::first), mesh.cells(Axis::second), c));
  }

  const Mesh& mesh() const { return mesh_; }
  const Matrix& values() const { return values_; }
  Matrix& values() { return values_; }
  double cell_volume() const { return mesh_.cell_volume(); }

  Scalar operator()(Index c1, Index c2) const { return values_(c1, c2); }
  Scalar& operator()(Index c1, Index c2) { return values_(c1, c2); }

  template <typename Other>
  GridFunction<Other> cast() const {
    return GridFunction<Other>(mesh_, values_.template cast<Other>());
  }

  GridFunction& operator+=(const GridFunction& g) {
    check(g);
    values_ += g.values_;
    return *this;
  }
  GridFunction& operator-=(const GridFunction& g) {
    check(g);
    values_ -= g.values_;
    return *this;
  }
  GridFunction& operator*=(Scalar c) {
    values_ *= c;
    return *this;
  }

  void check(const GridFunction& g) const {
    if (!(g.mesh_ == mesh_)) throw MeshError("grid functions live on different meshes");
  }

 private:
  Mesh mesh_;
  Matrix values_;
};

using RealFunction = GridFunction<double>;
using ComplexFunction = GridFunction<std::complex<double>>;

template <typename S>
GridFunction<S> operator+(GridFunction<S> f, const GridFunction<S>& g) {
  return f += g;
}
template <typename S>
GridFunction<S> operator-(GridFunction<S> f, const GridFunction<S>& g) {
  return f -= g;
}
template <typename S>
GridFunction<S> operator*(S c, GridFunction<S> f) {
  return f *= c;
}
template <typename S>
GridFunction<S> operator*(GridFunction<S> f, S c) {
  return f *= c;
}

inline void check_same(const Mesh& a, const Mesh& b) {
  if (!(a == b)) throw MeshError("mesh mismatch");
}

/// Pointwise product b*f; b may be real while f is complex.
template <typename B, typename S>
GridFunction<S> multiply(const GridFunction<B>& b, const GridFunction<S>& f) {
  check_same(b.mesh(), f.mesh());
  return GridFunction<S>(f.mesh(), b.values().template cast<S>().cwiseProduct(f.values()));
}

/// g(x_1) u(x_2).
template <typename S>
GridFunction<S> tensor(const Mesh& mesh, const VectorX<S>& g, const VectorX<S>& u) {
  return GridFunction<S>(mesh, g * u.transpose());
}

/// Indicator of a rectangle.
RealFunction indicator(const Mesh& mesh, const DyadicRectangle& r);

/// h_I^eta (x) h_J^theta on the full mesh.
RealFunction haar_function(const Mesh& mesh, const HaarIndex& hx, const HaarIndex& hy);

/// Swap the roles of the two sides (n <-> m).
template <typename S>
GridFunction<S> transpose(const GridFunction<S>& f) {
  Mesh t{f.mesh().levels, f.mesh().m, f.mesh().n};
  return GridFunction<S>(t, f.values().transpose());
}

/// The exact integral of f g over the torus (no conjugation).
template <typename S>
S pair(const GridFunction<S>& f, const GridFunction<S>& g) {
  check_same(f.mesh(), g.mesh());
  return f.values().cwiseProduct(g.values()).sum() * f.cell_volume();
}

template <typename S>
S pair(const SideFunction<S>& f, const SideFunction<S>& g) {
  if (!(f.side == g.side)) throw MeshError("side mismatch");
  return f.values.cwiseProduct(g.values).sum() * f.side.cell_volume();
}

inline void check_axis(const Mesh& mesh, const DyadicCube& q, Axis a) {
  if (q.axis != a) throw MeshError("cube lives on the wrong axis");
  const Side s = mesh.side(a);
  if (q.dim != s.dim || q.resolution != s.levels) throw MeshError("cube is not aligned to the mesh");
}

/// <f, h_I^eta (x) h_J^theta>.
template <typename S>
S haar_pair(const GridFunction<S>& f, const HaarIndex& hx, const HaarIndex& hy) {
  check_axis(f.mesh(), hx.cube, Axis::first);
  check_axis(f.mesh(), hy.cube, Axis::second);
  const Eigen::VectorXd u = haar_values(hx);
  const Eigen::VectorXd v = haar_values(hy);
  return (u.transpose().template cast<S>() * f.values() * v.template cast<S>())(0, 0) * f.cell_volume();
}

/// Pairing of f with a side-axis vector, leaving a function of the other variable.
template <typename S>
SideFunction<S> partial_pair(const GridFunction<S>& f, const Eigen::VectorXd& h, Axis axis) {
  const Mesh& mesh = f.mesh();
  const Side s = mesh.side(axis);
  if (h.size() != s.cells()) throw MeshError("partial pairing vector has the wrong size");
  if (axis == Axis::first)
    return SideFunction<S>(mesh.side(Axis::second),
                           f.values().transpose() * h.template cast<S>() * s.cell_volume());
  return SideFunction<S>(mesh.side(Axis::first), f.values() * h.template cast<S>() * s.cell_volume());
}

/// <f, h>_axis where the axis is the one carrying h.
template <typename S>
SideFunction<S> partial_pair(const GridFunction<S>& f, const HaarIndex& h) {
  check_axis(f.mesh(), h.cube, h.cube.axis);
  return partial_pair(f, haar_values(h), h.cube.axis);
}

/// Overload with an explicit axis number (1 or 2) as in <f, h>_1.
template <typename S>
SideFunction<S> partial_pair(const GridFunction<S>& f, const HaarIndex& h, int axis) {
  if (axis != 1 && axis != 2) throw std::invalid_argument("axis must be 1 or 2");
  if (axis != axis_number(h.cube.axis)) throw MeshError("Haar index does not live on that axis");
  return partial_pair(f, h);
}

/// <f>_R.
template <typename S>
S cube_average(const GridFunction<S>& f, const DyadicRectangle& r) {
  check_axis(f.mesh(), r.first, Axis::first);
  check_axis(f.mesh(), r.second, Axis::second);
  const Eigen::VectorXd u = r.first.indicator();
  const Eigen::VectorXd v = r.second.indicator();
  return (u.transpose().template cast<S>() * f.values() * v.template cast<S>())(0, 0) * f.cell_volume() /
         r.volume();
}

/// <f>_{I,axis} as a function of the other variable.
template <typename S>
SideFunction<S> cube_average(const GridFunction<S>& f, const DyadicCube& q) {
  check_axis(f.mesh(), q, q.axis);
  SideFunction<S> out = partial_pair(f, q.indicator(), q.axis);
  out.values /= q.volume();
  return out;
}

template <typename S>
S cube_average(const SideFunction<S>& f, const DyadicCube& q) {
  return f.values.dot(q.indicator().template cast<S>()) * f.side.cell_volume() / q.volume();
}

enum class Projection { delta, expectation };

/// One-parameter Delta_I (sum over all cancellative eta) or E_I.
template <typename S>
SideFunction<S> martingale_difference(const SideFunction<S>& f, const DyadicCube& q,
                                      Projection mode = Projection::delta) {
  if (q.dim != f.side.dim || q.resolution != f.side.levels) throw MeshError("cube is not aligned to the mesh");
  SideFunction<S> out(f.side);
  if (mode == Projection::expectation) {
    const Eigen::VectorXd ind = q.indicator();
    out.values = ind.template cast<S>() * (f.values.dot(ind.template cast<S>()) / S(double(q.cells().size())));
    return out;
  }
  if (q.level >= q.resolution) throw ResolutionError("no martingale difference at the finest level");
  for (int eta = 1; eta < (1 << q.dim); ++eta) {
    const Eigen::VectorXd h = haar_values(HaarIndex{q, eta});
    const S c = (h.transpose().template cast<S>() * f.values)(0, 0) * f.side.cell_volume();
    out.values += h.template cast<S>() * c;
  }
  return out;
}

/// Delta^1_I / Delta^2_J (or E^1_I / E^2_J); the axis is the cube's axis.
template <typename S>
GridFunction<S> martingale_difference(const GridFunction<S>& f, const DyadicCube& q,
                                      Projection mode = Projection::delta) {
  check_axis(f.mesh(), q, q.axis);
  const Side s = f.mesh().side(q.axis);
  MatrixX<S> proj = MatrixX<S>::Zero(s.cells(), s.cells());
  if (mode == Projection::expectation) {
    const Eigen::VectorXd ind = q.indicator();
    proj = (ind * ind.transpose() / double(q.cells().size())).template cast<S>();
  } else {
    if (q.level >= q.resolution) throw ResolutionError("no martingale difference at the finest level");
    for (int eta = 1; eta < (1 << q.dim); ++eta) {
      const Eigen::VectorXd h = haar_values(HaarIndex{q, eta});
      proj += (h * h.transpose() * s.cell_volume()).template cast<S>();
    }
  }
  if (q.axis == Axis::first) return GridFunction<S>(f.mesh(), proj * f.values());
  return GridFunction<S>(f.mesh(), f.values() * proj);
}

/// Delta_{I x J} f = Delta^1_I Delta^2_J f.
template <typename S>
GridFunction<S> martingale_difference(const GridFunction<S>& f, const DyadicRectangle& r) {
  return martingale_difference(martingale_difference(f, r.second), r.first);
}

/// Every I with I^{(i)} = K, in any grid (descendants do not depend on the shift).
std::vector<DyadicCube> descendants(const DyadicCube& k, int depth);

/// Delta_{K,i} f, one-parameter.
template <typename S>
SideFunction<S> martingale_block(const SideFunction<S>& f, const DyadicCube& k, int i) {
  if (i < 0 || k.level + i >= k.resolution) throw ResolutionError("block depth exceeds resolution");
  SideFunction<S> out(f.side);
  for (const DyadicCube& q : descendants(k, i)) out.values += martingale_difference(f, q).values;
  return out;
}

/// Delta^1_{K,i} f or Delta^2_{K,i} f depending on the cube's axis.
template <typename S>
GridFunction<S> martingale_block(const GridFunction<S>& f, const DyadicCube& k, int i) {
  if (i < 0 || k.level + i >= k.resolution) throw ResolutionError("block depth exceeds resolution");
  GridFunction<S> out(f.mesh());
  for (const DyadicCube& q : descendants(k, i)) out += martingale_difference(f, q);
  return out;
}

/// Delta^{i,j}_{K x V} f.
template <typename S>
GridFunction<S> martingale_block(const GridFunction<S>& f, const DyadicCube& k, int i, const DyadicCube& v,
                                 int j) {
  return martingale_block(martingale_block(f, v, j), k, i);
}

// Serialization. Binary: magic "BILABGF", format version byte, scalar kind
// byte (0 real, 1 complex), int32 n, m, L, then little-endian doubles in
// row-major cell order (re, im for complex). CSV: a comment header line
// "# bilab-grid-function v1 n=.. m=.. L=.. scalar=real|complex", then one
// line per first-side cell.

inline constexpr int grid_function_format = 1;

template <typename S>
void write_binary(std::ostream& os, const GridFunction<S>& f) {
  os.write("BILABGF", 7);
  const char version = char(grid_function_format);
  const char kind = is_complex<S>::value ? 1 : 0;
  os.put(version);
  os.put(kind);
  const std::int32_t hdr[3] = {f.mesh().n, f.mesh().m, f.mesh().levels};
  os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  for (Index r = 0; r < f.values().rows(); ++r) {
    for (Index c = 0; c < f.values().cols(); ++c) {
      if constexpr (is_complex<S>::value) {
        const double parts[2] = {f(r, c).real(), f(r, c).imag()};
        os.write(reinterpret_cast<const char*>(parts), sizeof parts);
      } else {
        const double v = f(r, c);
        os.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
  }
}

template <typename S>
GridFunction<S> read_binary(std::istream& is) {
  char magic[7];
  is.read(magic, 7);
  if (!is || std::string(magic, 7) != "BILABGF") throw std::runtime_error("not a grid function stream");
  const int version = is.get();
  const int kind = is.get();
  if (version != grid_function_format) throw std::runtime_error("unsupported grid function version");
  if (kind != (is_complex<S>::value ? 1 : 0)) throw std::runtime_error("scalar kind mismatch");
  std::int32_t hdr[3];
  is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  Mesh mesh{hdr[2], hdr[0], hdr[1]};
  mesh.validate();
  GridFunction<S> f(mesh);
  for (Index r = 0; r < f.values().rows(); ++r) {
    for (Index c = 0; c < f.values().cols(); ++c) {
      if constexpr (is_complex<S>::value) {
        double parts[2];
        is.read(reinterpret_cast<char*>(parts), sizeof parts);
        f(r, c) = S(parts[0], parts[1]);
      } else {
        double v;
        is.read(reinterpret_cast<char*>(&v), sizeof v);
        f(r, c) = v;
      }
    }
  }
  if (!is) throw std::runtime_error("truncated grid function stream");
  return f;
}

void write_csv(std::ostream& os, const RealFunction& f);
RealFunction read_csv(std::istream& is);

}  // namespace bilab
