#pragma once

// L^p quasi-norms, BMO-type norms, sequence and product BMO, A_p
// characteristics, and random symbols and weights for experiments.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilab/haar_frame.hpp"
#include "bilab/signal.hpp"

namespace bilab {

enum class ApMode {
  biparameter,    // sup over all mesh-aligned rectangles
  slices_first,   // sup over x_2 of [w(., x_2)]_{A_p} on the first side
  slices_second,  // sup over x_1 of [w(x_1, .)]_{A_p}
};

/// (int |f|^p)^{1/p}; p = infinity gives max |f|. Throws std::invalid_argument for p <= 0.
template <typename S>
double lp_norm(const GridFunction<S>& f, double p) {
  if (!(p > 0)) throw std::invalid_argument("lp_norm: p must be positive");
  if (std::isinf(p)) return f.values().cwiseAbs().maxCoeff();
  return std::pow(f.values().cwiseAbs().array().pow(p).sum() * f.cell_volume(), 1.0 / p);
}

/// A strictly positive weight with cached A_p characteristics.
class Weight {
 public:
  /// Throws std::invalid_argument unless every cell value is positive.
  explicit Weight(RealFunction w);

  const RealFunction& function() const { return w_; }
  const Mesh& mesh() const { return w_.mesh(); }
  /// [w]_{A_p} in the given mode, computed once per (p, mode).
  double characteristic(double p, ApMode mode) const;

 private:
  struct Cache {
    std::mutex mutex;
    std::map<std::pair<double, ApMode>, double> values;
  };
  RealFunction w_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// (int |f|^p w)^{1/p}.
template <typename S>
double lp_norm(const GridFunction<S>& f, double p, const Weight& w) {
  if (!(p > 0)) throw std::invalid_argument("lp_norm: p must be positive");
  check_same(f.mesh(), w.mesh());
  if (std::isinf(p)) return f.values().cwiseAbs().maxCoeff();
  return std::pow(
      (f.values().cwiseAbs().array().pow(p) * w.function().values().array()).sum() * f.cell_volume(), 1.0 / p);
}

// ---- A_p ----

/// sup_Q <w>_Q <w^{1-p'}>_Q^{p-1} over every mesh-aligned cube of the side.
/// Throws std::invalid_argument for p <= 1.
double ap_characteristic(const SideFunction<double>& w, double p);
double ap_characteristic(const Weight& w, double p, ApMode mode = ApMode::biparameter);

// ---- BMO ----

enum class BmoMode {
  dyadic,     // cubes (rectangles) of the given grid(s); the standard one when none is given
  nondyadic,  // every mesh-aligned cube (rectangle), O(N^6) for rectangles
  shifted,    // every translate of a dyadic cube (rectangle) = sup over omega of the dyadic norm
};

/// sup_Q <|b - <b>_Q|>_Q, one parameter.
double bmo_norm(const SideFunction<double>& b, BmoMode mode);
double bmo_norm(const SideFunction<double>& b, const DyadicGrid& grid);
/// Little bmo: sup_R <|b - <b>_R|>_R over rectangles.
double bmo_norm(const RealFunction& b, BmoMode mode);
double bmo_norm(const RealFunction& b, const GridPair& grids);
/// max(sup_{x_2} |b(., x_2)|_BMO, sup_{x_1} |b(x_1, .)|_BMO); mode is nondyadic or shifted.
double slice_bmo_norm(const RealFunction& b, BmoMode mode);

// ---- sequence BMO ----

/// Scalars a_V indexed by the cubes of one grid, values[level](label).
struct CubeSequence {
  DyadicGrid grid;
  std::vector<Eigen::VectorXd> values;

  explicit CubeSequence(DyadicGrid g);
  double& operator()(int level, int label) { return values[level][label]; }
  double operator()(int level, int label) const { return values[level][label]; }
};

/// sup_{V0} (|V0|^{-1} sum_{V in V0} |a_V|^2)^{1/2}, exact over the grid.
double sequence_bmo_norm(const CubeSequence& a);

/// Scalars a_R indexed by rectangles of a grid pair: values[i * (L+1) + j](label_i, label_j).
struct RectangleSequence {
  GridPair grids;
  std::vector<Eigen::MatrixXd> values;

  explicit RectangleSequence(GridPair g);
  int levels() const { return grids.first.levels(); }
  Eigen::MatrixXd& block(int i, int j) { return values[i * (levels() + 1) + j]; }
  const Eigen::MatrixXd& block(int i, int j) const { return values[i * (levels() + 1) + j]; }
  double& operator()(int i, int li, int j, int lj) { return block(i, j)(li, lj); }
  double operator()(int i, int li, int j, int lj) const { return block(i, j)(li, lj); }
};

/// Family-relative product BMO: sup over Omega of (|Omega|^{-1} sum_{R in Omega} |a_R|^2)^{1/2}.
/// `rectangles` uses Omega = single dyadic rectangles; `family` adds level sets
/// {S_a >= lambda} of the sequence's square function and caller-supplied sets.
/// Both are lower bounds for the true norm.
struct ProductBmo {
  double rectangles = 0.0;
  double family = 0.0;
  std::string description;
};

/// Extra sets are cell masks (first-side cells x second-side cells, nonzero = inside).
ProductBmo sequence_bmo_norm(const RectangleSequence& a, const std::vector<Eigen::MatrixXd>& extra_sets = {},
                             int thresholds = 32);

/// Haar coefficients of b on the grid pair, one value per rectangle
/// (the l^2 sum over cancellative eta, theta).
RectangleSequence haar_sequence(const RealFunction& b, const GridPair& grids);

/// Product BMO of b: lower = single rectangles, heuristic = the whole family.
ProductBmo product_bmo_estimate(const RealFunction& b, const GridPair& grids,
                                const std::vector<Eigen::MatrixXd>& extra_sets = {});

// ---- generators ----

/// Random zero-mean symbol from Haar coefficients N(0,1)|R|^{1/2} on the
/// standard grids, rescaled so bmo_norm(b, mode) = target.
template <typename Rng>
RealFunction generate_bmo_function(Rng& rng, const Mesh& mesh, double target, BmoMode mode = BmoMode::shifted);

/// w = exp(lambda b) with b a generated symbol of unit norm. Throws for p <= 1.
template <typename Rng>
Weight generate_weight(Rng& rng, const Mesh& mesh, double p, double lambda, BmoMode mode = BmoMode::shifted);

/// The unnormalised random symbol behind generate_bmo_function.
RealFunction random_haar_symbol(const Mesh& mesh, const std::vector<double>& gaussians);

template <typename Rng>
RealFunction generate_bmo_function(Rng& rng, const Mesh& mesh, double target, BmoMode mode) {
  if (!(target > 0)) throw std::invalid_argument("target norm must be positive");
  std::normal_distribution<double> g;
  const Index count = mesh.cells(Axis::first) * mesh.cells(Axis::second);
  for (;;) {
    std::vector<double> z(count);
    for (double& x : z) x = g(rng);
    RealFunction b = random_haar_symbol(mesh, z);
    const double norm = bmo_norm(b, mode);
    if (norm > 0) {
      b.values() *= target / norm;
      return b;
    }
  }
}

template <typename Rng>
Weight generate_weight(Rng& rng, const Mesh& mesh, double p, double lambda, BmoMode mode) {
  if (!(p > 1)) throw std::invalid_argument("generate_weight: p must exceed 1");
  const RealFunction b = generate_bmo_function(rng, mesh, 1.0, mode);
  return Weight(RealFunction(mesh, (lambda * b.values().array()).exp().matrix()));
}

}  // namespace bilab
