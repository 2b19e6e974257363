#include "bilab/norms.hpp"

#include <algorithm>
#include <sstream>

#include "bilab/maximal.hpp"
#include "bilab/tables.hpp"
#include "windows.hpp"

namespace bilab {

using namespace windows;

Weight::Weight(RealFunction w) : w_(std::move(w)) {
  if (!(w_.values().minCoeff() > 0)) throw std::invalid_argument("a weight must be strictly positive");
}

namespace {

void check_p(double p) {
  if (!(p > 1) || std::isinf(p)) throw std::invalid_argument("A_p needs 1 < p < infinity");
}

// sup over windows of <w> <w^{1-p'}>^{p-1}
double ap_windows(const double* w, const Box& box, const std::vector<std::vector<int>>& groups, double p) {
  const double dual = 1.0 - p / (p - 1.0);
  std::vector<double> sigma(box.cells);
  for (Index k = 0; k < box.cells; ++k) sigma[k] = std::pow(w[k], dual);
  std::vector<int> sizes(groups.size(), 1);
  std::vector<double> aw, as;
  double best = 0.0;
  do {
    window_averages(w, box, groups, sizes, aw);
    window_averages(sigma.data(), box, groups, sizes, as);
    for (Index k = 0; k < box.cells; ++k) best = std::max(best, aw[k] * std::pow(as[k], p - 1.0));
  } while (next_sizes(sizes, box.N, false));
  return best;
}

}  // namespace

double ap_characteristic(const SideFunction<double>& w, double p) {
  check_p(p);
  if (!(w.values.minCoeff() > 0)) throw std::invalid_argument("a weight must be strictly positive");
  return ap_windows(w.values.data(), box_of(w.side), {range(0, w.side.dim)}, p);
}

double Weight::characteristic(double p, ApMode mode) const {
  check_p(p);
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->values.find({p, mode});
    if (it != cache_->values.end()) return it->second;
  }
  const Mesh& mesh = w_.mesh();
  double value = 0.0;
  switch (mode) {
    case ApMode::biparameter:
      value = ap_windows(w_.values().data(), box_of(mesh), {range(0, mesh.n), range(mesh.n, mesh.m)}, p);
      break;
    case ApMode::slices_first:
      for (Index q = 0; q < w_.values().cols(); ++q)
        value = std::max(value, ap_characteristic(SideFunction<double>(mesh.side(Axis::first), w_.values().col(q)), p));
      break;
    case ApMode::slices_second:
      for (Index r = 0; r < w_.values().rows(); ++r)
        value = std::max(value,
                         ap_characteristic(SideFunction<double>(mesh.side(Axis::second), w_.values().row(r).transpose()), p));
      break;
  }
  std::lock_guard<std::mutex> lock(cache_->mutex);
  cache_->values.emplace(std::make_pair(p, mode), value);
  return value;
}

double ap_characteristic(const Weight& w, double p, ApMode mode) { return w.characteristic(p, mode); }

// ---- BMO ----

namespace {

double mean_oscillation(const Eigen::VectorXd& v, const std::vector<Index>& cells) {
  double mean = 0.0;
  for (Index c : cells) mean += v[c];
  mean /= double(cells.size());
  double osc = 0.0;
  for (Index c : cells) osc += std::abs(v[c] - mean);
  return osc / double(cells.size());
}

// sup over level pairs of E_i E_j |b - E_i E_j b|
double dyadic_bmo(const RealFunction& b, const GridPair& grids) {
  double best = 0.0;
  const int L = b.mesh().levels;
  for (int i = 0; i <= L; ++i) {
    for (int j = 0; j <= L; ++j) {
      const RealFunction mean = level_expectation(level_expectation(b, grids.first, i), grids.second, j);
      const RealFunction dev(b.mesh(), (b.values() - mean.values()).cwiseAbs());
      const RealFunction osc = level_expectation(level_expectation(dev, grids.first, i), grids.second, j);
      best = std::max(best, osc.values().maxCoeff());
    }
  }
  return best;
}

}  // namespace

double bmo_norm(const SideFunction<double>& b, const DyadicGrid& grid) {
  if (!(b.side == grid.side())) throw MeshError("grid does not match the side");
  double best = 0.0;
  for (int level = 0; level <= grid.levels(); ++level)
    for (const DyadicCube& q : enumerate_cubes(grid, level)) best = std::max(best, mean_oscillation(b.values, q.cells()));
  return best;
}

double bmo_norm(const SideFunction<double>& b, BmoMode mode) {
  if (mode == BmoMode::dyadic) return bmo_norm(b, DyadicGrid(b.side));
  double best = 0.0;
  for_each_window(b.side, mode == BmoMode::shifted,
                  [&](const std::vector<Index>& cells) { best = std::max(best, mean_oscillation(b.values, cells)); });
  return best;
}

double bmo_norm(const RealFunction& b, const GridPair& grids) {
  check_same(b.mesh(), grids.mesh());
  return dyadic_bmo(b, grids);
}

double bmo_norm(const RealFunction& b, BmoMode mode) {
  const Mesh& mesh = b.mesh();
  if (mode == BmoMode::dyadic) return dyadic_bmo(b, GridPair(mesh));
  const bool dyadic_sizes = mode == BmoMode::shifted;
  const Eigen::MatrixXd& B = b.values();
  double best = 0.0;
  for_each_window(mesh.side(Axis::first), dyadic_sizes, [&](const std::vector<Index>& rows) {
    for_each_window(mesh.side(Axis::second), dyadic_sizes, [&](const std::vector<Index>& cols) {
      double mean = 0.0;
      for (Index q : cols)
        for (Index p : rows) mean += B(p, q);
      mean /= double(rows.size() * cols.size());
      double osc = 0.0;
      for (Index q : cols)
        for (Index p : rows) osc += std::abs(B(p, q) - mean);
      best = std::max(best, osc / double(rows.size() * cols.size()));
    });
  });
  return best;
}

double slice_bmo_norm(const RealFunction& b, BmoMode mode) {
  const Mesh& mesh = b.mesh();
  double best = 0.0;
  for (Index q = 0; q < b.values().cols(); ++q)
    best = std::max(best, bmo_norm(SideFunction<double>(mesh.side(Axis::first), b.values().col(q)), mode));
  for (Index r = 0; r < b.values().rows(); ++r)
    best = std::max(best, bmo_norm(SideFunction<double>(mesh.side(Axis::second), b.values().row(r).transpose()), mode));
  return best;
}

// ---- sequence BMO ----

CubeSequence::CubeSequence(DyadicGrid g) : grid(std::move(g)) {
  for (int level = 0; level <= grid.levels(); ++level) values.push_back(Eigen::VectorXd::Zero(grid.count(level)));
}

namespace {

// anc[level][k][label] = label of the level-k ancestor (k <= level)
std::vector<std::vector<std::vector<int>>> ancestor_labels(const DyadicGrid& grid) {
  const int L = grid.levels();
  std::vector<std::vector<std::vector<int>>> anc(L + 1);
  for (int level = 0; level <= L; ++level) {
    anc[level].resize(level + 1);
    for (int k = 0; k <= level; ++k) {
      anc[level][k].resize(grid.count(level));
      for (int lab = 0; lab < grid.count(level); ++lab)
        anc[level][k][lab] = grid.label(grid.ancestor(grid.cube(level, lab), level - k));
    }
  }
  return anc;
}

}  // namespace

double sequence_bmo_norm(const CubeSequence& a) {
  const DyadicGrid& grid = a.grid;
  const int L = grid.levels();
  const auto anc = ancestor_labels(grid);
  std::vector<Eigen::VectorXd> mass;
  for (int level = 0; level <= L; ++level) mass.push_back(Eigen::VectorXd::Zero(grid.count(level)));
  for (int level = 0; level <= L; ++level)
    for (int lab = 0; lab < grid.count(level); ++lab) {
      const double m = a(level, lab) * a(level, lab);
      if (m == 0) continue;
      for (int k = 0; k <= level; ++k) mass[k][anc[level][k][lab]] += m;
    }
  double best = 0.0;
  for (int k = 0; k <= L; ++k) {
    const double vol = std::ldexp(1.0, -k * grid.dim());
    best = std::max(best, std::sqrt(mass[k].maxCoeff() / vol));
  }
  return best;
}

RectangleSequence::RectangleSequence(GridPair g) : grids(std::move(g)) {
  const int L = grids.first.levels();
  for (int i = 0; i <= L; ++i)
    for (int j = 0; j <= L; ++j)
      values.push_back(Eigen::MatrixXd::Zero(grids.first.count(i), grids.second.count(j)));
}

namespace {

// cells x labels indicator of the level's cubes
Eigen::MatrixXd label_matrix(const DyadicGrid& grid, int level) {
  const std::vector<int> lab = cube_labels(grid, level);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Index(lab.size()), grid.count(level));
  for (Index c = 0; c < Index(lab.size()); ++c) m(c, lab[c]) = 1.0;
  return m;
}

}  // namespace

ProductBmo sequence_bmo_norm(const RectangleSequence& a, const std::vector<Eigen::MatrixXd>& extra_sets,
                             int thresholds) {
  const GridPair& g = a.grids;
  const int L = a.levels();
  const double v1 = 1.0 / g.first.side().cells(), v2 = 1.0 / g.second.side().cells();
  std::vector<Eigen::MatrixXd> lab1, lab2;
  for (int k = 0; k <= L; ++k) {
    lab1.push_back(label_matrix(g.first, k));
    lab2.push_back(label_matrix(g.second, k));
  }

  // Single rectangles: mass below each R0, pushed up through the ancestor maps.
  const auto anc1 = ancestor_labels(g.first), anc2 = ancestor_labels(g.second);
  std::vector<Eigen::MatrixXd> below;
  for (const auto& m : a.values) below.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  for (int i = 0; i <= L; ++i)
    for (int j = 0; j <= L; ++j) {
      const Eigen::MatrixXd& m = a.block(i, j);
      for (Index lj = 0; lj < m.cols(); ++lj)
        for (Index li = 0; li < m.rows(); ++li) {
          const double mass = m(li, lj) * m(li, lj);
          if (mass == 0) continue;
          for (int i0 = 0; i0 <= i; ++i0)
            for (int j0 = 0; j0 <= j; ++j0) below[i0 * (L + 1) + j0](anc1[i][i0][li], anc2[j][j0][lj]) += mass;
        }
    }
  ProductBmo out;
  for (int i = 0; i <= L; ++i)
    for (int j = 0; j <= L; ++j) {
      const double vol = std::ldexp(1.0, -i * g.first.dim() - j * g.second.dim());
      out.rectangles = std::max(out.rectangles, std::sqrt(below[i * (L + 1) + j].maxCoeff() / vol));
    }

  // Omega given as a cell mask.
  auto evaluate = [&](const Eigen::MatrixXd& mask) {
    const double measure = (mask.array() != 0).cast<double>().sum() * v1 * v2;
    if (measure == 0) return 0.0;
    const Eigen::MatrixXd inside = (mask.array() != 0).cast<double>().matrix();
    double mass = 0.0;
    for (int i = 0; i <= L; ++i)
      for (int j = 0; j <= L; ++j) {
        const Eigen::MatrixXd counts = lab1[i].transpose() * inside * lab2[j];
        const double full = double(g.first.side().cells() / g.first.count(i)) *
                            double(g.second.side().cells() / g.second.count(j));
        const Eigen::MatrixXd& m = a.block(i, j);
        for (Index lj = 0; lj < m.cols(); ++lj)
          for (Index li = 0; li < m.rows(); ++li)
            if (counts(li, lj) >= full - 0.5) mass += m(li, lj) * m(li, lj);
      }
    return std::sqrt(mass / measure);
  };

  // square function of the sequence, sum |a_R|^2 1_R / |R|
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(g.first.side().cells(), g.second.side().cells());
  for (int i = 0; i <= L; ++i)
    for (int j = 0; j <= L; ++j) {
      const double vol = std::ldexp(1.0, -i * g.first.dim() - j * g.second.dim());
      sq += lab1[i] * a.block(i, j).cwiseAbs2() * lab2[j].transpose() / vol;
    }
  std::vector<double> levels(sq.data(), sq.data() + sq.size());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  levels.erase(std::remove(levels.begin(), levels.end(), 0.0), levels.end());
  out.family = out.rectangles;
  int used = 0;
  if (!levels.empty()) {
    const int count = std::min<int>(thresholds, int(levels.size()));
    for (int t = 0; t < count; ++t) {
      const double lambda = levels[std::size_t(double(t) / count * double(levels.size()))];
      out.family = std::max(out.family, evaluate((sq.array() >= lambda).cast<double>().matrix()));
      ++used;
    }
  }
  for (const auto& mask : extra_sets) {
    if (mask.rows() != sq.rows() || mask.cols() != sq.cols()) throw MeshError("set mask has the wrong shape");
    out.family = std::max(out.family, evaluate(mask));
  }
  std::ostringstream d;
  d << "dyadic rectangles + " << used << " square-function level sets + " << extra_sets.size() << " supplied sets";
  out.description = d.str();
  return out;
}

RectangleSequence haar_sequence(const RealFunction& b, const GridPair& grids) {
  check_same(b.mesh(), grids.mesh());
  const FramePair frames(grids);
  const Eigen::MatrixXd c = haar_table(frames, b);
  RectangleSequence a(grids);
  for (Index e1 : frames.first.cancellative_elements())
    for (Index e2 : frames.second.cancellative_elements()) {
      const auto& i1 = frames.first.info(e1);
      const auto& i2 = frames.second.info(e2);
      double& v = a(i1.level, i1.label, i2.level, i2.label);
      v = std::sqrt(v * v + c(e1, e2) * c(e1, e2));
    }
  return a;
}

ProductBmo product_bmo_estimate(const RealFunction& b, const GridPair& grids,
                                const std::vector<Eigen::MatrixXd>& extra_sets) {
  return sequence_bmo_norm(haar_sequence(b, grids), extra_sets);
}

RealFunction random_haar_symbol(const Mesh& mesh, const std::vector<double>& gaussians) {
  const FramePair frames{GridPair(mesh)};
  const auto& b1 = frames.first.basis();
  const auto& b2 = frames.second.basis();
  if (gaussians.size() != b1.size() * b2.size()) throw std::invalid_argument("wrong number of coefficients");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(frames.first.size(), frames.second.size());
  for (std::size_t q = 0; q < b2.size(); ++q)
    for (std::size_t p = 0; p < b1.size(); ++p) {
      if (p == 0 && q == 0) continue;  // the top average: zero mean
      const double scale = std::sqrt(frames.first.volume_of(b1[p]) * frames.second.volume_of(b2[q]));
      c(b1[p], b2[q]) = gaussians[p + b1.size() * q] * scale;
    }
  return synthesize_table(frames, mesh, c);
}

}  // namespace bilab
