#include "bilab/paraproducts.hpp"

#include <stdexcept>

namespace bilab {

ParaproductModes paraproduct_modes(int i) {
  constexpr Factor D = Factor::delta, E = Factor::average;
  switch (i) {
    case 1: return {D, D, D, D};
    case 2: return {D, D, E, D};
    case 3: return {D, D, D, E};
    case 4: return {D, D, E, E};
    case 5: return {E, D, D, D};
    case 6: return {E, D, D, E};
    case 7: return {D, E, D, D};
    case 8: return {D, E, E, D};
    default: throw std::invalid_argument("paraproduct index must be in 1..8");
  }
}

RealFunction expansion_target(const Mesh& mesh, const HaarIndex& hI, const HaarIndex& hJ, Expansion mode) {
  check_axis(mesh, hI.cube, Axis::first);
  check_axis(mesh, hJ.cube, Axis::second);
  const bool cancel_first = mode == Expansion::biparameter || mode == Expansion::mixed_first;
  const bool cancel_second = mode == Expansion::biparameter || mode == Expansion::mixed_second;
  if ((cancel_first && hI.eta == 0) || (cancel_second && hJ.eta == 0))
    throw std::invalid_argument("expansion target needs a cancellative Haar function");
  const Eigen::VectorXd u = cancel_first ? haar_values(hI) : Eigen::VectorXd(hI.cube.indicator() / hI.cube.volume());
  const Eigen::VectorXd v = cancel_second ? haar_values(hJ) : Eigen::VectorXd(hJ.cube.indicator() / hJ.cube.volume());
  return tensor<double>(mesh, u, v);
}

namespace {

// sum of Delta_{I1} over I1 inside I0, as a matrix acting on one side
Eigen::MatrixXd inner_differences(const DyadicCube& I0, double cell_volume) {
  const Index n = Index(1) << (I0.resolution * I0.dim);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int d = 0; I0.level + d < I0.resolution; ++d) {
    for (const DyadicCube& q : descendants(I0, d)) {
      for (int eta = 1; eta < (1 << q.dim); ++eta) {
        const Eigen::VectorXd h = haar_values(HaarIndex{q, eta});
        p += h * h.transpose() * cell_volume;
      }
    }
  }
  return p;
}

Eigen::MatrixXd average_on(const DyadicCube& I0) {
  const Eigen::VectorXd ind = I0.indicator();
  return ind * ind.transpose() / ind.sum();
}

}  // namespace

std::array<RealFunction, 4> localized_blocks(const RealFunction& b, const DyadicCube& I0, const DyadicCube& J0) {
  const Mesh& mesh = b.mesh();
  check_axis(mesh, I0, Axis::first);
  check_axis(mesh, J0, Axis::second);
  const Eigen::MatrixXd d1 = inner_differences(I0, mesh.side(Axis::first).cell_volume());
  const Eigen::MatrixXd d2 = inner_differences(J0, mesh.side(Axis::second).cell_volume());
  const Eigen::MatrixXd e1 = average_on(I0), e2 = average_on(J0);
  const Eigen::MatrixXd& v = b.values();
  return {RealFunction(mesh, d1 * v * d2), RealFunction(mesh, e1 * v * d2), RealFunction(mesh, d1 * v * e2),
          RealFunction(mesh, e1 * v * e2)};
}

}  // namespace bilab
