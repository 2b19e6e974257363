#include "doctest.h"

#include <random>

#include "bilab/maximal.hpp"
#include "bilab/norms.hpp"

using namespace bilab;

namespace {

RealFunction random_function(const Mesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RealFunction f(mesh);
  for (Index i = 0; i < f.values().size(); ++i) f.values().data()[i] = g(rng);
  return f;
}

// Zero-mean one-parameter symbol with Haar coefficients N(0,1)|I|^{1/2}.
SideFunction<double> random_side_symbol(const Side& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const HaarFrame frame{DyadicGrid(s)};
  Eigen::VectorXd c = Eigen::VectorXd::Zero(frame.size());
  for (Index e : frame.cancellative_elements()) c[e] = g(rng) * std::sqrt(frame.volume_of(e));
  return SideFunction<double>(s, frame.values().transpose() * c);
}

GridPair random_grids(const Mesh& mesh, std::mt19937_64& rng) {
  const Side s1 = mesh.side(Axis::first), s2 = mesh.side(Axis::second);
  return GridPair(DyadicGrid(s1, sample_shift(rng, s1)), DyadicGrid(s2, sample_shift(rng, s2)));
}

}  // namespace

TEST_CASE("L^p norms") {
  const Mesh mesh{3, 1, 1};
  const RealFunction one = RealFunction::constant(mesh, 1.0);
  for (double p : {0.5, 2.0 / 3.0, 1.0, 2.0, 7.0, std::numeric_limits<double>::infinity()})
    CHECK(lp_norm(one, p) == doctest::Approx(1.0));
  RealFunction half(mesh);
  half.values().topRows(4).setOnes();
  CHECK(lp_norm(half, 2.0 / 3.0) == doctest::Approx(std::pow(0.5, 1.5)));
  CHECK_THROWS_AS(lp_norm(one, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lp_norm(one, -1.0), std::invalid_argument);

  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const RealFunction f = random_function(mesh, rng), g = random_function(mesh, rng);
    for (double r : {0.5, 2.0 / 3.0, 0.9}) {
      CHECK(std::pow(lp_norm(f + g, r), r) <= std::pow(lp_norm(f, r), r) + std::pow(lp_norm(g, r), r) + 1e-12);
      CHECK(lp_norm(-2.5 * f, r) == doctest::Approx(2.5 * lp_norm(f, r)));
    }
  }
  const Weight w(RealFunction::constant(mesh, 4.0));
  CHECK(lp_norm(one, 2.0, w) == doctest::Approx(2.0));
}

TEST_CASE("BMO of simple functions") {
  const Side s{Axis::first, 1, 4};
  const SideFunction<double> c(s, Eigen::VectorXd::Constant(16, 3.0));
  for (BmoMode mode : {BmoMode::dyadic, BmoMode::nondyadic, BmoMode::shifted}) CHECK(bmo_norm(c, mode) < 1e-14);
  const DyadicGrid standard(s);
  const SideFunction<double> h(s, haar_values({standard.cube(0, 0), 1}));
  CHECK(bmo_norm(h, standard) == doctest::Approx(1.0));
  const Mesh mesh{3, 1, 1};
  for (BmoMode mode : {BmoMode::dyadic, BmoMode::nondyadic, BmoMode::shifted})
    CHECK(bmo_norm(RealFunction::constant(mesh, -1.0), mode) < 1e-14);
}

TEST_CASE("BMO families are nested and ignore constants") {
  std::mt19937_64 rng(2);
  const Mesh mesh{3, 1, 1};
  for (int t = 0; t < 10; ++t) {
    const RealFunction b = random_function(mesh, rng);
    const double nd = bmo_norm(b, BmoMode::nondyadic);
    const double sh = bmo_norm(b, BmoMode::shifted);
    CHECK(nd >= sh - 1e-12);
    CHECK(sh >= bmo_norm(b, random_grids(mesh, rng)) - 1e-12);
    CHECK(bmo_norm(b + RealFunction::constant(mesh, 5.0), BmoMode::nondyadic) == doctest::Approx(nd));
    const SideFunction<double> u(mesh.side(Axis::first), b.values().col(0));
    CHECK(bmo_norm(u, BmoMode::nondyadic) >= bmo_norm(u, BmoMode::shifted) - 1e-12);
  }
}

TEST_CASE("little bmo is comparable to the uniform slice norms") {
  std::mt19937_64 rng(3);
  const Mesh mesh{3, 1, 1};
  double lo = 1e9, hi = 0.0;
  for (int t = 0; t < 50; ++t) {
    const RealFunction b = generate_bmo_function(rng, mesh, 1.0, BmoMode::nondyadic);
    const double ratio = bmo_norm(b, BmoMode::nondyadic) / slice_bmo_norm(b, BmoMode::nondyadic);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  MESSAGE("bmo / slice-BMO in [" << lo << ", " << hi << "]");
  CHECK(lo > 0.25);
  CHECK(hi < 4.0);
}

TEST_CASE("cube sequence BMO") {
  std::mt19937_64 rng(4);
  const Side s{Axis::second, 1, 5};
  CubeSequence a{DyadicGrid(s)};
  CHECK(sequence_bmo_norm(a) == 0.0);
  a(0, 0) = -0.7;
  CHECK(sequence_bmo_norm(a) == doctest::Approx(0.7));

  // a_V = |V|^{1/2}: every level contributes 1 below the top cube
  CubeSequence full{DyadicGrid(s, sample_shift(rng, s))};
  for (int j = 0; j <= 5; ++j) full.values[j].setConstant(std::sqrt(std::ldexp(1.0, -j)));
  CHECK(sequence_bmo_norm(full) == doctest::Approx(std::sqrt(6.0)));

  // brute force over V0 on shifted grids, d = 1 and 2
  for (int dim : {1, 2}) {
    const Side side{Axis::first, dim, 3};
    std::normal_distribution<double> g;
    for (int t = 0; t < 10; ++t) {
      CubeSequence r{DyadicGrid(side, sample_shift(rng, side))};
      for (auto& v : r.values)
        for (auto& x : v) x = g(rng);
      double best = 0.0;
      for (int j0 = 0; j0 <= 3; ++j0)
        for (const auto& V0 : enumerate_cubes(r.grid, j0)) {
          double mass = 0.0;
          for (int j = j0; j <= 3; ++j)
            for (const auto& V : enumerate_cubes(r.grid, j))
              if (V0.contains(V)) mass += std::pow(r(j, r.grid.label(V)), 2);
          best = std::max(best, std::sqrt(mass / V0.volume()));
        }
      CHECK(sequence_bmo_norm(r) == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("embedding a cube sequence at a fixed K0 scales the product norm by |K0|^{-1/2}") {
  std::mt19937_64 rng(5);
  const Mesh mesh{4, 1, 1};
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    const GridPair grids = random_grids(mesh, rng);
    CubeSequence a{grids.second};
    for (auto& v : a.values)
      for (auto& x : v) x = g(rng);
    const int k0 = t % 3;
    const int label = int(rng() % grids.first.count(k0));
    RectangleSequence lifted(grids);
    for (int j = 0; j <= 4; ++j) lifted.block(k0, j).row(label) = a.values[j].transpose();
    const ProductBmo p = sequence_bmo_norm(lifted);
    const double expected = sequence_bmo_norm(a) / std::sqrt(std::ldexp(1.0, -k0));
    CHECK(std::abs(p.family - expected) <= 1e-12 * expected);
    CHECK(std::abs(p.rectangles - expected) <= 1e-12 * expected);
  }
}

TEST_CASE("product BMO estimates") {
  std::mt19937_64 rng(6);
  const Mesh mesh{3, 1, 1};
  const GridPair grids = random_grids(mesh, rng);
  const ProductBmo zero = product_bmo_estimate(RealFunction::constant(mesh, 2.0), grids);
  CHECK(zero.rectangles < 1e-12);
  CHECK(zero.family < 1e-12);

  const DyadicCube I = grids.first.cube(1, 1), J = grids.second.cube(2, 3);
  const RealFunction single = -1.5 * haar_function(mesh, {I, 1}, {J, 1});
  const ProductBmo p = product_bmo_estimate(single, grids);
  const double expected = 1.5 / std::sqrt(I.volume() * J.volume());
  CHECK(p.rectangles == doctest::Approx(expected));
  CHECK(p.family == doctest::Approx(expected));

  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const RealFunction b = generate_bmo_function(rng, mesh, 1.0, BmoMode::nondyadic);
    const ProductBmo e = product_bmo_estimate(b, grids);
    CHECK(e.family >= e.rectangles);
    worst = std::max(worst, e.family);
  }
  MESSAGE("product BMO heuristic / bmo over 50 symbols: max " << worst);
  CHECK(worst < 10.0);

  // a supplied set can only raise the family estimate
  const Eigen::MatrixXd everything = Eigen::MatrixXd::Ones(8, 8);
  const RealFunction b = random_function(mesh, rng);
  CHECK(product_bmo_estimate(b, grids, {everything}).family >= product_bmo_estimate(b, grids).family);
  CHECK_THROWS_AS(product_bmo_estimate(b, grids, {Eigen::MatrixXd::Ones(2, 2)}), MeshError);
}

TEST_CASE("A_p characteristics") {
  const Side s{Axis::first, 1, 3};
  CHECK(ap_characteristic(SideFunction<double>(s, Eigen::VectorXd::Ones(8)), 2.0) == doctest::Approx(1.0));
  Eigen::VectorXd step(8);
  step << 2, 2, 2, 2, 1, 1, 1, 1;
  CHECK(ap_characteristic(SideFunction<double>(s, step), 2.0) == doctest::Approx(9.0 / 8.0));
  CHECK_THROWS_AS(ap_characteristic(SideFunction<double>(s, step), 1.0), std::invalid_argument);

  const Mesh mesh{3, 1, 1};
  CHECK(ap_characteristic(Weight(RealFunction::constant(mesh, 3.0)), 3.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(Weight(RealFunction::constant(mesh, 0.0)), std::invalid_argument);

  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const Weight w = generate_weight(rng, mesh, 2.0, 0.5);
    for (double p : {1.5, 2.0, 4.0}) {
      const double bi = ap_characteristic(w, p);
      CHECK(bi > 1.0);
      CHECK(ap_characteristic(w, p, ApMode::slices_first) <= bi * (1 + 1e-12));
      CHECK(ap_characteristic(w, p, ApMode::slices_second) <= bi * (1 + 1e-12));
      CHECK(ap_characteristic(w, p) == bi);  // cached
    }
  }
}

TEST_CASE("generated symbols and weights") {
  const Mesh mesh{4, 1, 1};
  std::mt19937_64 a(8), b(9);
  const RealFunction x = generate_bmo_function(a, mesh, 1.0);
  const RealFunction y = generate_bmo_function(b, mesh, 2.0, BmoMode::dyadic);
  CHECK(bmo_norm(x, BmoMode::shifted) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bmo_norm(y, BmoMode::dyadic) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(x.values().mean()) < 1e-12);
  CHECK((x.values() - 0.5 * y.values()).cwiseAbs().maxCoeff() > 1e-3);
  CHECK_THROWS_AS(generate_bmo_function(a, mesh, 0.0), std::invalid_argument);

  std::mt19937_64 r0(10);
  const Weight flat = generate_weight(r0, mesh, 2.0, 0.0);
  CHECK(ap_characteristic(flat, 2.0) == doctest::Approx(1.0));
  double previous = 1.0;
  for (double lambda : {0.125, 0.25, 0.5, 1.0}) {
    std::mt19937_64 r(11);
    const double c = ap_characteristic(generate_weight(r, mesh, 2.0, lambda), 2.0);
    MESSAGE("lambda " << lambda << ": [w]_A2 = " << c);
    CHECK(c > previous);
    previous = c;
  }
}

TEST_CASE("adapted maximal bound is stable in L") {
  // one-parameter, b normalised in non-dyadic BMO
  std::vector<double> constants;
  for (int L : {4, 5, 6}) {
    std::mt19937_64 rng(12);
    const Side s{Axis::first, 1, L};
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      SideFunction<double> b = random_side_symbol(s, rng);
      b.values /= bmo_norm(b, BmoMode::nondyadic);
      SideFunction<double> f(s);
      for (auto& v : f.values) v = g(rng);
      worst = std::max(worst, adapted_maximal(b, f).values.norm() / f.values.norm());
    }
    constants.push_back(worst);
  }
  MESSAGE("|M_b f|_2/|f|_2 at L = 4, 5, 6: " << constants[0] << " " << constants[1] << " " << constants[2]);
  CHECK(*std::max_element(constants.begin(), constants.end()) <
        2.0 * *std::min_element(constants.begin(), constants.end()));
}

TEST_CASE("Fefferman-Stein ratio is stable in L") {
  std::vector<double> constants;
  for (int L : {4, 5, 6}) {
    std::mt19937_64 rng(13);
    const Side s{Axis::first, 1, L};
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd lhs = Eigen::VectorXd::Zero(s.cells()), rhs = lhs;
      for (int j = 0; j < 8; ++j) {
        SideFunction<double> f(s);
        // sparse bumps make the maximal function spread
        for (auto& v : f.values) v = (rng() % 8 == 0) ? g(rng) : 0.0;
        lhs += maximal(f).values.cwiseAbs2();
        rhs += f.values.cwiseAbs2();
      }
      if (rhs.sum() > 0) worst = std::max(worst, std::sqrt(lhs.sum() / rhs.sum()));
    }
    constants.push_back(worst);
  }
  MESSAGE("Fefferman-Stein ratios at L = 4, 5, 6: " << constants[0] << " " << constants[1] << " " << constants[2]);
  CHECK(*std::max_element(constants.begin(), constants.end()) <
        2.0 * *std::min_element(constants.begin(), constants.end()));
}
