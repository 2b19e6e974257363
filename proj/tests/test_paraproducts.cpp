#include "doctest.h"

#include <complex>
#include <random>

#include "bilab/paraproducts.hpp"

using namespace bilab;

namespace {

template <typename S = double>
GridFunction<S> random_function(const Mesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  GridFunction<S> f(mesh);
  for (Index i = 0; i < f.values().size(); ++i) {
    if constexpr (is_complex<S>::value)
      f.values().data()[i] = S(g(rng), g(rng));
    else
      f.values().data()[i] = g(rng);
  }
  return f;
}

GridPair random_grids(const Mesh& mesh, std::mt19937_64& rng) {
  const Side s1 = mesh.side(Axis::first), s2 = mesh.side(Axis::second);
  return GridPair(DyadicGrid(s1, sample_shift(rng, s1)), DyadicGrid(s2, sample_shift(rng, s2)));
}

template <typename S>
double max_abs(const GridFunction<S>& f) {
  return f.values().cwiseAbs().maxCoeff();
}

template <typename S>
GridFunction<S> project(const GridFunction<S>& f, const DyadicCube& q, Factor mode) {
  return martingale_difference(f, q, mode == Factor::delta ? Projection::delta : Projection::expectation);
}

// Direct sum over rectangles of pointwise products of projections.
template <typename S>
GridFunction<S> oracle_A(int i, const RealFunction& b, const GridFunction<S>& f, const GridPair& g) {
  const ParaproductModes m = paraproduct_modes(i);
  const GridFunction<S> bs = b.template cast<S>();
  GridFunction<S> out(f.mesh());
  for (int li = 0; li < g.first.levels(); ++li) {
    for (const auto& I : enumerate_cubes(g.first, li)) {
      const GridFunction<S> b1 = project(bs, I, m.b_first), f1 = project(f, I, m.f_first);
      for (int lj = 0; lj < g.second.levels(); ++lj) {
        for (const auto& J : enumerate_cubes(g.second, lj)) {
          const GridFunction<S> bb = project(b1, J, m.b_second), ff = project(f1, J, m.f_second);
          out.values() += bb.values().cwiseProduct(ff.values());
        }
      }
    }
  }
  return out;
}

template <typename S>
GridFunction<S> oracle_a(int j, const RealFunction& b, const GridFunction<S>& f, const DyadicGrid& g) {
  const GridFunction<S> bs = b.template cast<S>();
  GridFunction<S> out(f.mesh());
  for (int l = 0; l < g.levels(); ++l) {
    for (const auto& I : enumerate_cubes(g, l)) {
      const GridFunction<S> bb = project(bs, I, Factor::delta);
      const GridFunction<S> ff = project(f, I, j == 1 ? Factor::delta : Factor::average);
      out.values() += bb.values().cwiseProduct(ff.values());
    }
  }
  return out;
}

}  // namespace

TEST_CASE("paraproduct mode table") {
  CHECK(paraproduct_modes(1).f_first == Factor::delta);
  CHECK(paraproduct_modes(4).f_second == Factor::average);
  CHECK(paraproduct_modes(6).b_first == Factor::average);
  CHECK(paraproduct_modes(8).b_second == Factor::average);
  CHECK_THROWS_AS(paraproduct_modes(0), std::invalid_argument);
  CHECK_THROWS_AS(paraproduct_modes(9), std::invalid_argument);
}

TEST_CASE("constant symbols give zero") {
  std::mt19937_64 rng(1);
  const Mesh mesh{3, 1, 2};
  const GridPair g = random_grids(mesh, rng);
  const RealFunction b = RealFunction::constant(mesh, 3.0);
  const RealFunction f = random_function(mesh, rng);
  for (int i = 1; i <= 8; ++i) CHECK(max_abs(paraproduct_A(i, b, f, g)) < 1e-12);
  for (int j = 1; j <= 2; ++j) {
    CHECK(max_abs(paraproduct_a(j, b, f, g.first)) < 1e-12);
    CHECK(max_abs(paraproduct_a(j, b, f, g.second)) < 1e-12);
  }
}

TEST_CASE("top-cube Haar products") {
  const Mesh mesh{3, 1, 1};
  const GridPair g(mesh);
  const RealFunction h = haar_function(mesh, {g.first.cube(0, 0), 1}, {g.second.cube(0, 0), 1});
  const RealFunction a1 = paraproduct_A(1, h, h, g);
  CHECK((a1.values().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(max_abs(paraproduct_A(2, h, h, g)) < 1e-12);
}

TEST_CASE("a_2 against the constant function") {
  std::mt19937_64 rng(2);
  const Mesh mesh{3, 2, 1};
  const GridPair g = random_grids(mesh, rng);
  const RealFunction b = random_function(mesh, rng);
  const RealFunction one = RealFunction::constant(mesh, 1.0);
  for (Axis a : {Axis::first, Axis::second}) {
    const DyadicCube top = g.on(a).cube(0, 0);
    const RealFunction expected = b - martingale_difference(b, top, Projection::expectation);
    CHECK(max_abs(paraproduct_a(2, b, one, g.on(a)) - expected) < 1e-12);
  }
}

TEST_CASE("paraproducts agree with direct sums over rectangles") {
  std::mt19937_64 rng(3);
  for (auto mesh : {Mesh{3, 1, 1}, Mesh{2, 2, 1}, Mesh{2, 1, 2}}) {
    for (int t = 0; t < 3; ++t) {
      const GridPair g = random_grids(mesh, rng);
      const RealFunction b = random_function(mesh, rng);
      const RealFunction f = random_function(mesh, rng);
      const ComplexFunction z = random_function<std::complex<double>>(mesh, rng);
      for (int i = 1; i <= 8; ++i) {
        CAPTURE(i);
        CHECK(max_abs(paraproduct_A(i, b, f, g) - oracle_A(i, b, f, g)) < 1e-10);
        CHECK(max_abs(paraproduct_A(i, b, z, g) - oracle_A(i, b, z, g)) < 1e-10);
      }
      for (int j = 1; j <= 2; ++j) {
        CHECK(max_abs(paraproduct_a(j, b, f, g.first) - oracle_a(j, b, f, g.first)) < 1e-10);
        CHECK(max_abs(paraproduct_a(j, 2, b, z, FramePair(g)) - oracle_a(j, b, z, g.second)) < 1e-10);
      }
    }
  }
}

TEST_CASE("paraproducts are bilinear") {
  std::mt19937_64 rng(4);
  const Mesh mesh{3, 1, 1};
  const FramePair frames(random_grids(mesh, rng));
  const RealFunction b = random_function(mesh, rng), c = random_function(mesh, rng);
  const RealFunction f = random_function(mesh, rng), k = random_function(mesh, rng);
  for (int i = 1; i <= 8; ++i) {
    const RealFunction lhs = paraproduct_A(i, 2.0 * b - c, f + 3.0 * k, frames);
    const RealFunction rhs = 2.0 * paraproduct_A(i, b, f, frames) + 6.0 * paraproduct_A(i, b, k, frames) -
                             paraproduct_A(i, c, f, frames) - 3.0 * paraproduct_A(i, c, k, frames);
    CHECK(max_abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("expansions are exact on the truncated grid") {
  std::mt19937_64 rng(5);
  for (auto mesh : {Mesh{3, 1, 1}, Mesh{2, 2, 1}, Mesh{2, 1, 2}}) {
    for (int t = 0; t < 3; ++t) {
      const FramePair frames(random_grids(mesh, rng));
      const RealFunction b = random_function(mesh, rng);
      const RealFunction f = random_function(mesh, rng);
      const ComplexFunction z = random_function<std::complex<double>>(mesh, rng);
      for (Expansion e : {Expansion::biparameter, Expansion::mixed_first, Expansion::mixed_second, Expansion::none}) {
        CHECK(max_expansion_residual(b, f, frames, e) < 1e-12);
        CHECK(max_expansion_residual(b, z, frames, e) < 1e-12);
      }
    }
  }
}

TEST_CASE("expand_product at single targets") {
  std::mt19937_64 rng(6);
  const Mesh mesh{3, 1, 1};
  const FramePair frames(random_grids(mesh, rng));
  const RealFunction b = random_function(mesh, rng);
  const RealFunction f = random_function(mesh, rng);
  const HaarIndex hI{frames.first.grid().cube(1, 1), 1};
  const HaarIndex hJ{frames.second.grid().cube(2, 3), 1};

  auto d = expand_product(b, f, frames, hI, hJ, Expansion::biparameter);
  CHECK(d.terms.size() == 9);
  CHECK(d.relative_residual() < 1e-12);
  d = expand_product(b, f, frames, hI, hJ, Expansion::mixed_first);
  CHECK(d.terms.size() == 4);
  CHECK(d.relative_residual() < 1e-12);
  d = expand_product(b, f, frames, hI, hJ, Expansion::mixed_second);
  CHECK(d.terms.size() == 4);
  CHECK(d.relative_residual() < 1e-12);
  d = expand_product(b, f, frames, hI, hJ, Expansion::none);
  CHECK(d.terms.size() == 2);
  CHECK(d.relative_residual() < 1e-12);

  // the finest level has no cancellative Haar function
  const HaarIndex fine{frames.first.grid().cube(3, 0), 0};
  CHECK_THROWS_AS(expansion_target(mesh, fine, hJ, Expansion::biparameter), std::invalid_argument);
  CHECK_NOTHROW(expansion_target(mesh, fine, hJ, Expansion::mixed_second));
}

TEST_CASE("the slice term vanishes when b depends only on the cancellative axis") {
  std::mt19937_64 rng(7);
  const Mesh mesh{3, 1, 1};
  const FramePair frames(random_grids(mesh, rng));
  std::normal_distribution<double> g;
  Eigen::VectorXd u(8), one = Eigen::VectorXd::Ones(8);
  for (auto& x : u) x = g(rng);
  const RealFunction f = random_function(mesh, rng);
  // b depends on x_1 only: <b>_{I,1} is constant in x_2 and equals <b>_R.
  const RealFunction b1 = tensor<double>(mesh, u, one);
  const RealFunction b2 = tensor<double>(mesh, one, u);
  for (int l = 0; l < 3; ++l) {
    const HaarIndex hI{frames.first.grid().cube(l, 0), 1};
    const HaarIndex hJ{frames.second.grid().cube(l, 0), 1};
    const auto d1 = expand_product(b1, f, frames, hI, hJ, Expansion::mixed_first);
    CHECK(std::abs(d1.terms[2].second) < 1e-13);
    const auto d2 = expand_product(b2, f, frames, hI, hJ, Expansion::mixed_second);
    CHECK(std::abs(d2.terms[2].second) < 1e-13);
  }
}

TEST_CASE("localized blocks reassemble 1_R b") {
  std::mt19937_64 rng(8);
  for (auto mesh : {Mesh{3, 1, 1}, Mesh{2, 2, 1}}) {
    const GridPair g = random_grids(mesh, rng);
    const RealFunction b = random_function(mesh, rng);
    const DyadicRectangle R{g.first.cube(1, 1), g.second.cube(2, 1)};
    const auto blocks = localized_blocks(b, R.first, R.second);
    RealFunction sum(mesh);
    for (const auto& x : blocks) sum += x;
    RealFunction expected = b;
    expected.values() = expected.values().cwiseProduct(indicator(mesh, R).values());
    CHECK(max_abs(sum - expected) < 1e-12);
    // the mean block is <b>_R on R
    CHECK(max_abs(blocks[3] - cube_average(b, R) * indicator(mesh, R)) < 1e-12);
  }
}

TEST_CASE("constant symbols reduce the expansion to the mean term") {
  std::mt19937_64 rng(9);
  const Mesh mesh{3, 1, 1};
  const FramePair frames(random_grids(mesh, rng));
  const RealFunction b = RealFunction::constant(mesh, 0.75);
  const RealFunction f = random_function(mesh, rng);
  const HaarIndex hI{frames.first.grid().cube(2, 1), 1}, hJ{frames.second.grid().cube(0, 0), 1};
  const auto d = expand_product(b, f, frames, hI, hJ, Expansion::biparameter);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(d.terms[i].second) < 1e-13);
  CHECK(d.lhs == doctest::Approx(0.75 * haar_pair(f, hI, hJ)).epsilon(1e-13));
}

TEST_CASE("one-parameter paraproducts localise") {
  std::mt19937_64 rng(10);
  const Mesh mesh{3, 1, 1};
  for (int t = 0; t < 20; ++t) {
    const GridPair g = random_grids(mesh, rng);
    const RealFunction b = random_function(mesh, rng);
    const RealFunction f = random_function(mesh, rng);
    for (int j = 1; j <= 2; ++j) {
      const RealFunction a = paraproduct_a(j, b, f, g.first);
      for (int k = 0; k < 3; ++k)
        for (const DyadicCube& K : enumerate_cubes(g.first, k))
          for (int v = 0; v <= 3; ++v)
            for (const DyadicCube& V : enumerate_cubes(g.second, v)) {
              const DyadicRectangle R{K, V};
              const RealFunction phi =
                  tensor<double>(mesh, haar_values({K, 1}), Eigen::VectorXd(V.indicator() / V.volume()));
              const RealFunction local(mesh, f.values().cwiseProduct(indicator(mesh, R).values()));
              CHECK(pair(paraproduct_a(j, b, local, g.first), phi) == doctest::Approx(pair(a, phi)).epsilon(1e-11));
            }
    }
  }
}
