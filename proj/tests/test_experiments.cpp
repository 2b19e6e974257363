#include "doctest.h"

#include <random>

#include "bilab/experiments.hpp"

using namespace bilab;

namespace {

RealFunction random_function(const Mesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RealFunction f(mesh);
  for (Index i = 0; i < f.values().size(); ++i) f.values().data()[i] = g(rng);
  return f;
}

RatioConfig small_config(int L, int trials) {
  RatioConfig c;
  c.mesh = Mesh{L, 1, 1};
  c.trials = trials;
  c.seed = 5;
  c.sampler.count = 4;
  c.sampler.seed = 1;
  return c;
}

}  // namespace

TEST_CASE("parse_rational") {
  CHECK(parse_rational("4/3") == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(parse_rational("2") == 2.0);
  CHECK(parse_rational("0.5") == 0.5);
  CHECK(parse_rational("-3/4") == -0.75);
  for (const char* bad : {"", "abc", "1/0", "1/2x", "/3", "2/", "inf"}) CHECK_THROWS_AS(parse_rational(bad), std::invalid_argument);
}

TEST_CASE("Holder exponents") {
  CHECK_NOTHROW(check_holder(Exponents{}));
  CHECK_NOTHROW(check_holder(Exponents{2, 2, 1}));
  CHECK_THROWS(check_holder(Exponents{2, 2, 2.0 / 3.0}));
  CHECK_THROWS(check_holder(Exponents{1, 4, 0.8}));
}

TEST_CASE("test data") {
  std::mt19937_64 rng(1);
  for (auto mesh : {Mesh{4, 1, 1}, Mesh{3, 2, 1}}) {
    for (int t = 0; t < 20; ++t) {
      CHECK(random_test_function(rng, mesh).values().cwiseAbs().maxCoeff() > 0);
      const RealFunction E = random_set(rng, mesh);
      CHECK(E.values().sum() > 0);
      CHECK((E.values().array() * (1 - E.values().array())).abs().maxCoeff() == 0);
    }
    const RealFunction b = logarithmic_symbol(rng, mesh, BmoMode::shifted);
    CHECK(bmo_norm(b, BmoMode::shifted) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(b.values().mean()) < 1e-12);
  }
}

TEST_CASE("identity and linear algebra suites pass on a small mesh") {
  for (const auto& line : identity_suite(Mesh{3, 1, 1}, 20, 2)) {
    CHECK(line.instances == 20);
    CHECK_MESSAGE(line.pass(), line.name << " " << line.max_residual);
  }
  for (const auto& line : linear_algebra_suite(Mesh{3, 2, 1}, 5, 3)) CHECK_MESSAGE(line.pass(), line.name);
  CHECK_FALSE(CheckLine{"empty", 0, 0.0, 1.0}.pass());
}

TEST_CASE("gradients of the averaged commutator") {
  std::mt19937_64 rng(4);
  const Mesh mesh{3, 1, 1};
  FamilySpec spec;
  spec.k = {1, 0, 1};
  spec.seed = 9;
  ShiftSampler sampler;
  sampler.count = 3;
  const RealFunction b = random_function(mesh, rng), f1 = random_function(mesh, rng),
                     f2 = random_function(mesh, rng), f3 = random_function(mesh, rng);
  for (int slot : {0, 1, 2}) {
    const AveragedCommutator C(spec, mesh, sampler, slot);
    CHECK(C.grid_count() == 3);
    const double v = pair(C(b, f1, f2), f3);
    CHECK(std::abs(v) > 1e-8);
    CHECK(pair(C.grad1(b, f2, f3), f1) == doctest::Approx(v).epsilon(1e-11));
    CHECK(pair(C.grad2(b, f1, f3), f2) == doctest::Approx(v).epsilon(1e-11));
  }
  // the commutator against an independent route
  const AveragedCommutator C(spec, mesh, sampler, 1);
  const auto pairs = grid_pairs(mesh, sampler);
  const RealFunction direct = averaged_commutator(b, make_family(spec), 1, f1, f2, pairs);
  CHECK((C(b, f1, f2) - direct).values().cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(AveragedCommutator(spec, mesh, sampler, 3), std::invalid_argument);
}

TEST_CASE("strong type ratios") {
  FamilySpec spec;
  spec.k = {1, 1, 1};
  RatioConfig c = small_config(3, 6);
  const RatioReport plain = strong_type_ratios(spec, Exponents{}, c);
  CHECK(plain.ratios.size() == 6);
  CHECK(plain.max >= plain.median);
  CHECK(plain.median > 0);
  // deterministic in the seed
  CHECK(strong_type_ratios(spec, Exponents{}, c).ratios == plain.ratios);
  // the ascent starts where the plain estimate is and keeps the best
  c.ascent = 5;
  const RatioReport climbed = strong_type_ratios(spec, Exponents{}, c);
  for (std::size_t t = 0; t < plain.ratios.size(); ++t) CHECK(climbed.ratios[t] >= plain.ratios[t]);
  CHECK(climbed.max > plain.max);
  c.trials = 0;
  CHECK_THROWS(strong_type_ratios(spec, Exponents{}, c));
}

TEST_CASE("weak type verification builds valid exceptional sets") {
  RatioConfig c = small_config(4, 8);
  ShiftSampler phi;
  phi.count = 4;
  FamilySpec spec;
  spec.k = {1, 0, 1};
  WeakTypeReport w = weak_type_verify(spec, Exponents{}, c, phi);
  CHECK(w.phi == "Phi_1(f1) Phi_2^{k_2}(f2)");
  CHECK(w.trials.size() == 8);
  CHECK(w.measure_ok);
  for (const auto& t : w.trials) {
    CHECK(t.structure_ok);
    CHECK(t.measure_E_prime >= 0.99 * t.measure_E);
    CHECK(std::isfinite(t.ratio));
  }
  spec.kind = OperatorKind::full;
  CHECK(weak_type_verify(spec, Exponents{}, c, phi).phi == "M f1 Phi_1(f2)");
  spec.kind = OperatorKind::partial;
  spec.type = {1, 0};
  CHECK(weak_type_verify(spec, Exponents{}, c, phi).phi == "M f1 M f2");
  CHECK_THROWS(weak_type_verify(spec, Exponents{2, 2, 1}, c, phi));
  c.slot = 0;
  CHECK_THROWS(weak_type_verify(spec, Exponents{}, c, phi));
}

TEST_CASE("affine fits") {
  const AffineFit line = fit_affine({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(line.slope == doctest::Approx(2.0));
  CHECK(line.intercept == doctest::Approx(1.0));
  CHECK(line.superlinear < 1e-12);
  // y = x^2 bends above its least-squares line at both ends
  const AffineFit quad = fit_affine({1, 2, 3, 4}, {1, 4, 9, 16});
  CHECK(quad.slope == doctest::Approx(5.0));
  CHECK(quad.intercept == doctest::Approx(-5.0));
  CHECK(quad.superlinear == doctest::Approx(1.0 / 15.0));
  CHECK_THROWS(fit_affine({1}, {1}));
  CHECK_THROWS(fit_affine({1, 1}, {1, 2}));
  CHECK_THROWS(fit_affine({1, 2}, {1}));
}

TEST_CASE("complexity sweep") {
  FamilySpec spec;
  RatioConfig c = small_config(4, 3);
  const ComplexitySweep s = complexity_sweep(spec, {0, 1, 2}, 2, Exponents{}, c);
  REQUIRE(s.points.size() == 3);
  for (const auto& p : s.points) {
    CHECK(p.estimate > 0);
    CHECK(p.estimate >= p.median);
  }
  CHECK(s.points[2].kappa == 2);
  CHECK_THROWS(complexity_sweep(spec, {0, 1}, 0, Exponents{}, c));
}

TEST_CASE("duality experiment and the one-parameter reduction") {
  const DualityRun d = duality_experiment(3, 5000, 6, 2);
  CHECK(d.size == 15 * 15);  // every rectangle of levels 0..3 on each side
  CHECK(d.constant > 0);
  CHECK(std::isfinite(d.constant));
  const ReductionCheck r = one_parameter_reduction(4, 20, 3);
  CHECK(r.max_error <= 1e-12);
  CHECK(r.constant > 0);
  CHECK_THROWS(duality_experiment(3, 0, 1, 1));
}
