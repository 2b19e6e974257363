#pragma once

// Numerical experiments: identity checks, weak- and strong-type ratio
// estimates for averaged commutators, complexity sweeps and the duality
// inequality. Everything is deterministic in the seed.

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bilab/commutators.hpp"

namespace bilab {

/// "4/3", "2", "0.5" -> double. Throws std::invalid_argument.
double parse_rational(const std::string& text);

struct Exponents {
  double p = 4.0 / 3.0;
  double q = 4.0 / 3.0;
  double r = 2.0 / 3.0;
};

/// Throws std::invalid_argument unless p, q > 1 and |1/p + 1/q - 1/r| <= 1e-12.
void check_holder(const Exponents& e);

// ---- test data ----

/// One draw from a mixed ensemble: white noise, Gaussian piecewise constant
/// at a coarse level, a normalised Haar function, or an indicator of a
/// dyadic rectangle.
RealFunction random_test_function(std::mt19937_64& rng, const Mesh& mesh);

/// A random union of coarse mesh-aligned rectangles, never empty.
RealFunction random_set(std::mt19937_64& rng, const Mesh& mesh);

/// sum_j 1_{Q_j} over the cubes Q_j = x0 + [0, 2^-j)^d, j = 0..L, in x1, x2
/// or both (chosen at random), scaled to unit norm in `mode`. A discrete
/// log |x - x0|, the symbol whose averages drift fastest along a chain of
/// parents.
RealFunction logarithmic_symbol(std::mt19937_64& rng, const Mesh& mesh, BmoMode mode);

// ---- identity suites ----

struct CheckLine {
  std::string name;
  int instances = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass() const { return instances > 0 && max_residual <= tolerance; }
};

/// The product expansions in all four forms and the commutator split over
/// every partial-paraproduct type, on random grids; relative residuals.
std::vector<CheckLine> identity_suite(const Mesh& mesh, int trials, std::uint64_t seed);

/// Haar orthonormality, martingale reconstruction, Parseval and
/// Delta^1 Delta^2 = Delta^2 Delta^1 on random grids; absolute residuals.
std::vector<CheckLine> linear_algebra_suite(const Mesh& mesh, int trials, std::uint64_t seed);

// ---- ratio estimates ----

// haar: generate_bmo_function; mixed alternates haar and logarithmic by trial
enum class SymbolKind { haar, logarithmic, mixed };

struct RatioConfig {
  Mesh mesh;
  int trials = 50;
  std::uint64_t seed = 0;
  ShiftSampler sampler;  // the omega-average of the operators
  int slot = 1;  // the commuted input; 0 estimates E_omega T_omega itself
  BmoMode b_mode = BmoMode::shifted;  // b is normalised to norm 1 in this mode
  SymbolKind symbol = SymbolKind::mixed;
  // nonlinear power-method steps from each random start, keeping the best
  // ratio seen; 0 evaluates the starts only
  int ascent = 0;
};

/// E_omega [b, T_omega]_slot over the grid pairs of a sampler, with the
/// gradients of <E [b,T](f1, f2), f3> in f1 and f2 for ascent. Slot 0 is
/// E_omega T_omega alone (b is ignored).
class AveragedCommutator {
 public:
  AveragedCommutator(const FamilySpec& family, const Mesh& mesh, const ShiftSampler& sampler, int slot);

  RealFunction operator()(const RealFunction& b, const RealFunction& f1, const RealFunction& f2) const;
  /// g1 with <g1, f1> = <C(f1, f2), f3> for every f1.
  RealFunction grad1(const RealFunction& b, const RealFunction& f2, const RealFunction& f3) const;
  /// g2 with <g2, f2> = <C(f1, f2), f3> for every f2.
  RealFunction grad2(const RealFunction& b, const RealFunction& f1, const RealFunction& f3) const;
  std::size_t grid_count() const { return ops_.size(); }

 private:
  using Ops = std::array<TrilinearOperator, 3>;  // T, T.adjoint(0), T.adjoint(1)
  RealFunction mean(const std::function<RealFunction(const Ops&)>& each) const;
  std::vector<Ops> ops_;
  int slot_;
};

struct RatioReport {
  std::vector<double> ratios;
  double max = 0.0;
  double median = 0.0;
};

/// ||E_omega [b, T_omega]_slot(f1, f2)||_r / (||f1||_p ||f2||_q) over random
/// (b, f1, f2).
RatioReport strong_type_ratios(const FamilySpec& family, const Exponents& e, const RatioConfig& config);

struct WeakTypeTrial {
  double ratio = 0.0;
  double C = 0.0;
  int escalations = 0;
  double measure_E = 0.0;
  double measure_E_prime = 0.0;
  bool structure_ok = true;  // monotone and 3R in Omega~_u
};

struct WeakTypeReport {
  std::vector<WeakTypeTrial> trials;
  double max = 0.0;
  double median = 0.0;
  std::string phi;  // which Phi product built the exceptional sets
  bool measure_ok = true;  // |E'| >= 99/100 |E| every time
};

/// For unswapped type (0,0) partial paraproducts Phi = Phi_1(f1) Phi_2^{k_2}(f2); for full
/// paraproducts M f1 Phi_1(f2); otherwise M f1 M f2. Phi is scaled to unit
/// L^r norm. The ratio is sup over |f3| <= 1_{E'} of |<E_omega [b,T]_1(f1,f2), f3>|
/// over ||f1||_p ||f2||_q |E|^{1 - 1/r}. `phi_sampler` drives the omega
/// averages inside Phi.
WeakTypeReport weak_type_verify(const FamilySpec& family, const Exponents& e, const RatioConfig& config,
                                const ShiftSampler& phi_sampler);

// ---- complexity ----

struct AffineFit {
  double intercept = 0.0;
  double slope = 0.0;
  /// max over points of (y - fit)_+, over max |fit|: how far the data bend
  /// above the line, relative to the size of the fitted values.
  double superlinear = 0.0;
};

/// Least squares y = intercept + slope x. Throws with fewer than two points.
AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y);

struct ComplexityPoint {
  int kappa = 0;
  double estimate = 0.0;  // max ratio over all family draws and starts
  double median = 0.0;
};

struct ComplexitySweep {
  std::vector<ComplexityPoint> points;
  AffineFit fit;  // estimate against 1 + kappa
};

/// For kappa in `kappas` the family `base` with k = (kappa, kappa, kappa) is
/// drawn with `draws` seeds (base.seed, base.seed + 1, ...), and
/// strong_type_ratios runs on each; the same (b, f1, f2) starts are used for
/// every kappa.
ComplexitySweep complexity_sweep(const FamilySpec& base, const std::vector<int>& kappas, int draws,
                                 const Exponents& e, const RatioConfig& config);

// ---- duality ----

struct DualityRun {
  int levels = 0;
  int size = 0;  // rectangles in the collection (capped by what the grid has)
  double constant = 0.0;  // max over trials of lhs / (||a|| int_F S)
};

/// An H^1-BMO type duality on D_0 x D_0 with coefficients on a random D_omega:
/// sum |a_{R+omega} b_R| <= C ||a||_{BMO_prod} int_F S_b. ||a|| is the
/// family estimate of sequence_bmo_norm. Half the trials align b with a.
DualityRun duality_experiment(int levels, int size, int trials, std::uint64_t seed);

struct ReductionCheck {
  double max_error = 0.0;  // relative, of ||a~||_prod = |K0|^{-1/2} ||a||_BMO
  double constant = 0.0;   // the one-parameter inequality's empirical constant
};

/// The one-parameter special case: a_V placed on K0 x V.
ReductionCheck one_parameter_reduction(int levels, int trials, std::uint64_t seed);

}  // namespace bilab
