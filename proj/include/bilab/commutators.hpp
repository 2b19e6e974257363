#pragma once

// Commutators [b, T]_1, [b, T]_2 of model operators, their splitting into
// paraproduct terms, the exceptional sets of the weak-type argument,
// averages over random grids and the synthesis of a commutator from model
// operators.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "bilab/maximal.hpp"
#include "bilab/model_operators.hpp"
#include "bilab/norms.hpp"
#include "bilab/paraproducts.hpp"

namespace bilab {

/// [b,T]_1 = b T(f1, f2) - T(b f1, f2); slot 2 commutes with f2 instead.
/// Throws std::invalid_argument for other slots.
template <typename S>
GridFunction<S> commutator(const RealFunction& b, const TrilinearOperator& T, int slot, const GridFunction<S>& f1,
                           const GridFunction<S>& f2) {
  if (slot != 1 && slot != 2) throw std::invalid_argument("commutator slot must be 1 or 2");
  check_same(b.mesh(), f1.mesh());
  const GridFunction<S> out = multiply(b, T.apply(f1, f2));
  return slot == 1 ? out - T.apply(multiply(b, f1), f2) : out - T.apply(f1, multiply(b, f2));
}

/// <[b,T]_slot(f1, f2), f3> split entry by entry: the pairings with f3 and
/// with f_slot are expanded according to which side of each test function is
/// cancellative. Terms:
///   "<name>[f3]"   paraproducts of b and f3 (A1..A8, a1_j or a2_j)
///   "third_line"   the slice or oscillation term on f3's side
///   "<name>[f1]"   the same on the commuted function, with a minus sign
///   "fourth_line"
///   "P^b"          sum c (<b>_{R_3} - <b>_{R_slot}) <f1,phi_1><f2,phi_2><f3,phi_3>
/// For a type (0,0) partial paraproduct these are the two a^1 terms, two a^2 terms, the
/// two slice terms and P^b.
template <typename S>
Decomposition<S> split_commutator(const RealFunction& b, const TrilinearOperator& T, int slot,
                                  const GridFunction<S>& f1, const GridFunction<S>& f2, const GridFunction<S>& f3);

/// Largest |<b>_{I_3 x V} - <b>_{I_1 x V}| over the entries of a partial
/// paraproduct field, against the dyadic bmo norm of b on the key grids.
struct AverageGap {
  double max_difference = 0.0;
  double bmo = 0.0;
  int max_k = 0;
  /// max_difference / (bmo max k_i), 0 when max k_i = 0.
  double constant = 0.0;
};
AverageGap average_gap(const RealFunction& b, const CoefficientField& field);

// ---- exceptional sets ----

/// Levels and classes of the weak-type argument for one function Phi >= 0 and set E.
/// Cell sets are 0/1 functions.
struct ExceptionalSetReport {
  double C = 1.0;
  double c = 0.0;
  double r = 0.0;
  int escalations = 0;  // times C was doubled
  double measure_E = 0.0;
  double measure_E_prime = 0.0;
  RealFunction E_prime;
  /// Omega_u = {Phi > C 2^{-u} |E|^{-1/r}} and {M 1_{Omega_u} > c}, u = 0..size-1.
  std::vector<RealFunction> omega;
  std::vector<RealFunction> omega_tilde;
  std::vector<double> omega_measure;
  std::vector<double> omega_tilde_measure;
  /// First u with |R cap Omega_u| >= |R|/100, per rectangle of the grid
  /// pair, -1 when there is none; blocks indexed as RectangleSequence.
  std::vector<Eigen::MatrixXi> rectangle_class;
  std::size_t participating = 0;
  bool monotone = true;          // Omega_{u-1} in Omega_u, the same for the enlargements and classes
  bool enlargement_ok = true;    // R in R^_u implies 3R in Omega~_u
};

/// c = 1/(200 2^{n+m}): a mesh-aligned window through R and any point of 3R
/// has at most 2^{n+m}|R| volume, so |R cap Omega| >= |R|/100 forces M 1_Omega > c there.
double default_enlargement_constant(const Mesh& mesh);

/// C starts at C0 and doubles until |E'| >= 99/100 |E|. The u range stops
/// once Omega_u is the torus or equals {Phi > 0}. Throws std::invalid_argument
/// when E is empty, r is outside (0, 1], or C0, c are not positive.
ExceptionalSetReport exceptional_set(const RealFunction& phi, const RealFunction& E, double r, const GridPair& grids,
                                     double c = 0.0, double C0 = 1.0);

// ---- expectations over grids ----

/// The grid pairs of a sampler: count zipped pairs, or every pair when exact.
std::vector<GridPair> grid_pairs(const Mesh& mesh, const ShiftSampler& sampler);

template <typename S>
GridFunction<S> expectation_over_grids(const std::function<GridFunction<S>(const GridPair&)>& g,
                                       const std::vector<GridPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("expectation over an empty set of grids");
  GridFunction<S> sum = g(pairs.front());
  for (std::size_t i = 1; i < pairs.size(); ++i) sum += g(pairs[i]);
  sum.values() /= S(double(pairs.size()));
  return sum;
}

inline RealFunction expectation_over_grids(const std::function<RealFunction(const GridPair&)>& g, const Mesh& mesh,
                                           const ShiftSampler& sampler) {
  return expectation_over_grids<double>(g, grid_pairs(mesh, sampler));
}

/// E_omega [b, T_omega]_slot(f1, f2).
RealFunction averaged_commutator(const RealFunction& b, const OperatorFamily& family, int slot, const RealFunction& f1,
                                 const RealFunction& f2, const std::vector<GridPair>& pairs);

// ---- synthesis ----

/// 2^{-alpha max k_i / 2} 2^{-alpha max v_j / 2}. Throws for alpha <= 0 or negative entries.
double compute_alpha(std::array<int, 3> k, std::array<int, 3> v, double alpha);

struct SynthesisTerm {
  std::array<int, 3> k{0, 0, 0};
  std::array<int, 3> v{0, 0, 0};
  int u = 0;
  FamilySpec family;
};

struct SynthesisSpec {
  double alpha = 1.0;
  double C_T = 1.0;
  int slot = 1;
  std::vector<SynthesisTerm> terms;
  ShiftSampler sampler;
};

struct SynthesisResult {
  RealFunction total;
  /// C_T alpha_{k,v} E_omega [b, U]_slot(f1, f2), one per term.
  std::vector<RealFunction> terms;
  std::vector<double> alphas;
  /// sum alpha^r for the given r.
  double budget(double r) const;
};

/// Checks that every term's family matches its (k, v): a shift of
/// complexity (k, v); a partial paraproduct when k = 0 or v = 0, with the
/// complexity on the other side (swapped when it is v); a full paraproduct
/// when k = v = 0. Throws std::invalid_argument otherwise, and
/// ResolutionError when no cube of the grid fits the complexity.
void validate_synthesis(const SynthesisSpec& spec, const Mesh& mesh);

SynthesisResult synthesize(const SynthesisSpec& spec, const RealFunction& b, const RealFunction& f1,
                           const RealFunction& f2);

}  // namespace bilab
