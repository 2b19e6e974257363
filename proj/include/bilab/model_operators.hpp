#pragma once

// Bilinear bi-parameter model operators. Every operator is compiled to a
// list of Haar triple products
//   <T(f1, f2), f3> = sum_entries c <f1, phi_1> <f2, phi_2> <f3, phi_3>,
// phi_s = u_s (x) v_s with u_s, v_s frame elements (h^0 for averages; the
// |V|^{-1/2} of 1_V/|V| sits in c). Coefficient fields are kept separately,
// keyed by cubes of the grid pair they were drawn for.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bilab/norms.hpp"
#include "bilab/tables.hpp"

namespace bilab {

struct SlotElement {
  Index first;
  Index second;
};

struct TrilinearEntry {
  std::array<SlotElement, 3> slot;
  double coef;
};

class TrilinearOperator {
 public:
  TrilinearOperator(const GridPair& grids, std::vector<TrilinearEntry> entries);
  TrilinearOperator(std::shared_ptr<const FramePair> frames, std::vector<TrilinearEntry> entries);

  const FramePair& frames() const { return *frames_; }
  std::shared_ptr<const FramePair> shared_frames() const { return frames_; }
  const std::vector<TrilinearEntry>& entries() const { return entries_; }
  Mesh mesh() const { return frames_->grids().mesh(); }

  /// Coefficient table of T(f1, f2) given the Haar tables of f1 and f2.
  template <typename S>
  MatrixX<S> output_table(const MatrixX<S>& t1, const MatrixX<S>& t2) const {
    MatrixX<S> g = MatrixX<S>::Zero(frames_->first.size(), frames_->second.size());
    for (const auto& e : entries_)
      g(e.slot[2].first, e.slot[2].second) +=
          e.coef * t1(e.slot[0].first, e.slot[0].second) * t2(e.slot[1].first, e.slot[1].second);
    return g;
  }

  template <typename S>
  S form_tables(const MatrixX<S>& t1, const MatrixX<S>& t2, const MatrixX<S>& t3) const {
    S sum{};
    for (const auto& e : entries_)
      sum += e.coef * t1(e.slot[0].first, e.slot[0].second) * t2(e.slot[1].first, e.slot[1].second) *
             t3(e.slot[2].first, e.slot[2].second);
    return sum;
  }

  template <typename S>
  GridFunction<S> apply(const GridFunction<S>& f1, const GridFunction<S>& f2) const {
    check(f1.mesh());
    check(f2.mesh());
    return synthesize_table(*frames_, f1.mesh(), output_table(haar_table(*frames_, f1), haar_table(*frames_, f2)));
  }

  /// <T(f1, f2), f3>, without conjugation.
  template <typename S>
  S form(const GridFunction<S>& f1, const GridFunction<S>& f2, const GridFunction<S>& f3) const {
    check(f1.mesh());
    check(f2.mesh());
    check(f3.mesh());
    return form_tables(haar_table(*frames_, f1), haar_table(*frames_, f2), haar_table(*frames_, f3));
  }

  /// The same operator with the two parameters exchanged, acting on transposed functions.
  TrilinearOperator transposed() const;
  /// The operator with input slot s (0 or 1) and the output exchanged:
  /// <T(f1, f2), f3> = <T.adjoint(0)(f3, f2), f1> = <T.adjoint(1)(f1, f3), f2>.
  TrilinearOperator adjoint(int s) const;
  /// c T, and the sum of two operators on the same frames.
  TrilinearOperator scaled(double c) const;
  TrilinearOperator plus(const TrilinearOperator& other) const;

 private:
  void check(const Mesh& m) const;
  std::shared_ptr<const FramePair> frames_;
  std::vector<TrilinearEntry> entries_;
};

/// The grid pair with the two parameters exchanged (sides and shifts swapped).
GridPair transposed(const GridPair& g);

// ---- coefficient fields ----

enum class OperatorKind { partial, full, shift };

/// Sparse coefficients with the grid pair they live on. Keys:
///   partial: K(level,label), I_1..I_3 (level,label,eta), V(level,label,theta)   14 ints
///   full:    K(level,label,eta), V(level,label,theta)                              6 ints
///   shift:   K(level,label), I_1..I_3 (level,label,eta), V(level,label), J_1..J_3   22 ints
/// For partial paraproducts `type` = (slot with h^0_I, slot with h_V); for
/// full paraproducts (slot with h_K, slot with h_V); for shifts the slot with
/// the non-cancellative factor on each axis, or -1. Slots are 0, 1, 2 for f1, f2, f3.
/// `swapped` marks the symmetric partial paraproduct, shift structure in the
/// second variable; its keys then refer to the transposed grid pair.
struct CoefficientField {
  OperatorKind kind = OperatorKind::partial;
  Mesh mesh;
  GridShift shift_first;
  GridShift shift_second;
  std::array<int, 3> k{0, 0, 0};
  std::array<int, 3> v{0, 0, 0};
  std::array<int, 2> type{0, 0};
  bool swapped = false;
  std::map<std::vector<int>, double> entries;
  // provenance
  std::uint64_t seed = 0;
  std::string normalization;

  GridPair grids() const;
  /// The grid pair the keys refer to (transposed when swapped).
  GridPair key_grids() const;
};

void write_text(std::ostream& out, const CoefficientField& field);
/// Throws std::runtime_error on malformed input.
CoefficientField read_text(std::istream& in);

/// Compile a field to its operator. Throws std::invalid_argument when the keys
/// do not match the kind, type or complexity (e.g. I^{(k_i)} != K).
TrilinearOperator build_operator(const CoefficientField& field);

// ---- generators ----

/// Extremal partial-paraproduct coefficients on the grid pair: every
/// (K, (I_i), eta) family is kept with probability `density` and scaled so its
/// V-indexed sequence BMO equals prod |I_i|^{1/2} / |K|^2. With `rank_one`
/// all families of one K share their V-sequence up to a sign that is a product
/// of per-cube signs, so the block of K acts like a single rank-one piece
/// (independent families mostly cancel as the complexity grows).
CoefficientField generate_partial_coeffs(std::mt19937_64& rng, std::array<int, 3> k, std::array<int, 2> type,
                                         const GridPair& grids, double density = 1.0, bool swapped = false,
                                         bool rank_one = false);

/// Full-paraproduct coefficients a_R ~ N(0,1)|R|^{1/2}, kept with probability
/// `density`, divided by a rigorous upper bound of their product BMO norm.
CoefficientField generate_full_coeffs(std::mt19937_64& rng, std::array<int, 2> form, const GridPair& grids,
                                      double density = 1.0);

/// Shift coefficients +-prod|I_i|^{1/2}/|K|^2 prod|J_j|^{1/2}/|V|^2 (extremal),
/// kept with probability `density`. Signs are independent, or with `rank_one`
/// a product of per-cube signs.
CoefficientField generate_shift_coeffs(std::mt19937_64& rng, std::array<int, 3> k, std::array<int, 3> v,
                                       std::array<int, 2> tags, const GridPair& grids, double density = 1.0,
                                       bool rank_one = false);

/// Pointwise (partial: sequence-BMO) bound of one partial or shift key.
double coefficient_bound(const CoefficientField& field, const std::vector<int>& key);

// ---- audits ----

/// max over (K, (I_i), eta) of sequence_bmo / bound (<= 1 when normalised).
double audit_partial(const CoefficientField& field);
/// Family-relative product BMO lower bound of a full field, and its upper bound proxy.
struct FullAudit {
  ProductBmo lower;
  double upper = 0.0;
};
FullAudit audit_full(const CoefficientField& field);
/// max |a| / bound over the entries of a shift field.
double audit_shift(const CoefficientField& field);

/// The upper bound used to normalise full fields:
/// min( (sum_R |a_R|^2 / min|R|)^{1/2}, (sum_{level pairs} max_R |a_R|^2/|R|)^{1/2} ).
double product_bmo_upper_bound(const RectangleSequence& a);

/// a_R collected per rectangle (l^2 over eta, theta) from a full field.
RectangleSequence full_sequence(const CoefficientField& field);

// ---- families over random grids ----

/// omega -> operator on D_omega. Coefficients are drawn per grid pair since
/// the parent map does not commute with shifts.
using OperatorFamily = std::function<TrilinearOperator(const GridPair&)>;

/// What to draw on every grid pair. For partial paraproducts k is the
/// complexity and `type` the slots; `swapped` moves the shift structure to
/// the second variable. For shifts k, v and the per-axis tags.
struct FamilySpec {
  OperatorKind kind = OperatorKind::partial;
  std::array<int, 3> k{0, 0, 0};
  std::array<int, 3> v{0, 0, 0};
  std::array<int, 2> type{0, 0};
  bool swapped = false;
  double density = 1.0;
  std::uint64_t seed = 0;
  // the same random stream on every grid pair, so the draws agree up to how
  // the cubes are labelled; otherwise each grid pair gets an independent draw
  bool coherent = true;
  bool rank_one = false;  // see generate_partial_coeffs; ignored for full paraproducts
  // keep only K (and for shifts V) at levels <= this; -1 keeps all. Lets
  // different complexities be compared on the same set of top cubes.
  int max_top_level = -1;

  std::string describe() const;
};

/// Seed of the draw on one grid pair, a function of (seed, omega) only.
std::uint64_t grid_seed(std::uint64_t seed, const GridPair& grids);

CoefficientField draw_field(const FamilySpec& spec, const GridPair& grids);
OperatorFamily make_family(const FamilySpec& spec);

}  // namespace bilab
