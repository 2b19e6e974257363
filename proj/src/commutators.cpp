#include "bilab/commutators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

namespace bilab {

// ---- splitting ----

namespace {

enum Pattern { both = 0, first_only = 1, second_only = 2, neither = 3 };

Pattern pattern_of(const FramePair& fr, const SlotElement& e) {
  const bool c1 = fr.first.info(e.first).eta != 0;
  const bool c2 = fr.second.info(e.second).eta != 0;
  if (c1 && c2) return both;
  if (c1) return first_only;
  if (c2) return second_only;
  return neither;
}

// The average element of the cube of every element, and its 1/|Q|^{1/2}.
struct Averages {
  std::vector<Index> element;
  Eigen::VectorXd scale;

  explicit Averages(const HaarFrame& f) : element(f.size()), scale(f.size()) {
    for (Index e = 0; e < f.size(); ++e) {
      element[e] = f.average(f.info(e).level, f.info(e).label);
      scale[e] = 1.0 / std::sqrt(f.volume_of(e));
    }
  }
};

// <bf, phi> = sum para(phi) + slice(phi) + <b>_R <f, phi> for every element
// pair phi of one pattern.
template <typename S>
struct Expansions {
  std::array<std::vector<std::pair<std::string, MatrixX<S>>>, 4> para;
  std::array<MatrixX<S>, 4> slice;
};

template <typename S>
Expansions<S> expansions(const RealFunction& b, const GridFunction<S>& f, const FramePair& fr, const Averages& a1,
                         const Averages& a2, const MatrixX<S>& bR, const MatrixX<S>& tf,
                         const std::array<bool, 4>& needed) {
  Expansions<S> x;
  const Index n1 = fr.first.size(), n2 = fr.second.size();
  if (needed[both]) {
    for (int i = 1; i <= 8; ++i)
      x.para[both].emplace_back("A" + std::to_string(i), haar_table(fr, paraproduct_A(i, b, f, fr)));
    x.slice[both] = MatrixX<S>::Zero(n1, n2);
  }
  if (needed[first_only]) {
    for (int j = 1; j <= 2; ++j)
      x.para[first_only].emplace_back("a1_" + std::to_string(j), haar_table(fr, paraproduct_a(j, b, f, fr.first)));
    // <(<b>_{I,1} - <b>_{IxV}) <f, h_I>_1, v>
    const MatrixX<S> fp = partial_table_first(fr.first, f);
    const MatrixX<S> bp = partial_table_first(fr.first, b.cast<S>());
    MatrixX<S> y(n1, fp.cols());
    for (Index e = 0; e < n1; ++e) y.row(e) = (S(a1.scale[e]) * bp.row(a1.element[e])).cwiseProduct(fp.row(e));
    x.slice[first_only] = y * fr.second.analysis().transpose().template cast<S>() - bR.cwiseProduct(tf);
  }
  if (needed[second_only]) {
    for (int j = 1; j <= 2; ++j)
      x.para[second_only].emplace_back("a2_" + std::to_string(j), haar_table(fr, paraproduct_a(j, b, f, fr.second)));
    const MatrixX<S> fp = partial_table_second(fr.second, f);
    const MatrixX<S> bp = partial_table_second(fr.second, b.cast<S>());
    MatrixX<S> y(fp.rows(), n2);
    for (Index e = 0; e < n2; ++e) y.col(e) = (S(a2.scale[e]) * bp.col(a2.element[e])).cwiseProduct(fp.col(e));
    x.slice[second_only] = fr.first.analysis().template cast<S>() * y - bR.cwiseProduct(tf);
  }
  if (needed[neither]) x.slice[neither] = haar_table(fr, multiply(b, f)) - bR.cwiseProduct(tf);
  return x;
}

// Named sums in first-use order.
template <typename S>
struct Accumulator {
  std::vector<std::pair<std::string, S>> terms;
  std::map<std::string, std::size_t> index;

  S& operator[](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return terms[it->second].second;
    index.emplace(name, terms.size());
    terms.emplace_back(name, S{});
    return terms.back().second;
  }
};

}  // namespace

template <typename S>
Decomposition<S> split_commutator(const RealFunction& b, const TrilinearOperator& T, int slot,
                                  const GridFunction<S>& f1, const GridFunction<S>& f2, const GridFunction<S>& f3) {
  if (slot != 1 && slot != 2) throw std::invalid_argument("commutator slot must be 1 or 2");
  check_same(b.mesh(), f1.mesh());
  check_same(f1.mesh(), f2.mesh());
  check_same(f1.mesh(), f3.mesh());
  const FramePair& fr = T.frames();
  const int in = slot - 1;
  const std::array<const GridFunction<S>*, 3> fs{&f1, &f2, &f3};
  std::array<MatrixX<S>, 3> t;
  for (int s = 0; s < 3; ++s) t[s] = haar_table(fr, *fs[s]);

  const Averages a1(fr.first), a2(fr.second);
  const Eigen::MatrixXd hb = haar_table(fr, b);
  MatrixX<S> bR(fr.first.size(), fr.second.size());
  for (Index q = 0; q < bR.cols(); ++q)
    for (Index p = 0; p < bR.rows(); ++p) bR(p, q) = S(hb(a1.element[p], a2.element[q]) * a1.scale[p] * a2.scale[q]);

  std::array<bool, 4> need_out{}, need_in{};
  for (const auto& e : T.entries()) {
    need_out[pattern_of(fr, e.slot[2])] = true;
    need_in[pattern_of(fr, e.slot[in])] = true;
  }
  const Expansions<S> xo = expansions(b, f3, fr, a1, a2, bR, t[2], need_out);
  const Expansions<S> xi = expansions(b, *fs[in], fr, a1, a2, bR, t[in], need_in);
  const std::string tag_in = slot == 1 ? "[f1]" : "[f2]";

  Accumulator<S> acc;
  // fix the order of the named terms
  for (int p = 0; p < 4; ++p)
    if (need_out[p])
      for (const auto& kv : xo.para[p]) acc[kv.first + "[f3]"];
  acc["third_line"];
  for (int p = 0; p < 4; ++p)
    if (need_in[p])
      for (const auto& kv : xi.para[p]) acc[kv.first + tag_in];
  acc["fourth_line"];
  S& pb = acc["P^b"];

  std::vector<S*> out_slots[4], in_slots[4];
  for (int p = 0; p < 4; ++p) {
    for (const auto& kv : xo.para[p]) out_slots[p].push_back(&acc[kv.first + "[f3]"]);
    for (const auto& kv : xi.para[p]) in_slots[p].push_back(&acc[kv.first + tag_in]);
  }
  S& third = acc["third_line"];
  S& fourth = acc["fourth_line"];

  for (const auto& e : T.entries()) {
    const auto& s3 = e.slot[2];
    const auto& si = e.slot[in];
    std::array<S, 3> v;
    for (int s = 0; s < 3; ++s) v[s] = t[s](e.slot[s].first, e.slot[s].second);
    const S w_out = e.coef * v[0] * v[1];
    S w_in = e.coef * v[2];
    for (int s = 0; s < 2; ++s)
      if (s != in) w_in *= v[s];
    const int po = pattern_of(fr, s3), pi = pattern_of(fr, si);
    for (std::size_t j = 0; j < out_slots[po].size(); ++j)
      *out_slots[po][j] += w_out * xo.para[po][j].second(s3.first, s3.second);
    third += w_out * xo.slice[po](s3.first, s3.second);
    for (std::size_t j = 0; j < in_slots[pi].size(); ++j)
      *in_slots[pi][j] -= w_in * xi.para[pi][j].second(si.first, si.second);
    fourth -= w_in * xi.slice[pi](si.first, si.second);
    pb += (bR(s3.first, s3.second) - bR(si.first, si.second)) * w_out * v[2];
  }

  Decomposition<S> d;
  d.lhs = pair(commutator(b, T, slot, f1, f2), f3);
  d.terms = std::move(acc.terms);
  d.residual = d.lhs - d.total();
  return d;
}

template Decomposition<double> split_commutator(const RealFunction&, const TrilinearOperator&, int,
                                                const RealFunction&, const RealFunction&, const RealFunction&);
template Decomposition<std::complex<double>> split_commutator(const RealFunction&, const TrilinearOperator&, int,
                                                              const ComplexFunction&, const ComplexFunction&,
                                                              const ComplexFunction&);

AverageGap average_gap(const RealFunction& b, const CoefficientField& field) {
  if (field.kind != OperatorKind::partial) throw std::invalid_argument("average_gap needs a partial paraproduct field");
  const GridPair g = field.key_grids();
  const RealFunction bk = field.swapped ? transpose(b) : b;
  check_same(bk.mesh(), g.mesh());
  const FramePair fr(g);
  const Eigen::MatrixXd hb = haar_table(fr, bk);
  auto avg = [&](int il, int ilab, int vl, int vlab) {
    return hb(fr.first.average(il, ilab), fr.second.average(vl, vlab)) /
           std::sqrt(fr.first.volume_of(fr.first.average(il, ilab)) * fr.second.volume_of(fr.second.average(vl, vlab)));
  };
  AverageGap out;
  for (const auto& kv : field.entries) {
    const auto& key = kv.first;
    out.max_difference =
        std::max(out.max_difference, std::abs(avg(key[8], key[9], key[11], key[12]) - avg(key[2], key[3], key[11], key[12])));
  }
  out.bmo = bmo_norm(bk, g);
  out.max_k = *std::max_element(field.k.begin(), field.k.end());
  if (out.max_k > 0 && out.bmo > 0) out.constant = out.max_difference / (out.bmo * out.max_k);
  return out;
}

// ---- exceptional sets ----

double default_enlargement_constant(const Mesh& mesh) { return 1.0 / (200.0 * std::ldexp(1.0, mesh.n + mesh.m)); }

namespace {

// cells x labels indicators of one level
Eigen::MatrixXd level_indicators(const DyadicGrid& g, int level) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.side().cells(), g.count(level));
  for (int lab = 0; lab < g.count(level); ++lab)
    for (Index c : g.cube(level, lab).cells()) a(c, lab) = 1.0;
  return a;
}

// Side cells of 3Q on the torus.
std::vector<Index> tripled_cells(const DyadicCube& q) {
  const int N = 1 << q.resolution;
  const int s = q.span();
  std::array<std::vector<int>, 2> coord;
  for (int c = 0; c < q.dim; ++c) {
    if (3 * s >= N) {
      for (int x = 0; x < N; ++x) coord[c].push_back(x);
    } else {
      for (int x = q.offset[c] - s; x < q.offset[c] + 2 * s; ++x) coord[c].push_back(((x % N) + N) % N);
    }
  }
  std::vector<Index> out;
  if (q.dim == 1) {
    for (int x : coord[0]) out.push_back(x);
  } else {
    for (int y : coord[1])
      for (int x : coord[0]) out.push_back(Index(x) + Index(N) * y);
  }
  return out;
}

double measure(const RealFunction& set) { return set.values().sum() * set.cell_volume(); }

bool subset(const RealFunction& a, const RealFunction& b) {
  return ((a.values().array() > 0) && (b.values().array() <= 0)).count() == 0;
}

RealFunction level_set(const RealFunction& phi, double threshold) {
  return RealFunction(phi.mesh(), (phi.values().array() > threshold).cast<double>().matrix());
}

RealFunction enlarge(const RealFunction& set, double c) {
  return level_set(maximal(set, MaximalMode::nondyadic_strong), c);
}

}  // namespace

ExceptionalSetReport exceptional_set(const RealFunction& phi, const RealFunction& E, double r, const GridPair& grids,
                                     double c, double C0) {
  check_same(phi.mesh(), E.mesh());
  check_same(phi.mesh(), grids.mesh());
  if (!(r > 0 && r <= 1)) throw std::invalid_argument("exceptional_set: r must lie in (0, 1]");
  if (!(C0 > 0)) throw std::invalid_argument("exceptional_set: C must be positive");
  if (c == 0.0) c = default_enlargement_constant(phi.mesh());
  if (!(c > 0 && c < 1)) throw std::invalid_argument("exceptional_set: c must lie in (0, 1)");
  const RealFunction Ecut(E.mesh(), (E.values().array() > 0).cast<double>().matrix());
  const double mE = measure(Ecut);
  if (!(mE > 0)) throw std::invalid_argument("exceptional_set: E is empty");
  if ((phi.values().array() < 0).any()) throw std::invalid_argument("exceptional_set: Phi must be non-negative");

  ExceptionalSetReport rep;
  rep.c = c;
  rep.r = r;
  rep.measure_E = mE;
  const double scale = std::pow(mE, -1.0 / r);

  // C: double until E' = E \ Omega~_0 keeps 99% of E
  double C = C0;
  for (;;) {
    const RealFunction tilde0 = enlarge(level_set(phi, C * scale), c);
    rep.E_prime = RealFunction(E.mesh(), Ecut.values().cwiseProduct((1.0 - tilde0.values().array()).matrix()));
    rep.measure_E_prime = measure(rep.E_prime);
    if (rep.measure_E_prime >= 0.99 * mE) break;
    C *= 2;
    ++rep.escalations;
  }
  rep.C = C;

  const double positive = (phi.values().array() > 0).any()
                              ? (phi.values().array() > 0).select(phi.values().array(), INFINITY).minCoeff()
                              : INFINITY;
  const Index total = phi.values().size();
  for (int u = 0;; ++u) {
    const double threshold = C * std::ldexp(scale, -u);
    rep.omega.push_back(level_set(phi, threshold));
    rep.omega_tilde.push_back(enlarge(rep.omega.back(), c));
    rep.omega_measure.push_back(measure(rep.omega.back()));
    rep.omega_tilde_measure.push_back(measure(rep.omega_tilde.back()));
    if (u > 0) {
      rep.monotone = rep.monotone && subset(rep.omega[u - 1], rep.omega[u]) &&
                     subset(rep.omega_tilde[u - 1], rep.omega_tilde[u]);
    }
    // stable from here on: everything positive is in, or nothing is left outside
    if (threshold < positive || Index(rep.omega.back().values().sum()) == total) break;
  }

  // rectangle classes
  const int L = grids.first.levels();
  const std::size_t U = rep.omega.size();
  std::vector<Eigen::MatrixXd> A1, A2;
  for (int i = 0; i <= L; ++i) {
    A1.push_back(level_indicators(grids.first, i));
    A2.push_back(level_indicators(grids.second, i));
  }
  rep.rectangle_class.resize((L + 1) * (L + 1));
  for (int i = 0; i <= L; ++i)
    for (int j = 0; j <= L; ++j)
      rep.rectangle_class[i * (L + 1) + j] = Eigen::MatrixXi::Constant(grids.first.count(i), grids.second.count(j), -1);
  for (std::size_t u = 0; u < U; ++u) {
    for (int i = 0; i <= L; ++i) {
      const Eigen::MatrixXd left = A1[i].transpose() * rep.omega[u].values();
      for (int j = 0; j <= L; ++j) {
        const Eigen::MatrixXd counts = left * A2[j];
        const double need = double(A1[i].col(0).sum() * A2[j].col(0).sum()) / 100.0;
        Eigen::MatrixXi& cls = rep.rectangle_class[i * (L + 1) + j];
        for (Index q = 0; q < cls.cols(); ++q)
          for (Index p = 0; p < cls.rows(); ++p) {
            const bool in = counts(p, q) >= need;
            if (cls(p, q) < 0 && in) cls(p, q) = int(u);
            // classes only grow with u
            if (cls(p, q) >= 0 && !in) rep.monotone = false;
          }
      }
    }
  }
  // R in R^_u => 3R in Omega~_u; the enlargements grow with u, so checking
  // the first u of each rectangle is enough once monotonicity holds.
  for (int i = 0; i <= L; ++i)
    for (int j = 0; j <= L; ++j) {
      const Eigen::MatrixXi& cls = rep.rectangle_class[i * (L + 1) + j];
      for (Index q = 0; q < cls.cols(); ++q)
        for (Index p = 0; p < cls.rows(); ++p) {
          const int u = cls(p, q);
          if (u < 0) continue;
          ++rep.participating;
          const auto c1 = tripled_cells(grids.first.cube(i, int(p)));
          const auto c2 = tripled_cells(grids.second.cube(j, int(q)));
          const Eigen::MatrixXd& t = rep.omega_tilde[u].values();
          for (Index y : c2)
            for (Index x : c1)
              if (t(x, y) <= 0) rep.enlargement_ok = false;
        }
    }
  return rep;
}

// ---- expectations ----

std::vector<GridPair> grid_pairs(const Mesh& mesh, const ShiftSampler& sampler) {
  const Side s1 = mesh.side(Axis::first), s2 = mesh.side(Axis::second);
  const auto w1 = sampler.shifts(s1);
  const auto w2 = sampler.shifts(s2);
  std::vector<GridPair> out;
  if (sampler.exact) {
    out.reserve(w1.size() * w2.size());
    for (const auto& a : w1)
      for (const auto& b : w2) out.emplace_back(DyadicGrid(s1, a), DyadicGrid(s2, b));
  } else {
    out.reserve(w1.size());
    for (std::size_t k = 0; k < w1.size(); ++k) out.emplace_back(DyadicGrid(s1, w1[k]), DyadicGrid(s2, w2[k]));
  }
  return out;
}

RealFunction averaged_commutator(const RealFunction& b, const OperatorFamily& family, int slot, const RealFunction& f1,
                                 const RealFunction& f2, const std::vector<GridPair>& pairs) {
  return expectation_over_grids<double>(
      [&](const GridPair& g) { return commutator(b, family(g), slot, f1, f2); }, pairs);
}

// ---- synthesis ----

double compute_alpha(std::array<int, 3> k, std::array<int, 3> v, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  for (int x : k)
    if (x < 0) throw std::invalid_argument("complexities must be non-negative");
  for (int x : v)
    if (x < 0) throw std::invalid_argument("complexities must be non-negative");
  const int mk = *std::max_element(k.begin(), k.end());
  const int mv = *std::max_element(v.begin(), v.end());
  return std::exp2(-alpha * mk / 2.0) * std::exp2(-alpha * mv / 2.0);
}

double SynthesisResult::budget(double r) const {
  double s = 0.0;
  for (double a : alphas) s += std::pow(a, r);
  return s;
}

namespace {

// Does some cube of a side carry complexity k with h^0 in slot `plain`?
bool fits(std::array<int, 3> k, int plain, int L) {
  for (int s = 0; s < 3; ++s)
    if (k[s] > (s == plain ? L : L - 1)) return false;
  return true;
}

std::string triple(std::array<int, 3> k) {
  return "(" + std::to_string(k[0]) + "," + std::to_string(k[1]) + "," + std::to_string(k[2]) + ")";
}

}  // namespace

void validate_synthesis(const SynthesisSpec& spec, const Mesh& mesh) {
  if (spec.slot != 1 && spec.slot != 2) throw std::invalid_argument("commutator slot must be 1 or 2");
  if (!(spec.alpha > 0)) throw std::invalid_argument("alpha must be positive");
  const int L = mesh.levels;
  const std::array<int, 3> zero{0, 0, 0};
  for (const auto& t : spec.terms) {
    const std::string where = "term k=" + triple(t.k) + " v=" + triple(t.v);
    const FamilySpec& f = t.family;
    switch (f.kind) {
      case OperatorKind::shift:
        if (f.k != t.k || f.v != t.v) throw std::invalid_argument(where + ": shift complexity differs from the term");
        if (!fits(f.k, f.type[0], L) || !fits(f.v, f.type[1], L))
          throw ResolutionError(where + ": shift complexity does not fit L=" + std::to_string(L));
        break;
      case OperatorKind::partial: {
        if (t.k != zero && t.v != zero)
          throw std::invalid_argument(where + ": a partial paraproduct needs k = 0 or v = 0");
        const std::array<int, 3> want = f.swapped ? t.v : t.k;
        if (f.k != want || (f.swapped ? t.k : t.v) != zero)
          throw std::invalid_argument(where + ": partial paraproduct complexity differs from the term");
        if (!fits(f.k, f.type[0], L))
          throw ResolutionError(where + ": partial paraproduct complexity does not fit L=" + std::to_string(L));
        break;
      }
      case OperatorKind::full:
        if (t.k != zero || t.v != zero) throw std::invalid_argument(where + ": a full paraproduct needs k = v = 0");
        break;
    }
  }
}

SynthesisResult synthesize(const SynthesisSpec& spec, const RealFunction& b, const RealFunction& f1,
                           const RealFunction& f2) {
  check_same(b.mesh(), f1.mesh());
  check_same(f1.mesh(), f2.mesh());
  validate_synthesis(spec, f1.mesh());
  SynthesisResult out;
  out.total = RealFunction(f1.mesh());
  if (spec.terms.empty()) return out;
  const auto pairs = grid_pairs(f1.mesh(), spec.sampler);
  for (const auto& t : spec.terms) {
    const double a = compute_alpha(t.k, t.v, spec.alpha);
    RealFunction g = averaged_commutator(b, make_family(t.family), spec.slot, f1, f2, pairs);
    g.values() *= spec.C_T * a;
    out.total += g;
    out.terms.push_back(std::move(g));
    out.alphas.push_back(a);
  }
  return out;
}

}  // namespace bilab
