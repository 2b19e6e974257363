#include "bilab/model_operators.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bilab {

// ---- the engine ----

TrilinearOperator::TrilinearOperator(const GridPair& grids, std::vector<TrilinearEntry> entries)
    : TrilinearOperator(std::make_shared<const FramePair>(grids), std::move(entries)) {}

TrilinearOperator::TrilinearOperator(std::shared_ptr<const FramePair> frames, std::vector<TrilinearEntry> entries)
    : frames_(std::move(frames)), entries_(std::move(entries)) {
  const Index n1 = frames_->first.size(), n2 = frames_->second.size();
  for (const auto& e : entries_)
    for (const auto& s : e.slot)
      if (s.first < 0 || s.first >= n1 || s.second < 0 || s.second >= n2)
        throw std::invalid_argument("trilinear entry refers to a missing frame element");
}

void TrilinearOperator::check(const Mesh& m) const {
  if (!(m == mesh())) throw MeshError("function mesh does not match the operator");
}

GridPair transposed(const GridPair& g) {
  auto flip = [](const DyadicGrid& grid, Axis a) {
    Side s = grid.side();
    s.axis = a;
    GridShift w = grid.shift();
    w.axis = a;
    return DyadicGrid(s, w);
  };
  return GridPair(flip(g.second, Axis::first), flip(g.first, Axis::second));
}

TrilinearOperator TrilinearOperator::transposed() const {
  auto frames = std::make_shared<const FramePair>(bilab::transposed(frames_->grids()));
  auto relabel = [](const HaarFrame& from, const HaarFrame& to, Index e) {
    const auto& info = from.info(e);
    return to.element(info.level, info.label, info.eta);
  };
  std::vector<TrilinearEntry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    TrilinearEntry t{{}, e.coef};
    for (int s = 0; s < 3; ++s)
      t.slot[s] = {relabel(frames_->second, frames->first, e.slot[s].second),
                   relabel(frames_->first, frames->second, e.slot[s].first)};
    out.push_back(t);
  }
  return TrilinearOperator(frames, std::move(out));
}

TrilinearOperator TrilinearOperator::adjoint(int s) const {
  if (s != 0 && s != 1) throw std::invalid_argument("adjoint slot must be 0 or 1");
  std::vector<TrilinearEntry> out = entries_;
  for (auto& e : out) std::swap(e.slot[s], e.slot[2]);
  return TrilinearOperator(frames_, std::move(out));
}

TrilinearOperator TrilinearOperator::scaled(double c) const {
  std::vector<TrilinearEntry> out = entries_;
  for (auto& e : out) e.coef *= c;
  return TrilinearOperator(frames_, std::move(out));
}

TrilinearOperator TrilinearOperator::plus(const TrilinearOperator& other) const {
  if (!(frames_->first.grid() == other.frames().first.grid()) ||
      !(frames_->second.grid() == other.frames().second.grid()))
    throw std::invalid_argument("operators live on different grid pairs");
  std::vector<TrilinearEntry> out = entries_;
  out.insert(out.end(), other.entries().begin(), other.entries().end());
  return TrilinearOperator(frames_, std::move(out));
}

// ---- fields ----

GridPair CoefficientField::grids() const {
  return GridPair(DyadicGrid(mesh.side(Axis::first), shift_first), DyadicGrid(mesh.side(Axis::second), shift_second));
}

GridPair CoefficientField::key_grids() const { return swapped ? transposed(grids()) : grids(); }

namespace {

const char* kind_name(OperatorKind k) {
  switch (k) {
    case OperatorKind::partial: return "partial";
    case OperatorKind::full: return "full";
    case OperatorKind::shift: return "shift";
  }
  return "?";
}

std::size_t key_size(OperatorKind k) {
  switch (k) {
    case OperatorKind::partial: return 14;
    case OperatorKind::full: return 6;
    case OperatorKind::shift: return 22;
  }
  return 0;
}

void write_shift(std::ostream& out, const GridShift& w) {
  for (const auto& b : w.bits) {
    out << ' ';
    for (int c = 0; c < w.dim; ++c) out << int(b[c]);
  }
}

GridShift read_shift(std::istream& in, const Side& side) {
  GridShift w = GridShift::zero(side);
  for (auto& b : w.bits) {
    std::string word;
    if (!(in >> word) || int(word.size()) != side.dim) throw std::runtime_error("bad shift bits");
    for (int c = 0; c < side.dim; ++c) {
      if (word[c] != '0' && word[c] != '1') throw std::runtime_error("bad shift bits");
      b[c] = std::uint8_t(word[c] - '0');
    }
  }
  return w;
}

std::istringstream expect(std::istream& in, const std::string& tag) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("coefficient file ends before '" + tag + "'");
  std::istringstream ls(line);
  std::string word;
  ls >> word;
  if (word != tag) throw std::runtime_error("expected '" + tag + "', found '" + word + "'");
  return ls;
}

}  // namespace

void write_text(std::ostream& out, const CoefficientField& f) {
  out << "bilab-coefficients 1\n";
  out << "kind " << kind_name(f.kind) << '\n';
  out << "mesh " << f.mesh.levels << ' ' << f.mesh.n << ' ' << f.mesh.m << '\n';
  out << "shift1";
  write_shift(out, f.shift_first);
  out << "\nshift2";
  write_shift(out, f.shift_second);
  out << "\ncomplexity";
  for (int x : f.k) out << ' ' << x;
  for (int x : f.v) out << ' ' << x;
  out << "\ntype " << f.type[0] << ' ' << f.type[1] << '\n';
  out << "swapped " << (f.swapped ? 1 : 0) << '\n';
  out << "seed " << f.seed << '\n';
  out << "normalization " << f.normalization << '\n';
  out << "entries " << f.entries.size() << '\n';
  char buf[64];
  for (const auto& [key, value] : f.entries) {
    for (int x : key) out << x << ' ';
    std::snprintf(buf, sizeof buf, "%a", value);
    out << buf << '\n';
  }
}

CoefficientField read_text(std::istream& in) {
  CoefficientField f;
  {
    auto ls = expect(in, "bilab-coefficients");
    int version = 0;
    if (!(ls >> version) || version != 1) throw std::runtime_error("unsupported coefficient file version");
  }
  {
    auto ls = expect(in, "kind");
    std::string k;
    ls >> k;
    if (k == "partial") f.kind = OperatorKind::partial;
    else if (k == "full") f.kind = OperatorKind::full;
    else if (k == "shift") f.kind = OperatorKind::shift;
    else throw std::runtime_error("unknown operator kind '" + k + "'");
  }
  {
    auto ls = expect(in, "mesh");
    if (!(ls >> f.mesh.levels >> f.mesh.n >> f.mesh.m)) throw std::runtime_error("bad mesh line");
    try {
      f.mesh.validate();
    } catch (const MeshError& e) {
      throw std::runtime_error(e.what());
    }
  }
  {
    auto ls = expect(in, "shift1");
    f.shift_first = read_shift(ls, f.mesh.side(Axis::first));
  }
  {
    auto ls = expect(in, "shift2");
    f.shift_second = read_shift(ls, f.mesh.side(Axis::second));
  }
  {
    auto ls = expect(in, "complexity");
    for (int& x : f.k) ls >> x;
    for (int& x : f.v) ls >> x;
    if (!ls) throw std::runtime_error("bad complexity line");
  }
  {
    auto ls = expect(in, "type");
    if (!(ls >> f.type[0] >> f.type[1])) throw std::runtime_error("bad type line");
  }
  {
    auto ls = expect(in, "swapped");
    int s = 0;
    if (!(ls >> s)) throw std::runtime_error("bad swapped line");
    f.swapped = s != 0;
  }
  {
    auto ls = expect(in, "seed");
    if (!(ls >> f.seed)) throw std::runtime_error("bad seed line");
  }
  {
    auto ls = expect(in, "normalization");
    std::getline(ls >> std::ws, f.normalization);
  }
  std::size_t count = 0;
  {
    auto ls = expect(in, "entries");
    if (!(ls >> count)) throw std::runtime_error("bad entries line");
  }
  const std::size_t width = key_size(f.kind);
  for (std::size_t r = 0; r < count; ++r) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("coefficient file is truncated");
    std::istringstream ls(line);
    std::vector<int> key(width);
    for (int& x : key)
      if (!(ls >> x)) throw std::runtime_error("bad coefficient key");
    std::string word;
    if (!(ls >> word)) throw std::runtime_error("missing coefficient value");
    char* end = nullptr;
    const double value = std::strtod(word.c_str(), &end);
    if (end != word.c_str() + word.size()) throw std::runtime_error("bad coefficient value '" + word + "'");
    f.entries.emplace(std::move(key), value);
  }
  return f;
}

// ---- compiling fields ----

namespace {

double volume(const DyadicGrid& g, int level) { return std::ldexp(1.0, -level * g.dim()); }

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// The frame element for (level, label, eta), checked to exist.
Index element(const HaarFrame& f, int level, int label, int eta) {
  require(level >= 0 && level <= f.grid().levels() && label >= 0 && label < f.grid().count(level),
          "coefficient key names a cube outside the grid");
  const Index e = f.element(level, label, eta);
  require(e >= 0, "coefficient key names a missing Haar function");
  return e;
}

// I with I^{(k)} = K in the grid, given by (level, label).
void check_descendant(const DyadicGrid& g, int kl, int klab, int il, int ilab, int k) {
  require(il == kl + k, "cube level does not match the complexity");
  require(il <= g.levels() && ilab >= 0 && ilab < g.count(il), "coefficient key names a cube outside the grid");
  require(g.ancestor(g.cube(il, ilab), k) == g.cube(kl, klab), "cube is not a descendant of K");
}

void check_eta(int eta, bool cancellative, int dim) {
  if (cancellative) require(eta >= 1 && eta < (1 << dim), "cancellative slot needs eta in 1..2^d-1");
  else require(eta == 0, "non-cancellative slot needs eta 0");
}

void check_slot(int s, bool allow_none) {
  require((allow_none && s == -1) || (s >= 0 && s <= 2), "slot tag must be 0, 1 or 2");
}

std::vector<TrilinearEntry> compile_partial(const CoefficientField& f, const FramePair& fr) {
  check_slot(f.type[0], false);
  check_slot(f.type[1], false);
  for (int x : f.k) require(x >= 0, "complexity must be non-negative");
  const DyadicGrid& g1 = fr.first.grid();
  const DyadicGrid& g2 = fr.second.grid();
  std::vector<TrilinearEntry> out;
  out.reserve(f.entries.size());
  for (const auto& [key, a] : f.entries) {
    require(key.size() == 14, "partial paraproduct keys have 14 entries");
    const int kl = key[0], klab = key[1];
    require(kl >= 0 && kl <= g1.levels() && klab >= 0 && klab < g1.count(kl), "K outside the grid");
    const int vl = key[11], vlab = key[12], theta = key[13];
    check_eta(theta, true, g2.dim());
    TrilinearEntry t{{}, a};
    for (int s = 0; s < 3; ++s) {
      const int il = key[2 + 3 * s], ilab = key[3 + 3 * s], eta = key[4 + 3 * s];
      check_descendant(g1, kl, klab, il, ilab, f.k[s]);
      check_eta(eta, s != f.type[0], g1.dim());
      t.slot[s].first = element(fr.first, il, ilab, eta);
      if (s == f.type[1]) {
        t.slot[s].second = element(fr.second, vl, vlab, theta);
      } else {
        t.slot[s].second = element(fr.second, vl, vlab, 0);
        t.coef /= std::sqrt(volume(g2, vl));
      }
    }
    out.push_back(t);
  }
  return out;
}

std::vector<TrilinearEntry> compile_full(const CoefficientField& f, const FramePair& fr) {
  check_slot(f.type[0], false);
  check_slot(f.type[1], false);
  const DyadicGrid& g1 = fr.first.grid();
  const DyadicGrid& g2 = fr.second.grid();
  std::vector<TrilinearEntry> out;
  out.reserve(f.entries.size());
  for (const auto& [key, a] : f.entries) {
    require(key.size() == 6, "full paraproduct keys have 6 entries");
    const int kl = key[0], klab = key[1], eta = key[2], vl = key[3], vlab = key[4], theta = key[5];
    check_eta(eta, true, g1.dim());
    check_eta(theta, true, g2.dim());
    TrilinearEntry t{{}, a};
    for (int s = 0; s < 3; ++s) {
      if (s == f.type[0]) {
        t.slot[s].first = element(fr.first, kl, klab, eta);
      } else {
        t.slot[s].first = element(fr.first, kl, klab, 0);
        t.coef /= std::sqrt(volume(g1, kl));
      }
      if (s == f.type[1]) {
        t.slot[s].second = element(fr.second, vl, vlab, theta);
      } else {
        t.slot[s].second = element(fr.second, vl, vlab, 0);
        t.coef /= std::sqrt(volume(g2, vl));
      }
    }
    out.push_back(t);
  }
  return out;
}

std::vector<TrilinearEntry> compile_shift(const CoefficientField& f, const FramePair& fr) {
  check_slot(f.type[0], true);
  check_slot(f.type[1], true);
  for (int x : f.k) require(x >= 0, "complexity must be non-negative");
  for (int x : f.v) require(x >= 0, "complexity must be non-negative");
  const DyadicGrid& g1 = fr.first.grid();
  const DyadicGrid& g2 = fr.second.grid();
  std::vector<TrilinearEntry> out;
  out.reserve(f.entries.size());
  for (const auto& [key, a] : f.entries) {
    require(key.size() == 22, "shift keys have 22 entries");
    TrilinearEntry t{{}, a};
    for (int s = 0; s < 3; ++s) {
      const int il = key[2 + 3 * s], ilab = key[3 + 3 * s], eta = key[4 + 3 * s];
      check_descendant(g1, key[0], key[1], il, ilab, f.k[s]);
      check_eta(eta, s != f.type[0], g1.dim());
      t.slot[s].first = element(fr.first, il, ilab, eta);
      const int jl = key[13 + 3 * s], jlab = key[14 + 3 * s], theta = key[15 + 3 * s];
      check_descendant(g2, key[11], key[12], jl, jlab, f.v[s]);
      check_eta(theta, s != f.type[1], g2.dim());
      t.slot[s].second = element(fr.second, jl, jlab, theta);
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace

TrilinearOperator build_operator(const CoefficientField& field) {
  field.mesh.validate();
  require(!field.swapped || field.kind == OperatorKind::partial, "only partial paraproducts come swapped");
  auto frames = std::make_shared<const FramePair>(field.key_grids());
  std::vector<TrilinearEntry> entries;
  switch (field.kind) {
    case OperatorKind::partial: entries = compile_partial(field, *frames); break;
    case OperatorKind::full: entries = compile_full(field, *frames); break;
    case OperatorKind::shift: entries = compile_shift(field, *frames); break;
  }
  TrilinearOperator op(frames, std::move(entries));
  return field.swapped ? op.transposed() : op;
}

// ---- generators ----

namespace {

// One side of a shift or partial structure: K, three descendants and their etas.
struct SideTuple {
  std::array<int, 2> K;
  std::array<std::array<int, 3>, 3> I;  // (level, label, eta)
};

// A random sign per (level, label, eta), drawn on first use.
class CubeSigns {
 public:
  double operator()(std::mt19937_64& rng, const std::array<int, 3>& cube) {
    auto it = signs_.find(cube);
    if (it == signs_.end()) it = signs_.emplace(cube, rng() % 2 ? 1.0 : -1.0).first;
    return it->second;
  }

 private:
  std::map<std::array<int, 3>, double> signs_;
};

// Every (K, I_1, I_2, I_3, eta) on one grid with I_s^{(k_s)} = K; the slot
// `plain` (or none, -1) carries h^0 and may sit at the finest level.
std::vector<SideTuple> side_tuples(const DyadicGrid& g, std::array<int, 3> k, int plain) {
  const int L = g.levels();
  std::vector<SideTuple> out;
  for (int kl = 0; kl <= L; ++kl) {
    bool fits = true;
    for (int s = 0; s < 3; ++s) fits = fits && kl + k[s] <= (s == plain ? L : L - 1);
    if (!fits) continue;
    for (int klab = 0; klab < g.count(kl); ++klab) {
      const DyadicCube K = g.cube(kl, klab);
      std::array<std::vector<int>, 3> labels;
      for (int s = 0; s < 3; ++s)
        for (const auto& q : descendants(K, k[s])) labels[s].push_back(g.label(q));
      std::array<std::vector<int>, 3> etas;
      for (int s = 0; s < 3; ++s) {
        if (s == plain) etas[s] = {0};
        else
          for (int e = 1; e < (1 << g.dim()); ++e) etas[s].push_back(e);
      }
      for (int a : labels[0])
        for (int b : labels[1])
          for (int c : labels[2])
            for (int ea : etas[0])
              for (int eb : etas[1])
                for (int ec : etas[2])
                  out.push_back({{kl, klab},
                                 {{{kl + k[0], a, ea}, {kl + k[1], b, eb}, {kl + k[2], c, ec}}}});
    }
  }
  return out;
}

double tuple_bound(const DyadicGrid& g, const SideTuple& t) {
  double b = 1.0 / std::pow(volume(g, t.K[0]), 2);
  for (const auto& i : t.I) b *= std::sqrt(volume(g, i[0]));
  return b;
}

void append(std::vector<int>& key, const SideTuple& t) {
  key.push_back(t.K[0]);
  key.push_back(t.K[1]);
  for (const auto& i : t.I) key.insert(key.end(), i.begin(), i.end());
}

CoefficientField field_header(OperatorKind kind, const GridPair& grids) {
  CoefficientField f;
  f.kind = kind;
  f.mesh = grids.mesh();
  f.shift_first = grids.first.shift();
  f.shift_second = grids.second.shift();
  return f;
}

void check_density(double d) {
  if (!(d > 0 && d <= 1)) throw std::invalid_argument("density must lie in (0, 1]");
}

}  // namespace

CoefficientField generate_partial_coeffs(std::mt19937_64& rng, std::array<int, 3> k, std::array<int, 2> type,
                                         const GridPair& grids, double density, bool swapped, bool rank_one) {
  check_density(density);
  check_slot(type[0], false);
  check_slot(type[1], false);
  for (int x : k) require(x >= 0, "complexity must be non-negative");
  CoefficientField f = field_header(OperatorKind::partial, grids);
  f.k = k;
  f.type = type;
  f.swapped = swapped;
  f.normalization = "partial: V-sequence BMO of every family equals prod|I_i|^{1/2}/|K|^2";
  if (rank_one) f.normalization += ", rank one per K";
  const GridPair kg = f.key_grids();
  const DyadicGrid& g2 = kg.second;
  const int L = g2.levels();
  const int thetas = (1 << g2.dim()) - 1;
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  CubeSigns signs;
  std::vector<double> draws;
  double norm = 0.0;
  std::array<int, 2> drawn_for{-1, -1};
  for (const SideTuple& t : side_tuples(kg.first, k, type[0])) {
    if (density < 1 && unif(rng) >= density) continue;
    if (!rank_one || t.K != drawn_for) {
      CubeSequence seq(g2);
      draws.clear();
      for (int vl = 0; vl < L; ++vl)
        for (int vlab = 0; vlab < g2.count(vl); ++vlab) {
          double m = 0.0;
          for (int th = 1; th <= thetas; ++th) {
            const double a = gauss(rng) * std::sqrt(volume(g2, vl));
            draws.push_back(a);
            m += a * a;
          }
          seq(vl, vlab) = std::sqrt(m);
        }
      norm = sequence_bmo_norm(seq);
      drawn_for = t.K;
    }
    if (norm == 0) continue;
    double scale = tuple_bound(kg.first, t) / norm;
    if (rank_one)
      for (const auto& i : t.I) scale *= signs(rng, i);
    std::size_t n = 0;
    for (int vl = 0; vl < L; ++vl)
      for (int vlab = 0; vlab < g2.count(vl); ++vlab)
        for (int th = 1; th <= thetas; ++th) {
          std::vector<int> key;
          key.reserve(14);
          append(key, t);
          key.insert(key.end(), {vl, vlab, th});
          f.entries.emplace(std::move(key), draws[n++] * scale);
        }
  }
  return f;
}

CoefficientField generate_full_coeffs(std::mt19937_64& rng, std::array<int, 2> form, const GridPair& grids,
                                      double density) {
  check_density(density);
  check_slot(form[0], false);
  check_slot(form[1], false);
  CoefficientField f = field_header(OperatorKind::full, grids);
  f.type = form;
  const DyadicGrid& g1 = grids.first;
  const DyadicGrid& g2 = grids.second;
  const int L = g1.levels();
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  for (int kl = 0; kl < L; ++kl)
    for (int klab = 0; klab < g1.count(kl); ++klab)
      for (int eta = 1; eta < (1 << g1.dim()); ++eta)
        for (int vl = 0; vl < L; ++vl)
          for (int vlab = 0; vlab < g2.count(vl); ++vlab)
            for (int th = 1; th < (1 << g2.dim()); ++th) {
              if (density < 1 && unif(rng) >= density) continue;
              f.entries.emplace(std::vector<int>{kl, klab, eta, vl, vlab, th},
                                gauss(rng) * std::sqrt(volume(g1, kl) * volume(g2, vl)));
            }
  const double upper = product_bmo_upper_bound(full_sequence(f));
  if (upper > 0)
    for (auto& kv : f.entries) kv.second /= upper;
  std::ostringstream note;
  note << "full: divided by the product BMO upper bound " << upper;
  f.normalization = note.str();
  return f;
}

CoefficientField generate_shift_coeffs(std::mt19937_64& rng, std::array<int, 3> k, std::array<int, 3> v,
                                       std::array<int, 2> tags, const GridPair& grids, double density,
                                       bool rank_one) {
  check_density(density);
  check_slot(tags[0], true);
  check_slot(tags[1], true);
  for (int x : k) require(x >= 0, "complexity must be non-negative");
  for (int x : v) require(x >= 0, "complexity must be non-negative");
  CoefficientField f = field_header(OperatorKind::shift, grids);
  f.k = k;
  f.v = v;
  f.type = tags;
  f.normalization = "shift: |a| = prod|I_i|^{1/2}/|K|^2 prod|J_j|^{1/2}/|V|^2, ";
  f.normalization += rank_one ? "signs a product over the cubes" : "random signs";
  const auto first = side_tuples(grids.first, k, tags[0]);
  const auto second = side_tuples(grids.second, v, tags[1]);
  std::uniform_real_distribution<double> unif;
  std::bernoulli_distribution sign;
  CubeSigns signs1, signs2;
  for (const auto& s : first) {
    const double b1 = tuple_bound(grids.first, s);
    for (const auto& t : second) {
      if (density < 1 && unif(rng) >= density) continue;
      std::vector<int> key;
      key.reserve(22);
      append(key, s);
      append(key, t);
      double a = b1 * tuple_bound(grids.second, t);
      if (rank_one) {
        for (const auto& i : s.I) a *= signs1(rng, i);
        for (const auto& j : t.I) a *= signs2(rng, j);
      } else if (!sign(rng)) {
        a = -a;
      }
      f.entries.emplace(std::move(key), a);
    }
  }
  return f;
}

double coefficient_bound(const CoefficientField& field, const std::vector<int>& key) {
  const GridPair g = field.key_grids();
  auto side_bound = [](const DyadicGrid& grid, const int* p) {
    double b = 1.0 / std::pow(volume(grid, p[0]), 2);
    for (int s = 0; s < 3; ++s) b *= std::sqrt(volume(grid, p[2 + 3 * s]));
    return b;
  };
  switch (field.kind) {
    case OperatorKind::partial:
      require(key.size() == 14, "partial paraproduct keys have 14 entries");
      return side_bound(g.first, key.data());
    case OperatorKind::shift:
      require(key.size() == 22, "shift keys have 22 entries");
      return side_bound(g.first, key.data()) * side_bound(g.second, key.data() + 11);
    case OperatorKind::full:
      require(key.size() == 6, "full paraproduct keys have 6 entries");
      return std::sqrt(volume(g.first, key[0]) * volume(g.second, key[3]));
  }
  return 0.0;
}

// ---- audits ----

double audit_partial(const CoefficientField& field) {
  require(field.kind == OperatorKind::partial, "audit_partial needs a partial paraproduct field");
  const GridPair g = field.key_grids();
  double worst = 0.0;
  auto it = field.entries.begin();
  while (it != field.entries.end()) {
    const std::vector<int> family(it->first.begin(), it->first.begin() + 11);
    CubeSequence seq(g.second);
    const double bound = coefficient_bound(field, it->first);
    for (; it != field.entries.end() && std::equal(family.begin(), family.end(), it->first.begin()); ++it) {
      double& x = seq(it->first[11], it->first[12]);
      x = std::hypot(x, it->second);
    }
    worst = std::max(worst, sequence_bmo_norm(seq) / bound);
  }
  return worst;
}

RectangleSequence full_sequence(const CoefficientField& field) {
  require(field.kind == OperatorKind::full, "full_sequence needs a full paraproduct field");
  RectangleSequence a(field.grids());
  for (const auto& [key, value] : field.entries) {
    double& x = a(key[0], key[1], key[3], key[4]);
    x = std::hypot(x, value);
  }
  return a;
}

double product_bmo_upper_bound(const RectangleSequence& a) {
  const int L = a.levels();
  double total = 0.0, min_area = 1.0, by_levels = 0.0;
  bool any = false;
  for (int i = 0; i <= L; ++i)
    for (int j = 0; j <= L; ++j) {
      const Eigen::MatrixXd& blk = a.block(i, j);
      const double area = volume(a.grids.first, i) * volume(a.grids.second, j);
      const double sq = blk.squaredNorm();
      if (sq == 0) continue;
      any = true;
      total += sq;
      min_area = std::min(min_area, area);
      by_levels += blk.cwiseAbs2().maxCoeff() / area;
    }
  if (!any) return 0.0;
  return std::sqrt(std::min(total / min_area, by_levels));
}

FullAudit audit_full(const CoefficientField& field) {
  const RectangleSequence a = full_sequence(field);
  return FullAudit{sequence_bmo_norm(a), product_bmo_upper_bound(a)};
}

double audit_shift(const CoefficientField& field) {
  require(field.kind == OperatorKind::shift, "audit_shift needs a shift field");
  double worst = 0.0;
  for (const auto& [key, value] : field.entries) worst = std::max(worst, std::abs(value) / coefficient_bound(field, key));
  return worst;
}

// ---- families ----

std::uint64_t grid_seed(std::uint64_t seed, const GridPair& grids) {
  std::vector<std::uint32_t> words{std::uint32_t(seed), std::uint32_t(seed >> 32)};
  for (const GridShift* w : {&grids.first.shift(), &grids.second.shift()}) {
    std::uint32_t packed = 0;
    int used = 0;
    for (const auto& b : w->bits)
      for (int c = 0; c < w->dim; ++c) {
        packed |= std::uint32_t(b[c]) << used;
        if (++used == 32) {
          words.push_back(packed);
          packed = 0;
          used = 0;
        }
      }
    words.push_back(packed);
    words.push_back(0x9e3779b9u + std::uint32_t(used));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

CoefficientField draw_field(const FamilySpec& spec, const GridPair& grids) {
  std::mt19937_64 rng(spec.coherent ? spec.seed : grid_seed(spec.seed, grids));
  CoefficientField f;
  switch (spec.kind) {
    case OperatorKind::partial:
      f = generate_partial_coeffs(rng, spec.k, spec.type, grids, spec.density, spec.swapped, spec.rank_one);
      break;
    case OperatorKind::full: f = generate_full_coeffs(rng, spec.type, grids, spec.density); break;
    case OperatorKind::shift: f = generate_shift_coeffs(rng, spec.k, spec.v, spec.type, grids, spec.density, spec.rank_one);
      break;
  }
  if (spec.max_top_level >= 0 && spec.kind != OperatorKind::full)
    std::erase_if(f.entries, [&](const auto& kv) {
      return kv.first[0] > spec.max_top_level || (spec.kind == OperatorKind::shift && kv.first[11] > spec.max_top_level);
    });
  f.seed = spec.seed;
  return f;
}

OperatorFamily make_family(const FamilySpec& spec) {
  return [spec](const GridPair& grids) { return build_operator(draw_field(spec, grids)); };
}

std::string FamilySpec::describe() const {
  std::ostringstream out;
  out << kind_name(kind);
  if (kind != OperatorKind::full) out << " k=(" << k[0] << "," << k[1] << "," << k[2] << ")";
  if (kind == OperatorKind::shift) out << " v=(" << v[0] << "," << v[1] << "," << v[2] << ")";
  out << " type=(" << type[0] << "," << type[1] << ")";
  if (swapped) out << " swapped";
  if (density < 1) out << " density=" << density;
  if (!coherent) out << " independent";
  if (rank_one) out << " rank-one";
  if (max_top_level >= 0) out << " top<=" << max_top_level;
  return out.str();
}

}  // namespace bilab
