#include "bilab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace bilab {

double parse_rational(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + text + "'");
    }
    if (used != s.size() || !std::isfinite(x)) throw std::invalid_argument("not a number: '" + text + "'");
    return x;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return number(text);
  const double num = number(text.substr(0, slash));
  const double den = number(text.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
  return num / den;
}

void check_holder(const Exponents& e) {
  if (!(e.p > 1) || !(e.q > 1) || std::isinf(e.p) || std::isinf(e.q))
    throw std::invalid_argument("p and q must lie in (1, infinity)");
  if (!(e.r > 0)) throw std::invalid_argument("r must be positive");
  if (std::abs(1 / e.p + 1 / e.q - 1 / e.r) > 1e-12) throw std::invalid_argument("1/p + 1/q must equal 1/r");
}

// ---- test data ----

namespace {

RealFunction white_noise(std::mt19937_64& rng, const Mesh& mesh) {
  std::normal_distribution<double> g;
  RealFunction f(mesh);
  for (Index i = 0; i < f.values().size(); ++i) f.values().data()[i] = g(rng);
  return f;
}

// cells of the side grouped by the level-`level` cube containing them
std::vector<int> cube_index(const DyadicGrid& g, int level) {
  std::vector<int> out(g.side().cells());
  for (int lab = 0; lab < g.count(level); ++lab)
    for (Index c : g.cube(level, lab).cells()) out[c] = lab;
  return out;
}

GridPair random_grids(std::mt19937_64& rng, const Mesh& mesh) {
  const Side s1 = mesh.side(Axis::first), s2 = mesh.side(Axis::second);
  return GridPair(DyadicGrid(s1, sample_shift(rng, s1)), DyadicGrid(s2, sample_shift(rng, s2)));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

RealFunction random_test_function(std::mt19937_64& rng, const Mesh& mesh) {
  const GridPair g(mesh);
  const int L = mesh.levels;
  std::normal_distribution<double> gauss;
  switch (rng() % 4) {
    case 0: return white_noise(rng, mesh);
    case 1: {
      const int level = std::min<int>(L, 2 + int(rng() % 2));
      const auto i1 = cube_index(g.first, level), i2 = cube_index(g.second, level);
      Eigen::MatrixXd v(g.first.count(level), g.second.count(level));
      for (Index k = 0; k < v.size(); ++k) v.data()[k] = gauss(rng);
      RealFunction f(mesh);
      for (Index c2 = 0; c2 < f.values().cols(); ++c2)
        for (Index c1 = 0; c1 < f.values().rows(); ++c1) f(c1, c2) = v(i1[c1], i2[c2]);
      return f;
    }
    case 2: {
      const int l1 = int(rng() % L), l2 = int(rng() % L);
      const HaarIndex h1{g.first.cube(l1, int(rng() % g.first.count(l1))), 1 + int(rng() % ((1 << mesh.n) - 1))};
      const HaarIndex h2{g.second.cube(l2, int(rng() % g.second.count(l2))), 1 + int(rng() % ((1 << mesh.m) - 1))};
      return haar_function(mesh, h1, h2);
    }
    default: {
      const int l1 = int(rng() % (L + 1)), l2 = int(rng() % (L + 1));
      const DyadicRectangle R{g.first.cube(l1, int(rng() % g.first.count(l1))),
                              g.second.cube(l2, int(rng() % g.second.count(l2)))};
      return indicator(mesh, R);
    }
  }
}

RealFunction random_set(std::mt19937_64& rng, const Mesh& mesh) {
  const GridPair g(mesh);
  const int level = std::min(mesh.levels, 3);
  const auto i1 = cube_index(g.first, level), i2 = cube_index(g.second, level);
  Eigen::MatrixXd keep(g.first.count(level), g.second.count(level));
  do {
    for (Index k = 0; k < keep.size(); ++k) keep.data()[k] = double(rng() % 2);
  } while (keep.sum() == 0);
  RealFunction E(mesh);
  for (Index c2 = 0; c2 < E.values().cols(); ++c2)
    for (Index c1 = 0; c1 < E.values().rows(); ++c1) E(c1, c2) = keep(i1[c1], i2[c2]);
  return E;
}

RealFunction logarithmic_symbol(std::mt19937_64& rng, const Mesh& mesh, BmoMode mode) {
  auto side_log = [&](const Side& s) {
    const int N = 1 << s.levels;
    std::array<int, 2> x0{int(rng() % N), s.dim == 2 ? int(rng() % N) : 0};
    Eigen::VectorXd v = Eigen::VectorXd::Zero(s.cells());
    for (int j = 0; j <= s.levels; ++j) {
      const int len = N >> j;
      for (int a = 0; a < len; ++a)
        for (int c = 0; c < (s.dim == 2 ? len : 1); ++c) {
          const int i0 = (x0[0] + a) % N, i1 = (x0[1] + c) % N;
          v[i0 + Index(N) * i1] += 1.0;
        }
    }
    return v;
  };
  const Side s1 = mesh.side(Axis::first), s2 = mesh.side(Axis::second);
  const int which = int(rng() % 3);
  RealFunction b(mesh);
  if (which != 1) b += tensor<double>(mesh, side_log(s1), Eigen::VectorXd::Ones(s2.cells()));
  if (which != 0) b += tensor<double>(mesh, Eigen::VectorXd::Ones(s1.cells()), side_log(s2));
  b.values().array() -= b.values().mean();
  b.values() /= bmo_norm(b, mode);
  return b;
}

// ---- identity suites ----

std::vector<CheckLine> identity_suite(const Mesh& mesh, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::array<std::pair<const char*, Expansion>, 4> modes{{{"expansion biparameter", Expansion::biparameter},
                                                                 {"expansion mixed first", Expansion::mixed_first},
                                                                 {"expansion mixed second", Expansion::mixed_second},
                                                                 {"expansion average", Expansion::none}}};
  std::vector<CheckLine> out;
  for (const auto& [name, mode] : modes) {
    CheckLine line{name, 0, 0.0, 1e-10};
    for (int t = 0; t < trials; ++t) {
      const FramePair frames(random_grids(rng, mesh));
      const RealFunction b = white_noise(rng, mesh), f = white_noise(rng, mesh);
      line.max_residual = std::max(line.max_residual, max_expansion_residual(b, f, frames, mode));
      ++line.instances;
    }
    out.push_back(line);
  }
  CheckLine split{"commutator split, all partial paraproduct types", 0, 0.0, 1e-10};
  for (int t = 0; t < trials; ++t) {
    const GridPair g = random_grids(rng, mesh);
    const std::array<int, 2> type{(t / 3) % 3, t % 3};
    const std::array<int, 3> k{int(rng() % 2), int(rng() % 2), int(rng() % 3)};
    const auto T = build_operator(generate_partial_coeffs(rng, k, type, g, 0.5, (t / 9) % 2 == 1));
    const RealFunction b = white_noise(rng, mesh), f1 = white_noise(rng, mesh), f2 = white_noise(rng, mesh),
                       f3 = white_noise(rng, mesh);
    split.max_residual = std::max(split.max_residual, split_commutator(b, T, 1 + (t / 18) % 2, f1, f2, f3).relative_residual());
    ++split.instances;
  }
  out.push_back(split);
  return out;
}

std::vector<CheckLine> linear_algebra_suite(const Mesh& mesh, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CheckLine ortho{"Haar orthonormality", 0, 0.0, 1e-12};
  CheckLine recon{"martingale reconstruction", 0, 0.0, 1e-12};
  CheckLine parseval{"Parseval (relative)", 0, 0.0, 1e-12};
  CheckLine commute{"Delta^1 Delta^2 commutation", 0, 0.0, 1e-12};
  for (int t = 0; t < trials; ++t) {
    const FramePair fr(random_grids(rng, mesh));
    for (const HaarFrame* h : {&fr.first, &fr.second}) {
      Eigen::MatrixXd B(h->basis().size(), h->side().cells());
      for (std::size_t i = 0; i < h->basis().size(); ++i) B.row(i) = h->values().row(h->basis()[i]);
      const Eigen::MatrixXd gram = B * B.transpose() * h->side().cell_volume();
      ortho.max_residual =
          std::max(ortho.max_residual, (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
    }
    ++ortho.instances;

    const RealFunction f = white_noise(rng, mesh);
    const Eigen::MatrixXd c = haar_table(fr, f);
    Eigen::MatrixXd kept = Eigen::MatrixXd::Zero(c.rows(), c.cols());
    double energy = 0.0;
    for (Index e1 : fr.first.basis())
      for (Index e2 : fr.second.basis()) {
        kept(e1, e2) = c(e1, e2);
        energy += c(e1, e2) * c(e1, e2);
      }
    recon.max_residual = std::max(recon.max_residual, (synthesize_table(fr, mesh, kept) - f).values().cwiseAbs().maxCoeff());
    ++recon.instances;
    const double l2 = pair(f, f);
    parseval.max_residual = std::max(parseval.max_residual, std::abs(energy - l2) / l2);
    ++parseval.instances;

    const int i = int(rng() % mesh.levels), j = int(rng() % mesh.levels);
    const DyadicCube I = fr.first.grid().cube(i, int(rng() % fr.first.grid().count(i)));
    const DyadicCube J = fr.second.grid().cube(j, int(rng() % fr.second.grid().count(j)));
    const RealFunction a = martingale_difference(martingale_difference(f, J), I);
    const RealFunction b = martingale_difference(martingale_difference(f, I), J);
    commute.max_residual = std::max(commute.max_residual, (a - b).values().cwiseAbs().maxCoeff());
    ++commute.instances;
  }
  return {ortho, recon, parseval, commute};
}

// ---- ratio estimates ----

AveragedCommutator::AveragedCommutator(const FamilySpec& family, const Mesh& mesh, const ShiftSampler& sampler,
                                       int slot)
    : slot_(slot) {
  if (slot < 0 || slot > 2) throw std::invalid_argument("slot must be 0, 1 or 2");
  const OperatorFamily make = make_family(family);
  for (const GridPair& g : grid_pairs(mesh, sampler)) {
    TrilinearOperator T = make(g);
    TrilinearOperator a0 = T.adjoint(0), a1 = T.adjoint(1);
    ops_.push_back({std::move(T), std::move(a0), std::move(a1)});
  }
}

RealFunction AveragedCommutator::mean(const std::function<RealFunction(const Ops&)>& each) const {
  RealFunction out = each(ops_.front());
  for (std::size_t i = 1; i < ops_.size(); ++i) out += each(ops_[i]);
  out.values() /= double(ops_.size());
  return out;
}

RealFunction AveragedCommutator::operator()(const RealFunction& b, const RealFunction& f1,
                                            const RealFunction& f2) const {
  if (slot_ == 0) return mean([&](const Ops& o) { return o[0].apply(f1, f2); });
  return mean([&](const Ops& o) { return commutator(b, o[0], slot_, f1, f2); });
}

RealFunction AveragedCommutator::grad1(const RealFunction& b, const RealFunction& f2, const RealFunction& f3) const {
  if (slot_ == 0) return mean([&](const Ops& o) { return o[1].apply(f3, f2); });
  return mean([&](const Ops& o) {
    const RealFunction bf3 = multiply(b, f3);
    return slot_ == 1 ? RealFunction(o[1].apply(bf3, f2) - multiply(b, o[1].apply(f3, f2)))
                      : RealFunction(o[1].apply(bf3, f2) - o[1].apply(f3, multiply(b, f2)));
  });
}

RealFunction AveragedCommutator::grad2(const RealFunction& b, const RealFunction& f1, const RealFunction& f3) const {
  if (slot_ == 0) return mean([&](const Ops& o) { return o[2].apply(f1, f3); });
  return mean([&](const Ops& o) {
    const RealFunction bf3 = multiply(b, f3);
    return slot_ == 1 ? RealFunction(o[2].apply(f1, bf3) - o[2].apply(multiply(b, f1), f3))
                      : RealFunction(o[2].apply(f1, bf3) - multiply(b, o[2].apply(f1, f3)));
  });
}


namespace {

struct Inputs {
  RealFunction b, f1, f2;
};

std::vector<Inputs> draw_inputs(std::mt19937_64& rng, const RatioConfig& c) {
  if (c.trials < 1) throw std::invalid_argument("at least one trial is needed");
  std::vector<Inputs> out;
  for (int t = 0; t < c.trials; ++t) {
    const bool log = c.symbol == SymbolKind::logarithmic || (c.symbol == SymbolKind::mixed && t % 2 == 1);
    RealFunction b = log ? logarithmic_symbol(rng, c.mesh, c.b_mode) : generate_bmo_function(rng, c.mesh, 1.0, c.b_mode);
    RealFunction f1 = random_test_function(rng, c.mesh);
    RealFunction f2 = random_test_function(rng, c.mesh);
    out.push_back({std::move(b), std::move(f1), std::move(f2)});
  }
  return out;
}

// sign(g) |g|^power, with the cells where g is negligible set to zero
RealFunction dual_power(const RealFunction& g, double power) {
  RealFunction out(g.mesh());
  const double floor = 1e-9 * g.values().cwiseAbs().maxCoeff();
  for (Index i = 0; i < g.values().size(); ++i) {
    const double x = g.values().data()[i];
    out.values().data()[i] = std::abs(x) > floor ? std::copysign(std::pow(std::abs(x), power), x) : 0.0;
  }
  return out;
}

double ratio_of(const RealFunction& out, const RealFunction& f1, const RealFunction& f2, const Exponents& e) {
  const double denom = lp_norm(f1, e.p) * lp_norm(f2, e.q);
  return denom > 0 ? lp_norm(out, e.r) / denom : 0.0;
}

}  // namespace

RatioReport strong_type_ratios(const FamilySpec& family, const Exponents& e, const RatioConfig& config) {
  if (!(e.p > 1 && e.q > 1 && e.r > 0)) throw std::invalid_argument("need p, q > 1 and r > 0");
  std::mt19937_64 rng(config.seed);
  const auto in = draw_inputs(rng, config);
  const AveragedCommutator C(family, config.mesh, config.sampler, config.slot);
  const double p1 = 1.0 / (e.p - 1), q1 = 1.0 / (e.q - 1);  // p' - 1, q' - 1
  RatioReport rep;
  for (const Inputs& x : in) {
    RealFunction f1 = x.f1, f2 = x.f2;
    RealFunction g = C(x.b, f1, f2);
    double best = ratio_of(g, f1, f2, e);
    // Boyd's power method on <C(f1, f2), f3>: each function is replaced by
    // the dual of its gradient
    for (int step = 0; step < config.ascent; ++step) {
      if (g.values().cwiseAbs().maxCoeff() == 0) break;
      const RealFunction f3 = dual_power(g, e.r - 1);
      f1 = dual_power(C.grad1(x.b, f2, f3), p1);
      if (f1.values().cwiseAbs().maxCoeff() == 0) break;
      f2 = dual_power(C.grad2(x.b, f1, f3), q1);
      if (f2.values().cwiseAbs().maxCoeff() == 0) break;
      f1.values() /= lp_norm(f1, e.p);
      f2.values() /= lp_norm(f2, e.q);
      g = C(x.b, f1, f2);
      best = std::max(best, ratio_of(g, f1, f2, e));
    }
    rep.ratios.push_back(best);
  }
  rep.max = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.median = median(rep.ratios);
  return rep;
}

WeakTypeReport weak_type_verify(const FamilySpec& family, const Exponents& e, const RatioConfig& config,
                                const ShiftSampler& phi_sampler) {
  check_holder(e);
  if (!(e.r > 0.5 && e.r < 1)) throw std::invalid_argument("weak type needs 1/2 < r < 1");
  if (config.slot != 1 && config.slot != 2) throw std::invalid_argument("weak type needs slot 1 or 2");
  std::mt19937_64 rng(config.seed);
  const auto in = draw_inputs(rng, config);
  std::vector<RealFunction> sets;
  for (int t = 0; t < config.trials; ++t) sets.push_back(random_set(rng, config.mesh));
  const AveragedCommutator C(family, config.mesh, config.sampler, config.slot);
  std::vector<RealFunction> out;
  for (const Inputs& x : in) out.push_back(C(x.b, x.f1, x.f2));

  WeakTypeReport rep;
  const bool model_form = family.kind == OperatorKind::partial && !family.swapped && family.type[0] == 0 &&
                          family.type[1] == 0 && config.slot == 1;
  if (model_form) rep.phi = "Phi_1(f1) Phi_2^{k_2}(f2)";
  else if (family.kind == OperatorKind::full) rep.phi = "M f1 Phi_1(f2)";
  else rep.phi = "M f1 M f2";
  const GridPair standard(config.mesh);
  for (int t = 0; t < config.trials; ++t) {
    const Inputs& x = in[t];
    RealFunction phi(config.mesh);
    if (model_form) {
      AuxParams p1;
      p1.b = &x.b;
      AuxParams p2;
      p2.l = family.k[1];
      phi = multiply(aux_phi(x.f1, AuxKind::phi1_partial, p1, phi_sampler),
                     aux_phi(x.f2, AuxKind::phi2_partial, p2, phi_sampler));
    } else if (family.kind == OperatorKind::full) {
      phi = multiply(maximal(x.f1, MaximalMode::nondyadic_strong), aux_phi(x.f2, AuxKind::phi1_full, {}, phi_sampler));
    } else {
      phi = multiply(maximal(x.f1, MaximalMode::nondyadic_strong), maximal(x.f2, MaximalMode::nondyadic_strong));
    }
    const double norm = lp_norm(phi, e.r);
    if (norm > 0) phi.values() /= norm;
    const ExceptionalSetReport ex = exceptional_set(phi, sets[t], e.r, standard);
    WeakTypeTrial trial;
    trial.C = ex.C;
    trial.escalations = ex.escalations;
    trial.measure_E = ex.measure_E;
    trial.measure_E_prime = ex.measure_E_prime;
    trial.structure_ok = ex.monotone && ex.enlargement_ok;
    // the best f3 with |f3| <= 1_{E'} is the sign of the output on E'
    const double paired = (out[t].values().cwiseAbs().cwiseProduct(ex.E_prime.values())).sum() * config.mesh.cell_volume();
    const double denom = lp_norm(x.f1, e.p) * lp_norm(x.f2, e.q) * std::pow(ex.measure_E, 1.0 - 1.0 / e.r);
    trial.ratio = denom > 0 ? paired / denom : 0.0;
    rep.measure_ok = rep.measure_ok && ex.measure_E_prime >= 0.99 * ex.measure_E;
    rep.trials.push_back(trial);
  }
  std::vector<double> r;
  for (const auto& t : rep.trials) r.push_back(t.ratio);
  rep.max = *std::max_element(r.begin(), r.end());
  rep.median = median(r);
  return rep;
}

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("an affine fit needs two or more points");
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("an affine fit needs two distinct x values");
  AffineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double scale = 0.0, above = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double yhat = fit.intercept + fit.slope * x[i];
    scale = std::max(scale, std::abs(yhat));
    above = std::max(above, y[i] - yhat);
  }
  fit.superlinear = scale > 0 ? above / scale : 0.0;
  return fit;
}

ComplexitySweep complexity_sweep(const FamilySpec& base, const std::vector<int>& kappas, int draws,
                                 const Exponents& e, const RatioConfig& config) {
  if (draws < 1) throw std::invalid_argument("at least one family draw is needed");
  ComplexitySweep out;
  std::vector<double> x, y;
  for (int kappa : kappas) {
    ComplexityPoint pt;
    pt.kappa = kappa;
    std::vector<double> all;
    for (int d = 0; d < draws; ++d) {
      FamilySpec f = base;
      f.k = {kappa, kappa, kappa};
      f.seed = base.seed + std::uint64_t(d);
      const RatioReport r = strong_type_ratios(f, e, config);
      all.insert(all.end(), r.ratios.begin(), r.ratios.end());
    }
    pt.estimate = *std::max_element(all.begin(), all.end());
    pt.median = median(all);
    out.points.push_back(pt);
    x.push_back(1.0 + kappa);
    y.push_back(pt.estimate);
  }
  out.fit = fit_affine(x, y);
  return out;
}

// ---- duality ----

namespace {

struct Rect {
  int i, li, j, lj;
};

std::vector<Rect> all_rectangles(const GridPair& g) {
  std::vector<Rect> out;
  const int L = g.first.levels();
  for (int i = 0; i <= L; ++i)
    for (int j = 0; j <= L; ++j)
      for (int li = 0; li < g.first.count(i); ++li)
        for (int lj = 0; lj < g.second.count(j); ++lj) out.push_back({i, li, j, lj});
  return out;
}

double area(const GridPair& g, const Rect& r) {
  return std::ldexp(1.0, -r.i * g.first.dim() - r.j * g.second.dim());
}

// (sum_R |b_R|^2 1_R/|R|)^{1/2} on the cells
Eigen::MatrixXd square_sum(const GridPair& g, const std::vector<Rect>& rects, const std::vector<double>& b) {
  const Mesh mesh = g.mesh();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(mesh.cells(Axis::first), mesh.cells(Axis::second));
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const double w = b[k] * b[k] / area(g, rects[k]);
    const auto c1 = g.first.cube(rects[k].i, rects[k].li).cells();
    const auto c2 = g.second.cube(rects[k].j, rects[k].lj).cells();
    for (Index y : c2)
      for (Index x : c1) s(x, y) += w;
  }
  return s.cwiseSqrt();
}

}  // namespace

DualityRun duality_experiment(int levels, int size, int trials, std::uint64_t seed) {
  if (size < 1 || trials < 1) throw std::invalid_argument("duality experiment needs size, trials >= 1");
  const Mesh mesh{levels, 1, 1};
  mesh.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const GridPair standard(mesh);
  std::vector<Rect> pool = all_rectangles(standard);
  DualityRun run;
  run.levels = levels;
  run.size = std::min<int>(size, int(pool.size()));
  for (int t = 0; t < trials; ++t) {
    const GridPair shifted = random_grids(rng, mesh);
    // partial shuffle picks the collection
    for (int k = 0; k < run.size; ++k) std::swap(pool[k], pool[k + rng() % (pool.size() - k)]);
    const std::vector<Rect> C(pool.begin(), pool.begin() + run.size);
    // F: the union of the collection plus scattered cells, so |R cap F| = |R|
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(mesh.cells(Axis::first), mesh.cells(Axis::second));
    for (Index k = 0; k < F.size(); ++k) F.data()[k] = (rng() % 10 == 0) ? 1.0 : 0.0;
    for (const Rect& r : C)
      for (Index y : standard.second.cube(r.j, r.lj).cells())
        for (Index x : standard.first.cube(r.i, r.li).cells()) F(x, y) = 1.0;
    RectangleSequence a(shifted);
    std::vector<double> av, bv;
    for (const Rect& r : C) {
      const double x = gauss(rng) * std::sqrt(area(standard, r));
      a(r.i, r.li, r.j, r.lj) = x;  // a_{R+omega}: same label in D_omega
      av.push_back(x);
    }
    const bool aligned = t % 2 == 0;
    for (std::size_t k = 0; k < C.size(); ++k) bv.push_back(aligned ? av[k] : gauss(rng) * std::sqrt(area(standard, C[k])));
    double lhs = 0.0;
    for (std::size_t k = 0; k < C.size(); ++k) lhs += std::abs(av[k] * bv[k]);
    const double integral = square_sum(standard, C, bv).cwiseProduct(F).sum() * mesh.cell_volume();
    const double norm = sequence_bmo_norm(a).family;
    if (norm > 0 && integral > 0) run.constant = std::max(run.constant, lhs / (norm * integral));
  }
  return run;
}

ReductionCheck one_parameter_reduction(int levels, int trials, std::uint64_t seed) {
  const Mesh mesh{levels, 1, 1};
  mesh.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  ReductionCheck out;
  const Side s2 = mesh.side(Axis::second);
  const DyadicGrid first(mesh.side(Axis::first));
  for (int t = 0; t < trials; ++t) {
    const DyadicGrid second(s2, sample_shift(rng, s2));
    const GridPair g(first, second);
    const int k0 = int(rng() % (levels + 1));
    const int K0 = int(rng() % first.count(k0));
    const double vol0 = first.cube(k0, K0).volume();
    CubeSequence a(second);
    RectangleSequence at(g);
    std::vector<Rect> C;
    std::vector<double> av, bv;
    for (int j = 0; j <= levels; ++j)
      for (int lj = 0; lj < second.count(j); ++lj) {
        if (rng() % 3 != 0) continue;
        const double x = gauss(rng) * std::sqrt(second.cube(j, lj).volume());
        a(j, lj) = x;
        at(k0, K0, j, lj) = x;
        C.push_back({k0, K0, j, lj});
        av.push_back(x);
      }
    if (C.empty()) continue;
    const double one = sequence_bmo_norm(a);
    const double prod = sequence_bmo_norm(at).family;
    const double expected = one / std::sqrt(vol0);
    out.max_error = std::max(out.max_error, std::abs(prod - expected) / expected);

    // the inequality itself, F = union of K0 x V
    const bool aligned = t % 2 == 0;
    for (std::size_t k = 0; k < C.size(); ++k)
      bv.push_back(aligned ? av[k] : gauss(rng) * std::sqrt(second.cube(C[k].j, C[k].lj).volume()));
    double lhs = 0.0;
    for (std::size_t k = 0; k < C.size(); ++k) lhs += std::abs(av[k] * bv[k]);
    // int_F 1_{K0}/|K0| (x) (sum |b_V|^2 1_V/|V|)^{1/2} with F containing K0 x V
    Eigen::VectorXd s = Eigen::VectorXd::Zero(s2.cells());
    Eigen::VectorXd inF = Eigen::VectorXd::Zero(s2.cells());
    const GridPair standard(mesh);
    for (std::size_t k = 0; k < C.size(); ++k)
      for (Index y : standard.second.cube(C[k].j, C[k].lj).cells()) {
        s[y] += bv[k] * bv[k] / standard.second.cube(C[k].j, C[k].lj).volume();
        inF[y] = 1.0;
      }
    const double integral = s.cwiseSqrt().cwiseProduct(inF).sum() * s2.cell_volume();
    if (one > 0 && integral > 0) out.constant = std::max(out.constant, lhs / (one * integral));
  }
  return out;
}

}  // namespace bilab
