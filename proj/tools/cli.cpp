#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bilab/experiments.hpp"
#include "bilab/version.hpp"

namespace bilab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Config {
  int L = 5;
  int n = 1;
  int m = 1;
  std::uint64_t seed = 1;
  int trials = 50;
  int shifts = 64;
  bool exact = false;
  std::string p = "4/3", q = "4/3", r = "2/3";
  std::vector<int> k{0, 0, 0};
  std::vector<int> v{0, 0, 0};
  std::vector<int> type{0, 0};
  std::string kind = "partial";
  bool swapped = false;
  bool rank_one = false;
  double density = 1.0;
  int ascent = 10;
  int slot = 1;
  std::string out = "bilab-out";
  // subcommand specific
  std::string target = "all";
  std::vector<int> sizes{10, 100, 1000};
  int kmax = 3;
  int draws = 4;
  double alpha = 1.0;
  double C_T = 1.0;
};

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

json config_json(const Config& c, const std::string& experiment) {
  json j;
  j["experiment"] = experiment;
  j["L"] = c.L;
  j["n"] = c.n;
  j["m"] = c.m;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["shifts"] = c.shifts;
  j["exact_expectation"] = c.exact;
  j["p"] = c.p;
  j["q"] = c.q;
  j["r"] = c.r;
  j["k"] = c.k;
  j["v"] = c.v;
  j["type"] = c.type;
  j["kind"] = c.kind;
  j["swapped"] = c.swapped;
  j["rank_one"] = c.rank_one;
  j["density"] = c.density;
  j["ascent"] = c.ascent;
  j["slot"] = c.slot;
  if (experiment == "verify") j["target"] = c.target;
  if (experiment == "duality") j["sizes"] = c.sizes;
  if (experiment == "complexity-sweep") {
    j["kmax"] = c.kmax;
    j["draws"] = c.draws;
  }
  if (experiment == "synthesis") {
    j["kmax"] = c.kmax;
    j["alpha"] = c.alpha;
    j["C_T"] = c.C_T;
  }
  return j;
}

Mesh mesh_of(const Config& c) {
  const Mesh mesh{c.L, c.n, c.m};
  try {
    mesh.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return mesh;
}

Exponents exponents_of(const Config& c) {
  Exponents e;
  e.p = parse_rational(c.p);
  e.q = parse_rational(c.q);
  e.r = parse_rational(c.r);
  check_holder(e);
  return e;
}

std::array<int, 3> triple(const std::vector<int>& x, const char* flag) {
  if (x.size() != 3) throw ConfigError(std::string(flag) + " takes three integers, e.g. 1,0,2");
  return {x[0], x[1], x[2]};
}

ShiftSampler sampler_of(const Config& c, std::uint64_t salt) {
  ShiftSampler s;
  s.count = c.shifts;
  s.exact = c.exact;
  s.seed = c.seed * 1000003 + salt;
  return s;
}

FamilySpec family_of(const Config& c) {
  FamilySpec f;
  if (c.kind == "partial") f.kind = OperatorKind::partial;
  else if (c.kind == "full") f.kind = OperatorKind::full;
  else if (c.kind == "shift") f.kind = OperatorKind::shift;
  else throw ConfigError("--kind must be partial, full or shift");
  f.k = triple(c.k, "--k");
  f.v = triple(c.v, "--v");
  if (c.type.size() != 2) throw ConfigError("--type takes two integers, e.g. 0,0");
  f.type = {c.type[0], c.type[1]};
  f.swapped = c.swapped;
  f.rank_one = c.rank_one;
  f.density = c.density;
  f.seed = c.seed;
  return f;
}

RatioConfig ratio_config(const Config& c) {
  RatioConfig rc;
  rc.mesh = mesh_of(c);
  rc.trials = c.trials;
  rc.seed = c.seed;
  rc.sampler = sampler_of(c, 1);
  rc.slot = c.slot;
  rc.ascent = c.ascent;
  return rc;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
  void write(const fs::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

struct Report {
  json results = json::object();
  json assertions = json::array();
  std::vector<std::pair<std::string, Table>> tables;

  void assert_that(const std::string& name, bool ok, double value, double tolerance) {
    assertions.push_back({{"name", name}, {"pass", ok}, {"value", value}, {"tolerance", tolerance}});
  }
  bool pass() const {
    for (const auto& a : assertions)
      if (!a["pass"].get<bool>()) return false;
    return true;
  }
};

// ---- experiments ----

Report verify(const Config& c) {
  if (c.target != "all" && c.target != "identities" && c.target != "linear-algebra")
    throw ConfigError("verify takes identities, linear-algebra or all");
  const Mesh mesh = mesh_of(c);
  std::vector<CheckLine> lines;
  if (c.target != "linear-algebra") lines = identity_suite(mesh, c.trials, c.seed);
  if (c.target != "identities") {
    const auto la = linear_algebra_suite(mesh, c.trials, c.seed + 1);
    lines.insert(lines.end(), la.begin(), la.end());
  }
  Report rep;
  Table t({"check", "instances", "max_residual", "tolerance", "pass"});
  for (const auto& l : lines) {
    rep.results["checks"].push_back(
        {{"name", l.name}, {"instances", l.instances}, {"max_residual", l.max_residual}, {"tolerance", l.tolerance}});
    rep.assert_that(l.name, l.pass(), l.max_residual, l.tolerance);
    t.row({"\"" + l.name + "\"", std::to_string(l.instances), num(l.max_residual), num(l.tolerance),
           l.pass() ? "1" : "0"});
  }
  rep.tables.emplace_back("checks", std::move(t));
  return rep;
}

Report norms(const Config& c) {
  const Exponents e = exponents_of(c);
  const FamilySpec f = family_of(c);
  const RatioReport r = strong_type_ratios(f, e, ratio_config(c));
  Report rep;
  rep.results["family"] = f.describe();
  rep.results["max"] = r.max;
  rep.results["median"] = r.median;
  rep.results["ratios"] = r.ratios;
  Table t({"trial", "ratio"});
  for (std::size_t i = 0; i < r.ratios.size(); ++i) t.row({std::to_string(i), num(r.ratios[i])});
  rep.tables.emplace_back("norms", std::move(t));
  rep.assert_that("ratios finite", std::isfinite(r.max), r.max, 0.0);
  return rep;
}

Report weak_type(const Config& c) {
  const Exponents e = exponents_of(c);
  const FamilySpec f = family_of(c);
  const WeakTypeReport w = weak_type_verify(f, e, ratio_config(c), sampler_of(c, 2));
  Report rep;
  rep.results["family"] = f.describe();
  rep.results["phi"] = w.phi;
  rep.results["max"] = w.max;
  rep.results["median"] = w.median;
  Table t({"trial", "ratio", "C", "escalations", "measure_E", "measure_E_prime", "structure_ok"});
  bool structure = true;
  double worst = 1.0;
  for (std::size_t i = 0; i < w.trials.size(); ++i) {
    const auto& x = w.trials[i];
    t.row({std::to_string(i), num(x.ratio), num(x.C), std::to_string(x.escalations), num(x.measure_E),
           num(x.measure_E_prime), x.structure_ok ? "1" : "0"});
    structure = structure && x.structure_ok;
    worst = std::min(worst, x.measure_E_prime / x.measure_E);
  }
  rep.tables.emplace_back("weak_type", std::move(t));
  rep.assert_that("|E'| >= 99/100 |E|", w.measure_ok, worst, 0.99);
  rep.assert_that("Omega_u monotone and 3R in enlarged sets", structure, structure ? 1.0 : 0.0, 1.0);
  return rep;
}

Report duality(const Config& c) {
  Report rep;
  Table t({"levels", "size", "constant"});
  for (int s : c.sizes) {
    const DualityRun d = duality_experiment(c.L, s, c.trials, c.seed);
    t.row({std::to_string(d.levels), std::to_string(d.size), num(d.constant)});
    rep.results["runs"].push_back({{"levels", d.levels}, {"size", d.size}, {"constant", d.constant}});
  }
  rep.tables.emplace_back("duality", std::move(t));
  const ReductionCheck r = one_parameter_reduction(c.L, c.trials, c.seed + 1);
  rep.results["reduction"] = {{"max_error", r.max_error}, {"constant", r.constant}};
  rep.assert_that("one-parameter norm reduction", r.max_error <= 1e-12, r.max_error, 1e-12);
  return rep;
}

Report complexity(const Config& c) {
  if (c.kmax < 1) throw ConfigError("--kmax must be at least 1");
  const Exponents e = exponents_of(c);
  FamilySpec f = family_of(c);
  if (f.kind != OperatorKind::partial) throw ConfigError("complexity-sweep runs partial paraproducts");
  std::vector<int> kappas;
  for (int k = 0; k <= c.kmax; ++k) kappas.push_back(k);
  const ComplexitySweep s = complexity_sweep(f, kappas, c.draws, e, ratio_config(c));
  Report rep;
  Table t({"kappa", "one_plus_kappa", "estimate", "median"});
  for (const auto& p : s.points) {
    t.row({std::to_string(p.kappa), std::to_string(1 + p.kappa), num(p.estimate), num(p.median)});
    rep.results["points"].push_back({{"kappa", p.kappa}, {"estimate", p.estimate}, {"median", p.median}});
  }
  rep.results["fit"] = {{"intercept", s.fit.intercept}, {"slope", s.fit.slope}, {"superlinear", s.fit.superlinear}};
  rep.tables.emplace_back("complexity", std::move(t));
  return rep;
}

Report synthesis(const Config& c) {
  const Mesh mesh = mesh_of(c);
  const Exponents e = exponents_of(c);
  SynthesisSpec spec;
  spec.alpha = c.alpha;
  spec.C_T = c.C_T;
  spec.slot = c.slot;
  spec.sampler = sampler_of(c, 3);
  auto add = [&](OperatorKind kind, std::array<int, 3> k, std::array<int, 3> v, bool swapped) {
    SynthesisTerm t;
    t.k = k;
    t.v = v;
    t.family.kind = kind;
    t.family.k = swapped ? v : k;
    t.family.v = v;
    t.family.swapped = swapped;
    t.family.seed = c.seed + spec.terms.size();
    if (kind == OperatorKind::shift) t.family.type = {-1, -1};
    spec.terms.push_back(t);
  };
  add(OperatorKind::full, {0, 0, 0}, {0, 0, 0}, false);
  for (int x = 1; x <= c.kmax; ++x) {
    add(OperatorKind::partial, {x, x, x}, {0, 0, 0}, false);
    add(OperatorKind::partial, {0, 0, 0}, {x, x, x}, true);
    add(OperatorKind::shift, {x, 0, x}, {0, x, x}, false);
  }
  validate_synthesis(spec, mesh);
  std::mt19937_64 rng(c.seed);
  const RealFunction b = generate_bmo_function(rng, mesh, 1.0);
  const RealFunction f1 = random_test_function(rng, mesh), f2 = random_test_function(rng, mesh);
  const SynthesisResult s = synthesize(spec, b, f1, f2);

  Report rep;
  Table t({"term", "family", "alpha", "norm_r"});
  double sum_r = 0.0;
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    const double nr = lp_norm(s.terms[i], e.r);
    sum_r += std::pow(nr, e.r);
    t.row({std::to_string(i), "\"" + spec.terms[i].family.describe() + "\"", num(s.alphas[i]), num(nr)});
    rep.results["terms"].push_back(
        {{"family", spec.terms[i].family.describe()}, {"alpha", s.alphas[i]}, {"norm_r", nr}});
  }
  const double total_r = std::pow(lp_norm(s.total, e.r), e.r);
  rep.results["budget"] = s.budget(e.r);
  rep.results["total_norm_r"] = lp_norm(s.total, e.r);
  rep.tables.emplace_back("synthesis", std::move(t));
  if (e.r <= 1)
    rep.assert_that("||sum||_r^r <= sum ||term||_r^r", total_r <= sum_r * (1 + 1e-12), total_r, sum_r);
  return rep;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void add_common(CLI::App& app, Config& c) {
  app.add_option("--L", c.L, "levels of the mesh")->capture_default_str();
  app.add_option("--n", c.n, "dimension of the first parameter (1 or 2)")->capture_default_str();
  app.add_option("--m", c.m, "dimension of the second parameter (1 or 2)")->capture_default_str();
  app.add_option("--seed", c.seed)->capture_default_str();
  app.add_option("--trials", c.trials)->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--shifts", c.shifts, "sampled grid pairs per expectation")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--exact-expectation", c.exact, "average over every grid pair instead of sampling");
  app.add_option("--p", c.p, "exponent of f1, e.g. 4/3")->capture_default_str();
  app.add_option("--q", c.q, "exponent of f2")->capture_default_str();
  app.add_option("--r", c.r, "output exponent, 1/p + 1/q = 1/r")->capture_default_str();
  app.add_option("--k", c.k, "complexity on the first parameter")->delimiter(',')->capture_default_str();
  app.add_option("--v", c.v, "complexity on the second parameter (shifts)")->delimiter(',')->capture_default_str();
  app.add_option("--type", c.type, "slot pair of the operator type")->delimiter(',')->capture_default_str();
  app.add_option("--kind", c.kind, "partial, full or shift")->capture_default_str();
  app.add_flag("--swapped", c.swapped, "symmetric partial paraproduct");
  app.add_flag("--rank-one", c.rank_one, "rank-one coefficient signs per top cube");
  app.add_option("--density", c.density)->capture_default_str();
  app.add_option("--ascent", c.ascent, "power-method steps per start")->capture_default_str();
  app.add_option("--slot", c.slot, "commuted input, 1 or 2 (0: the operator alone)")->capture_default_str();
  app.add_option("--out", c.out, "output directory")->capture_default_str();
}

}  // namespace

json strip_timestamp(json report) {
  report.erase("timestamp");
  return report;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"bilab: experiments on bi-parameter commutators"};
  app.set_config("--config", "", "TOML/INI file with the same keys as the flags");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bilab::version));
  Config c;
  add_common(app, c);
  auto fall = [](CLI::App* s) { s->fallthrough(); };
  CLI::App* v = app.add_subcommand("verify", "identity suite and exact linear algebra");
  v->add_option("target", c.target, "identities, linear-algebra or all")->capture_default_str();
  CLI::App* nrm = app.add_subcommand("norms", "strong type ratio estimates");
  CLI::App* dual = app.add_subcommand("duality", "H^1-BMO type duality constants");
  dual->add_option("--sizes", c.sizes, "collection sizes")->delimiter(',')->capture_default_str();
  CLI::App* weak = app.add_subcommand("weak-type", "exceptional sets and weak type ratios");
  CLI::App* cx = app.add_subcommand("complexity-sweep", "norm estimates against 1 + max k");
  cx->add_option("--kmax", c.kmax)->capture_default_str();
  cx->add_option("--draws", c.draws, "family draws per complexity")->capture_default_str();
  CLI::App* syn = app.add_subcommand("synthesis", "sum of C_T alpha_{k,v} E[b, U] over model operators");
  syn->add_option("--kmax", c.kmax)->capture_default_str();
  syn->add_option("--alpha", c.alpha)->capture_default_str();
  syn->add_option("--C-T", c.C_T)->capture_default_str();
  for (CLI::App* s : {v, nrm, dual, weak, cx, syn}) fall(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string name;
  for (CLI::App* s : {v, nrm, dual, weak, cx, syn})
    if (s->parsed()) name = s->get_name();

  const auto start = std::chrono::steady_clock::now();
  Report rep;
  try {
    if (name == "verify") rep = verify(c);
    else if (name == "norms") rep = norms(c);
    else if (name == "duality") rep = duality(c);
    else if (name == "weak-type") rep = weak_type(c);
    else if (name == "complexity-sweep") rep = complexity(c);
    else rep = synthesis(c);
  } catch (const ResolutionError& e) {
    std::cerr << "config error (resolution): " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json report;
  report["tool"] = "bilab";
  report["version"] = bilab::version;
  report["config"] = config_json(c, name);
  report["results"] = rep.results;
  report["assertions"] = rep.assertions;
  report["pass"] = rep.pass();
  report["timestamp"] = {{"utc", utc_now()}, {"elapsed_seconds", elapsed}};

  const fs::path out(c.out);
  fs::create_directories(out / "tables");
  {
    std::ofstream f(out / "report.json");
    f << report.dump(2) << "\n";
  }
  for (const auto& [tname, table] : rep.tables) table.write(out / "tables" / (tname + ".csv"));

  for (const auto& a : rep.assertions)
    std::cout << (a["pass"].get<bool>() ? "PASS " : "FAIL ") << a["name"].get<std::string>() << "\n";
  std::cout << "report: " << (out / "report.json").string() << "\n";
  return rep.pass() ? 0 : 1;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(int(argv.size()), argv.data());
}

}  // namespace bilab::cli
