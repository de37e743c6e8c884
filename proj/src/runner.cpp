#include "metric_lab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "metric_lab/certify.hpp"
#include "metric_lab/errors.hpp"
#include "metric_lab/expr.hpp"
#include "metric_lab/io.hpp"
#include "metric_lab/kernel.hpp"
#include "metric_lab/norms.hpp"
#include "metric_lab/operators.hpp"
#include "metric_lab/parallel.hpp"
#include "metric_lab/random.hpp"
#include "metric_lab/verify.hpp"

namespace metric_lab {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Typed access to one JSON object with path-qualified diagnostics.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const {
    if (!has(key)) throw ConfigError(at(key) + ": required field is missing");
    return j_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  /// Number or the string "inf".
  double extended(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (v.is_string() && v.get<std::string>() == "inf") return kInfinity;
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number or \"inf\"");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const { return has(key) ? integer(key) : fallback; }
  std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum = 1) const {
    const auto v = integer(key, static_cast<std::int64_t>(fallback));
    if (v < static_cast<std::int64_t>(minimum))
      throw ConfigError(at(key) + ": must be at least " + std::to_string(minimum));
    return static_cast<std::size_t>(v);
  }
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(at(key) + ": seeds are nonnegative integers");
    return v.get<std::uint64_t>();
  }

  std::string str(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& fallback) const { return has(key) ? str(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(at(key) + ": expected true or false");
    return v.get<bool>();
  }

  Obj child(const std::string& key) const { return Obj(raw(key), at(key)); }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items()) {
      (void)v;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        throw ConfigError(at(k) + ": unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
};

struct SpaceSpec {
  std::string builder;
  int dim = 1;
  int n = 8;
  int level = 1;
  WeightMode weights = WeightMode::uniform_total_one;
  std::size_t budget = kDefaultPointBudget;
  fs::path file;
};

struct CertificateSpec {
  std::optional<double> r_min, r_max;
  bool interior = true;
};

struct KernelSpec {
  bool present = false;
  AngularPattern pattern = AngularPattern::random_pm1;
  std::optional<double> nu;  // empty: certified exponent
  bool project = true;
  std::uint64_t seed = 0;
  fs::path table;
};

struct FieldSpec {
  std::string path;
  std::string name;
  std::string kind;
  std::string distribution = "bumps";
  std::uint64_t seed = 0;
  int bumps = 4;
  double lo = 0.0, hi = 1.0;
  std::optional<Expression> formula;
  fs::path file;
};

struct CheckSpec {
  std::string path;
  InequalityId id = InequalityId::thm2;
  bool sharpness = false;
  std::string field;
  std::string gradient = "auto";
  PointwiseParams params;
  FunctionalCase fcase;
  std::string exponent_field;
  NormSpec norm;
  std::vector<std::string> fields;
  std::size_t trials = 50, points = 5, k_count = 25, balls = 20, iterations = 500;
  PoincareParams poincare;
  std::uint64_t seed = 0;
  bool needs_kernel = false;
};

struct Config {
  std::uint64_t seed = 0;
  double tolerance_scale = 1.0;
  std::size_t jobs = 1;
  SpaceSpec space;
  CertificateSpec certificate;
  KernelSpec kernel;
  std::vector<FieldSpec> fields;
  std::vector<CheckSpec> checks;
  fs::path output;
  json effective;  // hashed: overrides applied, jobs and output removed
};

WeightMode parse_weights(const Obj& o) {
  const auto w = o.str("weights", "uniform-total-1");
  if (w == "uniform-total-1") return WeightMode::uniform_total_one;
  if (w == "cell-volume") return WeightMode::cell_volume;
  throw ConfigError(o.at("weights") + ": expected \"uniform-total-1\" or \"cell-volume\"");
}

YoungFunction parse_phi(const Obj& o) {
  o.allow({"kind", "p", "cap"});
  const auto kind = o.str("kind");
  const double p = o.number("p");
  YoungFunction phi;
  if (kind == "power") phi = YoungFunction::power(p);
  else if (kind == "power-log") phi = YoungFunction::power_log(p);
  else if (kind == "capped") phi = YoungFunction::power_capped(p, o.number("cap"));
  else throw ConfigError(o.at("kind") + ": Young function kind must be power, power-log or capped");
  try {
    validate_young_function(phi);
  } catch (const ArgumentError& e) {
    throw ConfigError(o.path() + ": " + e.what());
  }
  return phi;
}

void require_morrey_exponents(const Obj& o, double p, double q) {
  if (!(p > 1.0) || !(p <= q) || !std::isfinite(q))
    throw ConfigError(o.path() + ": Morrey constraint 1 < p <= q < inf violated (p=" + format_double(p) +
                      ", q=" + format_double(q) + ")");
}

NormSpec parse_norm(const Obj& o, std::string& exponent_field) {
  o.allow({"kind", "p", "q", "r", "m", "phi", "exponent"});
  const auto kind = o.str("kind");
  NormSpec spec;
  if (kind == "lebesgue") spec = NormSpec::lebesgue(o.number("p"));
  else if (kind == "lorentz") spec = NormSpec::lorentz(o.number("r"), o.extended("m", 2.0));
  else if (kind == "morrey") {
    spec = NormSpec::morrey(o.number("p"), o.number("q"));
    if (spec.p > spec.q)
      throw ConfigError(o.path() + ": Morrey constraint p <= q violated (p=" + format_double(spec.p) +
                        ", q=" + format_double(spec.q) + ")");
  } else if (kind == "orlicz") spec = NormSpec::orlicz(parse_phi(o.child("phi")));
  else if (kind == "varexp") {
    spec.kind = NormSpec::Kind::varexp;
    exponent_field = o.str("exponent");
    return spec;
  } else throw ConfigError(o.at("kind") + ": norm kind must be lebesgue, lorentz, morrey, orlicz or varexp");
  try {
    spec.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(o.path() + ": " + e.what());
  }
  return spec;
}

void parse_pointwise(const Obj& o, CheckSpec& c, bool uses_s) {
  c.params.s = o.number("s", 1.0);
  c.params.p = o.number("p", 1.5);
  c.params.q = o.number("q", 1.5);
  if (uses_s && !(c.params.s > 0.0)) throw ConfigError(o.at("s") + ": Riesz order s must be positive");
  require_morrey_exponents(o, c.params.p, c.params.q);
}

CheckSpec parse_check(const Obj& o, std::uint64_t default_seed) {
  CheckSpec c;
  c.path = o.path();
  const auto id = o.str("id");
  c.seed = o.seed("seed", default_seed);
  if (id == "sharpness") {
    o.allow({"id", "target", "iterations", "seed", "s", "p", "q"});
    c.sharpness = true;
    const auto target = o.str("target");
    if (target != "thm1" && target != "thm2" && target != "thm3")
      throw ConfigError(o.at("target") + ": sharpness search supports thm1, thm2 and thm3");
    c.id = parse_inequality_id(target);
    c.iterations = o.count("iterations", 500, 0);
    parse_pointwise(o, c, true);
    c.needs_kernel = c.id != InequalityId::thm2;
    return c;
  }
  try {
    c.id = parse_inequality_id(id);
  } catch (const ArgumentError&) {
    throw ConfigError(o.at("id") + ": unknown check id \"" + id + "\"");
  }
  switch (c.id) {
    case InequalityId::thm1:
      o.allow({"id", "field", "gradient", "seed"});
      c.field = o.str("field");
      c.gradient = o.str("gradient", "auto");
      c.needs_kernel = true;
      break;
    case InequalityId::thm2:
      o.allow({"id", "field", "s", "p", "q", "seed"});
      c.field = o.str("field");
      parse_pointwise(o, c, true);
      break;
    case InequalityId::thm3:
      o.allow({"id", "field", "gradient", "p", "q", "seed"});
      c.field = o.str("field");
      c.gradient = o.str("gradient", "auto");
      parse_pointwise(o, c, false);
      c.needs_kernel = true;
      break;
    case InequalityId::hedberg_split:
      o.allow({"id", "field", "s", "p", "q", "points", "k_grid", "seed"});
      c.field = o.str("field");
      parse_pointwise(o, c, true);
      c.points = o.count("points", 5);
      c.k_count = o.count("k_grid", 25, 2);
      break;
    case InequalityId::sobolev_like:
    case InequalityId::lorentz_endpoint:
    case InequalityId::morrey_functional:
    case InequalityId::generic_functional: {
      o.allow({"id", "field", "gradient", "p", "q", "p1", "q1", "case", "seed"});
      c.field = o.str("field");
      c.gradient = o.str("gradient", "auto");
      c.needs_kernel = true;
      if (c.id == InequalityId::sobolev_like) {
        c.params.q = o.number("q", 1.5);
        c.params.p = c.params.q;
        require_morrey_exponents(o, c.params.p, c.params.q);
        c.fcase = FunctionalCase::sobolev_like();
        break;
      }
      parse_pointwise(o, c, false);
      if (c.id == InequalityId::lorentz_endpoint) {
        c.fcase = FunctionalCase::lorentz_endpoint();
      } else if (c.id == InequalityId::morrey_functional) {
        c.fcase = FunctionalCase::morrey(o.number("p1"), o.number("q1"));
        if (!(c.fcase.q1 >= c.fcase.p1))
          throw ConfigError(o.path() + ": Morrey case requires q1 >= p1 (p1=" + format_double(c.fcase.p1) +
                            ", q1=" + format_double(c.fcase.q1) + ")");
      } else {
        const Obj fc = o.child("case");
        fc.allow({"kind", "r", "m", "phi", "exponent"});
        const auto kind = fc.str("kind");
        if (kind == "lebesgue") c.fcase = FunctionalCase::lebesgue(fc.number("r"));
        else if (kind == "lorentz") c.fcase = FunctionalCase::lorentz(fc.number("r"), fc.extended("m", 2.0));
        else if (kind == "orlicz") c.fcase = FunctionalCase::orlicz(parse_phi(fc.child("phi")));
        else if (kind == "varexp") {
          c.fcase.kind = FunctionalCase::Kind::varexp;
          c.exponent_field = fc.str("exponent");
        } else throw ConfigError(fc.at("kind") + ": functional case must be lebesgue, lorentz, orlicz or varexp");
        if ((kind == "lebesgue" || kind == "lorentz") && !(c.fcase.r >= 1.0))
          throw ConfigError(fc.at("r") + ": must be >= 1");
        if (kind == "lorentz" && !(c.fcase.m >= 1.0)) throw ConfigError(fc.at("m") + ": must be >= 1");
      }
      break;
    }
    case InequalityId::maximal_bound:
      o.allow({"id", "norm", "trials", "fields", "seed"});
      c.norm = parse_norm(o.child("norm"), c.exponent_field);
      c.trials = o.count("trials", 50);
      if (o.has("fields")) c.fields = o.raw("fields").get<std::vector<std::string>>();
      break;
    case InequalityId::poincare: {
      o.allow({"id", "fields", "s_exp", "q_exp", "sigma", "balls", "seed"});
      const json& names = o.raw("fields");
      if (!names.is_array() || names.empty()) throw ConfigError(o.at("fields") + ": expected a nonempty list of field names");
      c.fields = names.get<std::vector<std::string>>();
      c.poincare.s_exp = o.number("s_exp", 1.0);
      c.poincare.q_exp = o.number("q_exp", 2.0);
      c.poincare.sigma = o.number("sigma", 2.0);
      c.balls = o.count("balls", 20);
      try {
        c.poincare.validate();
      } catch (const ArgumentError& e) {
        throw ConfigError(o.path() + ": " + e.what());
      }
      break;
    }
  }
  return c;
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Config parse_config(const std::string& text, const fs::path& base_dir, const RunOverrides& ov) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON (" + line_column(text, e.byte) + "): " + e.what());
  }
  const Obj root(doc, "config");
  root.allow({"schema_version", "seed", "tolerance_scale", "jobs", "space", "certificate", "kernel", "fields", "checks",
              "output"});
  if (root.integer("schema_version") != kConfigSchemaVersion)
    throw ConfigError(root.at("schema_version") + ": unsupported schema version (expected 1)");

  Config cfg;
  if (ov.seed) cfg.seed = *ov.seed;
  else if (root.has("seed")) cfg.seed = root.seed("seed", 0);
  else throw ConfigError(root.at("seed") + ": a global seed is required (or pass --seed)");
  cfg.tolerance_scale = ov.tolerance_scale ? *ov.tolerance_scale : root.number("tolerance_scale", 1.0);
  if (!(cfg.tolerance_scale > 0.0)) throw ConfigError(root.at("tolerance_scale") + ": must be positive");
  cfg.jobs = ov.jobs ? *ov.jobs : root.count("jobs", 1);

  const Obj sp = root.child("space");
  cfg.space.builder = sp.str("builder");
  if (cfg.space.builder == "grid") {
    sp.allow({"builder", "dim", "n", "weights", "budget"});
    cfg.space.dim = static_cast<int>(sp.integer("dim"));
    cfg.space.n = static_cast<int>(sp.integer("n"));
    cfg.space.weights = parse_weights(sp);
    if (cfg.space.dim < 1 || cfg.space.dim > 3) throw ConfigError(sp.at("dim") + ": grid dimension must be 1, 2 or 3");
    if (cfg.space.n < 2) throw ConfigError(sp.at("n") + ": grid needs at least 2 points per side");
  } else if (cfg.space.builder == "cantor") {
    sp.allow({"builder", "dim", "level", "budget"});
    cfg.space.dim = static_cast<int>(sp.integer("dim", 1));
    cfg.space.level = static_cast<int>(sp.integer("level"));
    if (cfg.space.dim < 1 || cfg.space.dim > 2) throw ConfigError(sp.at("dim") + ": Cantor dimension must be 1 or 2");
    if (cfg.space.level < 1) throw ConfigError(sp.at("level") + ": must be at least 1");
  } else if (cfg.space.builder == "file") {
    sp.allow({"builder", "path", "budget"});
    cfg.space.file = base_dir / sp.str("path");
  } else {
    throw ConfigError(sp.at("builder") + ": builder must be grid, cantor or file");
  }
  cfg.space.budget = sp.count("budget", kDefaultPointBudget);

  if (root.has("certificate")) {
    const Obj c = root.child("certificate");
    c.allow({"r_min", "r_max", "centers"});
    if (c.has("r_min")) cfg.certificate.r_min = c.number("r_min");
    if (c.has("r_max")) cfg.certificate.r_max = c.number("r_max");
    const auto centers = c.str("centers", "interior");
    if (centers != "interior" && centers != "all") throw ConfigError(c.at("centers") + ": expected interior or all");
    cfg.certificate.interior = centers == "interior";
  }

  if (root.has("kernel")) {
    const Obj k = root.child("kernel");
    k.allow({"pattern", "nu", "project", "seed", "table"});
    cfg.kernel.present = true;
    try {
      cfg.kernel.pattern = parse_angular_pattern(k.str("pattern", "random-pm1"));
    } catch (const ArgumentError& e) {
      throw ConfigError(k.at("pattern") + ": " + e.what());
    }
    if (k.has("nu") && !(k.raw("nu").is_string() && k.str("nu") == "auto")) {
      cfg.kernel.nu = k.number("nu");
      if (!(*cfg.kernel.nu > 0.0)) throw ConfigError(k.at("nu") + ": kernel exponent must be positive");
    }
    cfg.kernel.project = k.boolean("project", true);
    cfg.kernel.seed = k.seed("seed", mix_hash(cfg.seed, 0x6b, 0));
    if (cfg.kernel.pattern == AngularPattern::custom) cfg.kernel.table = base_dir / k.str("table");
  }

  std::set<std::string> names;
  if (root.has("fields")) {
    const json& arr = root.raw("fields");
    if (!arr.is_array()) throw ConfigError(root.at("fields") + ": expected a list");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Obj f(arr[i], "config.fields[" + std::to_string(i) + "]");
      FieldSpec fs_;
      fs_.path = f.path();
      fs_.name = f.str("name");
      if (!names.insert(fs_.name).second) throw ConfigError(f.at("name") + ": duplicate field name");
      fs_.kind = f.str("kind");
      if (fs_.kind == "random") {
        f.allow({"name", "kind", "distribution", "seed", "bumps", "lo", "hi"});
        fs_.distribution = f.str("distribution", "bumps");
        if (fs_.distribution != "bumps" && fs_.distribution != "signed-bumps" && fs_.distribution != "uniform")
          throw ConfigError(f.at("distribution") + ": expected bumps, signed-bumps or uniform");
        fs_.seed = f.seed("seed", mix_hash(cfg.seed, i, 0xf1e1d));
        fs_.bumps = static_cast<int>(f.count("bumps", 4));
        fs_.lo = f.number("lo", 0.0);
        fs_.hi = f.number("hi", 1.0);
      } else if (fs_.kind == "formula") {
        f.allow({"name", "kind", "expr"});
        try {
          fs_.formula = Expression::parse(f.str("expr"));
        } catch (const ConfigError& e) {
          throw ConfigError(f.at("expr") + ": " + e.what());
        }
      } else if (fs_.kind == "file") {
        f.allow({"name", "kind", "path"});
        fs_.file = base_dir / f.str("path");
      } else {
        throw ConfigError(f.at("kind") + ": field kind must be random, formula or file");
      }
      cfg.fields.push_back(std::move(fs_));
    }
  }

  const json& checks = root.raw("checks");
  if (!checks.is_array()) throw ConfigError(root.at("checks") + ": expected a list");
  for (std::size_t i = 0; i < checks.size(); ++i) {
    auto c = parse_check(Obj(checks[i], "config.checks[" + std::to_string(i) + "]"), mix_hash(cfg.seed, i, 0xc4ec));
    auto need = [&](const std::string& name, const std::string& what) {
      if (!names.count(name)) throw ConfigError(c.path + "." + what + ": unknown field \"" + name + "\"");
    };
    if (!c.field.empty()) need(c.field, "field");
    if (c.gradient != "auto") need(c.gradient, "gradient");
    if (!c.exponent_field.empty()) need(c.exponent_field, "exponent");
    for (const auto& n : c.fields) need(n, "fields");
    if (c.needs_kernel && !cfg.kernel.present) throw ConfigError(c.path + ": this check needs a kernel section");
    cfg.checks.push_back(std::move(c));
  }

  if (ov.output_dir) cfg.output = *ov.output_dir;
  else if (root.has("output")) {
    const Obj o = root.child("output");
    o.allow({"dir"});
    cfg.output = base_dir / o.str("dir");
  } else {
    cfg.output = base_dir / "metric_lab_out";
  }

  cfg.effective = doc;
  cfg.effective["seed"] = cfg.seed;
  cfg.effective["tolerance_scale"] = cfg.tolerance_scale;
  cfg.effective.erase("jobs");
  cfg.effective.erase("output");
  return cfg;
}

Space build_space(const SpaceSpec& s) {
  json key;
  key["builder"] = s.builder;
  switch (s.builder[0]) {
    case 'g':
      key["dim"] = s.dim;
      key["n"] = s.n;
      key["weights"] = s.weights == WeightMode::cell_volume ? "cell-volume" : "uniform-total-1";
      return with_distance_cache(key.dump(), [&] { return build_grid(s.dim, s.n, s.weights, s.budget); });
    case 'c':
      key["dim"] = s.dim;
      key["level"] = s.level;
      return with_distance_cache(key.dump(), [&] { return build_cantor(s.level, s.dim, s.budget); });
    default: {
      const std::string text = read_text_file(s.file);
      key["content"] = hex64(fnv1a(text));
      Space space = with_distance_cache(key.dump(), [&] { return space_from_json(json::parse(text)); });
      if (space.size() > s.budget) throw SizeError("space file exceeds the point budget");
      return space;
    }
  }
}

ScalarField build_field(const Space& space, const FieldSpec& f) {
  if (f.kind == "random") {
    if (f.distribution == "uniform") return random_uniform_field(space, f.seed, f.lo, f.hi);
    if (f.distribution == "signed-bumps") return random_signed_bump_field(space, f.seed, f.bumps);
    return random_bump_field(space, f.seed, f.bumps);
  }
  if (f.kind == "formula") {
    if (f.formula->arity() > space.dim())
      throw ConfigError(f.path + ".expr: formula uses coordinates the space does not have");
    std::vector<double> v(space.size());
    for (PointId i = 0; i < space.size(); ++i) v[i] = f.formula->evaluate(space.coordinate(i));
    try {
      return ScalarField(space, std::move(v));
    } catch (const ArgumentError& e) {
      throw ConfigError(f.path + ".expr: " + e.what());
    }
  }
  try {
    return read_field_file(space, f.file);
  } catch (const ArgumentError& e) {
    throw ConfigError(f.path + ".path: " + e.what());
  }
}

struct Context {
  const Space& space;
  const AhlforsCertificate& cert;
  const RoughKernelMatrix* kernel;
  const std::map<std::string, ScalarField>& fields;
  double tolerance_scale;
  std::optional<double> poincare_constant;

  const ScalarField& field(const std::string& name) const { return fields.at(name); }
  ScalarField gradient(const CheckSpec& c) const {
    if (c.gradient != "auto") return field(c.gradient);
    return graph_upper_gradient(space, field(c.field)).g;
  }
  CheckOptions options(const CheckSpec& c) const {
    CheckOptions o;
    o.tolerance_scale = tolerance_scale;
    o.seed = c.seed;
    o.poincare_constant = poincare_constant;
    return o;
  }
};

std::vector<std::pair<PointId, double>> sample_balls(const Space& space, const AhlforsCertificate& cert, double sigma,
                                                     std::size_t count, std::uint64_t seed) {
  const double hi = std::min(cert.r_max, space.diameter() / sigma);
  const double lo = std::min(cert.r_min, hi);
  Rng rng(mix_hash(seed, 0xba11, count));
  std::vector<std::pair<PointId, double>> balls;
  for (PointId c : sample_points(space, count, seed)) balls.push_back({c, lo * std::pow(hi / lo, rng.uniform())});
  return balls;
}

InequalityReport run_check(const Context& ctx, const CheckSpec& c) {
  const auto options = ctx.options(c);
  if (c.sharpness) {
    SharpnessConfig sc{c.id, c.params, ctx.kernel};
    const auto res = sharpness_search(ctx.space, sc, ctx.cert, c.iterations, c.seed);
    const ScalarField& f = res.best_field;
    InequalityReport r;
    if (c.id == InequalityId::thm2) r = check_thm2(ctx.space, f, c.params, ctx.cert, options);
    else {
      const auto g = graph_upper_gradient(ctx.space, f).g;
      r = c.id == InequalityId::thm1 ? check_thm1(ctx.space, *ctx.kernel, f, g, ctx.cert, options)
                                     : check_thm3(ctx.space, *ctx.kernel, f, g, c.params, ctx.cert, options);
    }
    ojson trace = ojson::array();
    for (const auto& step : res.trace) trace.push_back({step.iteration, step.move, step.point, step.ratio});
    r.params["search"] = ojson{{"iterations", c.iterations},
                               {"initial_ratio", res.initial_ratio},
                               {"best_ratio", res.best_ratio},
                               {"accepted", res.trace.size()},
                               {"trace", std::move(trace)}};
    return r;
  }
  switch (c.id) {
    case InequalityId::thm1:
    case InequalityId::thm3: {
      const ScalarField g = ctx.gradient(c);
      return check_pointwise_theorem(ctx.space, ctx.kernel, ctx.field(c.field), &g, c.id, c.params, ctx.cert, options);
    }
    case InequalityId::thm2: return check_thm2(ctx.space, ctx.field(c.field), c.params, ctx.cert, options);
    case InequalityId::hedberg_split: {
      auto h = check_hedberg_split(ctx.space, ctx.field(c.field), c.params, ctx.cert,
                                   default_k_grid(ctx.space, c.k_count), sample_points(ctx.space, c.points, c.seed),
                                   options);
      return std::move(h.report);
    }
    case InequalityId::sobolev_like:
    case InequalityId::lorentz_endpoint:
    case InequalityId::morrey_functional:
    case InequalityId::generic_functional: {
      FunctionalCase fc = c.fcase;
      if (!c.exponent_field.empty()) {
        const auto v = ctx.field(c.exponent_field).values();
        fc.exponent.assign(v.begin(), v.end());
      }
      return check_functional(ctx.space, *ctx.kernel, ctx.field(c.field), ctx.gradient(c), fc, c.params, ctx.cert,
                              options);
    }
    case InequalityId::maximal_bound: {
      NormSpec spec = c.norm;
      if (!c.exponent_field.empty()) {
        const auto v = ctx.field(c.exponent_field).values();
        spec = NormSpec::varexp(std::vector<double>(v.begin(), v.end()));
      }
      if (c.fields.empty()) return maximal_boundedness(ctx.space, spec, c.trials, c.seed);
      std::vector<ScalarField> fs_;
      for (const auto& n : c.fields) fs_.push_back(ctx.field(n));
      auto r = maximal_boundedness(ctx.space, spec, fs_);
      r.seed = c.seed;
      return r;
    }
    case InequalityId::poincare: {
      std::vector<FieldPair> pairs;
      for (const auto& n : c.fields) pairs.emplace_back(ctx.field(n), graph_upper_gradient(ctx.space, ctx.field(n)).g);
      auto r = poincare_report(ctx.space, c.poincare, pairs,
                               sample_balls(ctx.space, ctx.cert, c.poincare.sigma, c.balls, c.seed));
      r.seed = c.seed;
      r.params["certificate"] = certificate_json(ctx.cert);
      return r;
    }
  }
  throw ArgumentError("unsupported check");
}

std::string report_file_name(std::size_t index, const CheckSpec& c) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", index);
  return std::string("report_") + buf + "_" + (c.sharpness ? "sharpness_" : "") + to_string(c.id) + ".json";
}

void clear_bundle(const fs::path& dir) {
  if (!fs::exists(dir)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    const bool ours = name == "manifest.json" || name == "summary.txt" || name == "reports.json" ||
                      (name.rfind("report_", 0) == 0 && (entry.path().extension() == ".json" ||
                                                         entry.path().extension() == ".csv"));
    if (ours && entry.is_regular_file()) fs::remove(entry.path());
  }
}

std::string join_ids(const std::vector<std::size_t>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? ", " : "") + std::to_string(ids[i]);
  return s;
}

std::vector<fs::path> bundle_reports(const fs::path& dir) {
  std::vector<fs::path> files;
  const auto manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    const auto doc = read_json_file(manifest);
    for (const auto& r : doc.at("reports")) files.push_back(dir / r.at("file").get<std::string>());
    return files;
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

int run_experiment(const std::string& text, const fs::path& base_dir, const RunOverrides& overrides, std::ostream& out,
                   std::ostream& err) {
  Config cfg;
  try {
    cfg = parse_config(text, base_dir, overrides);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  set_worker_count(static_cast<unsigned>(cfg.jobs));

  std::vector<InequalityReport> reports(cfg.checks.size());
  ojson manifest;
  try {
    const Space space = build_space(cfg.space);
    const auto audit = audit_triangle_inequality(space, 10000, cfg.seed);
    if (audit.violations > 0)
      throw PreconditionError("space metric violates the triangle inequality on " + std::to_string(audit.violations) +
                              " sampled triples");
    std::map<std::string, ScalarField> fields;
    for (const auto& f : cfg.fields) fields.emplace(f.name, build_field(space, f));

    const RadiusWindow dw = default_window(space);
    const double r_min = cfg.certificate.r_min.value_or(dw.r_min);
    const double r_max = cfg.certificate.r_max.value_or(dw.r_max);
    AhlforsCertificate cert = certify_ahlfors(
        space, r_min, r_max, cfg.certificate.interior ? interior_centers(space, r_max) : all_centers(space));
    cert.interior_only = cfg.certificate.interior;
    const auto doubling = check_doubling(space, cert);

    std::optional<RoughKernelMatrix> kernel;
    std::optional<KernelAudit> kernel_audit;
    if (std::any_of(cfg.checks.begin(), cfg.checks.end(), [](const CheckSpec& c) { return c.needs_kernel; })) {
      std::vector<double> table;
      if (cfg.kernel.pattern == AngularPattern::custom) {
        const auto doc = read_json_file(cfg.kernel.table);
        for (const auto& row : doc) for (const auto& v : row) table.push_back(v.get<double>());
      }
      kernel = build_rough_kernel(space, cfg.kernel.nu.value_or(cert.nu_hat), cfg.kernel.pattern, cfg.kernel.project,
                                  cfg.kernel.seed, table);
      kernel_audit = verify_kernel(space, *kernel);
    }

    Context ctx{space, cert, kernel ? &*kernel : nullptr, fields, cfg.tolerance_scale, std::nullopt};
    // Poincare constants are measured first so the theorem reports can echo them.
    for (std::size_t i = 0; i < cfg.checks.size(); ++i) {
      if (cfg.checks[i].id != InequalityId::poincare || cfg.checks[i].sharpness) continue;
      reports[i] = run_check(ctx, cfg.checks[i]);
      ctx.poincare_constant = reports[i].empirical_constant;
    }
    for (std::size_t i = 0; i < cfg.checks.size(); ++i) {
      if (cfg.checks[i].id == InequalityId::poincare && !cfg.checks[i].sharpness) continue;
      try {
        reports[i] = run_check(ctx, cfg.checks[i]);
      } catch (const Error& e) {
        throw PreconditionError(cfg.checks[i].path + " (" + to_string(cfg.checks[i].id) + "): " + e.what());
      }
    }

    manifest["schema_version"] = kReportSchemaVersion;
    manifest["config_hash"] = hex64(fnv1a(cfg.effective.dump()));
    manifest["seed"] = cfg.seed;
    manifest["tolerance_scale"] = cfg.tolerance_scale;
    manifest["space"] = ojson{{"builder", cfg.space.builder},
                              {"points", space.size()},
                              {"dim", space.dim()},
                              {"total_mass", space.total_mass()},
                              {"diameter", space.diameter()},
                              {"min_spacing", space.min_spacing()},
                              {"triangle_triples", audit.triples},
                              {"triangle_violations", audit.violations}};
    manifest["certificate"] = certificate_json(cert);
    manifest["doubling"] = ojson{{"d_theory", doubling.d_theory},
                                 {"d_empirical", doubling.d_empirical},
                                 {"pairs", doubling.pairs}};
    if (kernel) {
      manifest["kernel"] = ojson{{"pattern", to_string(kernel->pattern)},
                                 {"nu", kernel->nu_used},
                                 {"projected", kernel->projected},
                                 {"seed", kernel->seed},
                                 {"size_constant", kernel_audit->size_constant},
                                 {"null_residual", kernel_audit->null_residual},
                                 {"annulus_residual", kernel_audit->annulus_residual}};
    } else {
      manifest["kernel"] = nullptr;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::size_t total_violations = 0;
  ojson listing = ojson::array();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    names.push_back(report_file_name(i, cfg.checks[i]));
    total_violations += reports[i].violations;
    listing.push_back(ojson{{"file", names.back()},
                            {"check", cfg.checks[i].path},
                            {"inequality_id", to_string(reports[i].id)},
                            {"empirical_constant", reports[i].empirical_constant},
                            {"skipped_points", reports[i].skipped},
                            {"violations", reports[i].violations},
                            {"exploratory", reports[i].exploratory}});
  }
  manifest["status"] = total_violations == 0 ? "ok" : "violations";
  manifest["total_violations"] = total_violations;
  manifest["reports"] = std::move(listing);
  manifest["config"] = ojson::parse(cfg.effective.dump());

  try {
    fs::create_directories(cfg.output);
    clear_bundle(cfg.output);
    for (std::size_t i = 0; i < reports.size(); ++i)
      write_text_file(cfg.output / names[i], report_to_json(reports[i]).dump(2) + "\n");
    write_text_file(cfg.output / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: cannot write bundle: " << e.what() << "\n";
    return kExitConfig;
  }

  for (std::size_t i = 0; i < reports.size(); ++i) out << report_summary_line(names[i], reports[i]) << "\n";
  out << "bundle: " << cfg.output.string() << "\n";
  if (total_violations == 0) return kExitOk;
  for (std::size_t i = 0; i < reports.size(); ++i)
    if (reports[i].violations > 0)
      err << cfg.checks[i].path << " (" << to_string(reports[i].id) << "): " << reports[i].violations
          << " violations at points " << join_ids(reports[i].violating_points) << "\n";
  return kExitViolations;
}

int run_experiment_file(const fs::path& config, const RunOverrides& overrides, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = read_text_file(config);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return run_experiment(text, config.parent_path(), overrides, out, err);
}

int emit_report(const fs::path& bundle, const std::string& format, std::ostream& out, std::ostream& err) {
  if (format != "json" && format != "csv" && format != "summary-text") {
    err << "error: format must be json, csv or summary-text\n";
    return kExitConfig;
  }
  if (!fs::is_directory(bundle)) {
    err << "error: bundle not found: " << bundle.string() << "\n";
    return kExitConfig;
  }
  try {
    const auto files = bundle_reports(bundle);
    if (format == "json") {
      ojson all = ojson::array();
      for (const auto& f : files)
        all.push_back(ojson{{"file", f.filename().string()}, {"report", report_to_json(report_from_json(read_json_file(f)))}});
      write_text_file(bundle / "reports.json", all.dump(2) + "\n");
      out << (bundle / "reports.json").string() << "\n";
    } else if (format == "csv") {
      for (const auto& f : files) {
        auto target = f;
        target.replace_extension(".csv");
        write_text_file(target, report_to_csv(report_from_json(read_json_file(f))));
        out << target.string() << "\n";
      }
    } else {
      std::string text;
      for (const auto& f : files)
        text += report_summary_line(f.filename().string(), report_from_json(read_json_file(f))) + "\n";
      write_text_file(bundle / "summary.txt", text);
      out << text;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

int certify_space_file(const fs::path& path, const CertifyOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const std::string text = read_text_file(path);
    json key;
    key["builder"] = "file";
    key["content"] = hex64(fnv1a(text));
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("space file is not valid JSON (" + line_column(text, e.byte) + "): " + e.what());
    }
    const Space space = with_distance_cache(key.dump(), [&] { return space_from_json(doc); });
    const RadiusWindow dw = default_window(space);
    const double r_min = options.r_min.value_or(dw.r_min), r_max = options.r_max.value_or(dw.r_max);
    AhlforsCertificate cert =
        certify_ahlfors(space, r_min, r_max, options.all_centers ? all_centers(space) : interior_centers(space, r_max));
    cert.interior_only = !options.all_centers;
    const auto audit = audit_triangle_inequality(space, options.triples, options.seed);
    ojson res;
    res["points"] = space.size();
    res["total_mass"] = space.total_mass();
    res["diameter"] = space.diameter();
    res["min_spacing"] = space.min_spacing();
    res["certificate"] = certificate_json(cert);
    res["certificate_sound"] = certificate_sound(space, cert);
    res["triangle"] = ojson{{"triples", audit.triples}, {"violations", audit.violations}, {"worst_excess", audit.worst_excess}};
    int code = audit.violations == 0 ? kExitOk : kExitViolations;
    try {
      const auto d = check_doubling(space, cert);
      res["doubling"] = ojson{{"d_theory", d.d_theory}, {"d_empirical", d.d_empirical}, {"pairs", d.pairs}};
    } catch (const ConsistencyError& e) {
      res["doubling"] = ojson{{"error", e.what()}};
      code = kExitViolations;
    }
    out << res.dump(2) << "\n";
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace metric_lab
