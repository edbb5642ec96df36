#include "asymptotica/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "asymptotica/blayer.hpp"
#include "asymptotica/dimsys.hpp"
#include "asymptotica/msode.hpp"
#include "asymptotica/mspde.hpp"
#include "asymptotica/radical.hpp"
#include "asymptotica/series.hpp"

namespace asymptotica::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Typed access to a params object with unknown-key rejection

class Params {
 public:
  Params(const Json& j, std::string where, std::initializer_list<const char*> keys) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + " must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where_);
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& raw(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing key '" + key + "' in " + where_);
    return j_.at(key);
  }

  double number(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(where_ + "." + key + " must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
  double positive(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(where_ + "." + key + " must be positive");
    return v;
  }
  double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(where_ + "." + key + " must be positive");
    return v;
  }

  long integer(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where_ + "." + key + " must be an integer");
    return v.get<long>();
  }
  long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(where_ + "." + key + " must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where_ + "." + key + " must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(where_ + "." + key + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(where_ + "." + key + " must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key) const {
    if (!has(key)) return {};
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(where_ + "." + key + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.is_string()) throw ConfigError(where_ + "." + key + " must be an array of strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

 private:
  const Json& j_;
  std::string where_;
};

std::string key_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

Json exact_json(const Rational& r) {
  if (denominator(r) == 1) {
    const Integer n = numerator(r);
    if (abs(n) < Integer(1) << 62) return n.convert_to<long long>();
  }
  return to_string(r);
}

Json array_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json stats_json(const OdeStats& s) {
  return Json{{"accepted", s.accepted}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals}};
}

class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : path_(path), out_(path) {
    if (!out_) throw ConfigError("cannot write " + path.string());
  }
  void header(const std::string& h) { out_ << h << '\n'; }
  void row(std::initializer_list<double> values, std::optional<long> lead = std::nullopt) {
    bool first = true;
    if (lead) {
      out_ << *lead;
      first = false;
    }
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_double(v);
      first = false;
    }
    out_ << '\n';
  }
  ~CsvWriter() { out_.flush(); }

 private:
  fs::path path_;
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Checks

const std::set<std::string> kOps{"<", "<=", ">", ">=", "==", "within"};

void validate_checks(const Json& checks) {
  if (!checks.is_array()) throw ConfigError("checks must be an array");
  for (const auto& c : checks) {
    Params p(c, "check", {"name", "metric", "op", "value", "tol"});
    p.string("metric");
    const std::string op = p.string("op");
    if (!kOps.count(op)) throw ConfigError("unknown check op '" + op + "'");
    const Json& v = p.raw("value");
    if (op == "within") {
      if (p.number("tol") < 0) throw ConfigError("check tol must be nonnegative");
      if (!(v.is_number() || v.is_array())) throw ConfigError("within needs a number or an array of numbers");
    } else if (op != "==") {
      if (!v.is_number()) throw ConfigError("check op '" + op + "' needs a numeric value");
      if (p.has("tol")) throw ConfigError("tol only applies to 'within'");
    } else if (p.has("tol")) {
      throw ConfigError("tol only applies to 'within'");
    }
    if (p.has("name")) p.string("name");
  }
}

bool compare_scalar(const std::string& op, double a, double b, double tol) {
  if (std::isnan(a)) return false;
  if (op == "<") return a < b;
  if (op == "<=") return a <= b;
  if (op == ">") return a > b;
  if (op == ">=") return a >= b;
  return std::abs(a - b) <= tol;  // within
}

bool evaluate_check(const Json& check, const Json& actual) {
  const std::string op = check.at("op").get<std::string>();
  const Json& value = check.at("value");
  if (op == "==") return actual == value;
  const double tol = check.contains("tol") ? check.at("tol").get<double>() : 0.0;
  auto numeric = [](const Json& x) { return x.is_number(); };
  if (numeric(actual)) {
    if (!value.is_number()) return false;
    return compare_scalar(op, actual.get<double>(), value.get<double>(), tol);
  }
  if (actual.is_array()) {
    if (actual.empty()) return false;
    for (std::size_t i = 0; i < actual.size(); ++i) {
      if (!numeric(actual[i])) return false;
      const Json& b = value.is_array() ? (i < value.size() ? value[i] : Json()) : value;
      if (!b.is_number()) return false;
      if (!compare_scalar(op, actual[i].get<double>(), b.get<double>(), tol)) return false;
    }
    return !value.is_array() || value.size() == actual.size();
  }
  return false;
}

// ---------------------------------------------------------------------------
// Subcommand parameters

struct PiParams {
  std::optional<std::string> fixture;
  std::optional<std::string> quantities;
  std::vector<std::string> monomials;
};

PiParams parse_pi(const Json& j) {
  Params p(j, "params", {"fixture", "quantities", "monomials"});
  PiParams out;
  if (p.has("fixture")) out.fixture = p.string("fixture");
  if (p.has("quantities")) out.quantities = p.string("quantities");
  if (out.fixture.has_value() == out.quantities.has_value())
    throw ConfigError("pi needs exactly one of params.fixture or params.quantities");
  out.monomials = p.strings("monomials");
  return out;
}

struct RootsParams {
  std::string mode = "rational";
  Json coefficients;
  Json root;
  long order = 4;
  std::optional<Rational> scale_exponent;
  Json eval_eps = Json::array();
};

Rational rational_value(const Json& v, const std::string& where) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  throw ConfigError(where + " must be an integer or a rational string such as \"-5/256\"");
}

double real_value(const Json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  return rational_value(v, where).convert_to<double>();
}

Complex complex_value(const Json& v, const std::string& where) {
  if (v.is_array()) {
    if (v.size() != 2) throw ConfigError(where + " must be [re, im]");
    return {real_value(v[0], where), real_value(v[1], where)};
  }
  return {real_value(v, where), 0.0};
}

template <typename Scalar, typename Convert>
PolyFamily<Scalar> build_family(const Json& coefficients, Convert convert) {
  if (!coefficients.is_array() || coefficients.empty())
    throw ConfigError("params.coefficients must be a nonempty array of coefficient arrays");
  std::vector<Vector<Scalar>> polys;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    const Json& row = coefficients[j];
    const std::string where = "params.coefficients[" + std::to_string(j) + "]";
    if (!row.is_array()) throw ConfigError(where + " must be an array (coefficients of eps^0, eps^1, ...)");
    Vector<Scalar> poly(static_cast<Index>(row.size()));
    for (std::size_t n = 0; n < row.size(); ++n) poly(static_cast<Index>(n)) = convert(row[n], where);
    polys.push_back(std::move(poly));
  }
  try {
    return PolyFamily<Scalar>(std::move(polys));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Radical radical_value(const Json& v, const std::string& where) {
  if (!v.is_object()) return Radical(rational_value(v, where));
  Params p(v, where, {"radicand", "degree", "coeffs"});
  const Rational c = rational_value(p.raw("radicand"), where + ".radicand");
  const long d = p.integer("degree");
  if (d < 1 || d > 64) throw ConfigError(where + ".degree must lie in 1..64");
  const Json& cs = p.raw("coeffs");
  if (!cs.is_array()) throw ConfigError(where + ".coeffs must be an array");
  std::vector<Rational> coeffs;
  for (const auto& x : cs) coeffs.push_back(rational_value(x, where + ".coeffs"));
  try {
    return Radical(c, static_cast<int>(d), coeffs);
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

RootsParams parse_roots(const Json& j) {
  Params p(j, "params", {"mode", "coefficients", "root", "order", "scale_exponent", "eval_eps"});
  RootsParams out;
  out.mode = p.string("mode", "rational");
  if (out.mode != "rational" && out.mode != "radical" && out.mode != "float" && out.mode != "complex")
    throw ConfigError("params.mode must be rational, radical, float or complex");
  out.coefficients = p.raw("coefficients");
  out.root = p.raw("root");
  out.order = p.integer("order", 4);
  if (out.order < 0 || out.order > 200) throw ConfigError("params.order must lie in 0..200");
  if (p.has("scale_exponent")) out.scale_exponent = rational_value(p.raw("scale_exponent"), "params.scale_exponent");
  if (p.has("eval_eps")) {
    out.eval_eps = p.raw("eval_eps");
    if (!out.eval_eps.is_array()) throw ConfigError("params.eval_eps must be an array");
    for (const auto& e : out.eval_eps) {
      if (!(real_value(e, "params.eval_eps") > 0)) throw ConfigError("params.eval_eps entries must be positive");
    }
  }
  // type-check the family and root in the chosen mode
  if (out.mode == "rational") {
    build_family<Rational>(out.coefficients, rational_value);
    rational_value(out.root, "params.root");
  } else if (out.mode == "radical") {
    build_family<Radical>(out.coefficients, radical_value);
    radical_value(out.root, "params.root");
  } else if (out.mode == "float") {
    build_family<double>(out.coefficients, real_value);
    real_value(out.root, "params.root");
  } else {
    build_family<Complex>(out.coefficients, complex_value);
    complex_value(out.root, "params.root");
  }
  return out;
}

struct EulerParams {
  std::vector<double> eps{0.01, 0.05, 0.1};
  long m_max = 12;
  bool multiprecision = false;
  double quad_tol = 1e-12;
};

EulerParams parse_euler(const Json& j) {
  Params p(j, "params", {"eps", "m_max", "precision", "quad_tol"});
  EulerParams out;
  out.eps = p.numbers("eps", out.eps);
  if (out.eps.empty()) throw ConfigError("params.eps must not be empty");
  for (double e : out.eps)
    if (!(e > 0)) throw ConfigError("params.eps entries must be positive");
  out.m_max = p.integer("m_max", 12);
  if (out.m_max < 0 || out.m_max > 60) throw ConfigError("params.m_max must lie in 0..60");
  const std::string prec = p.string("precision", "double");
  if (prec != "double" && prec != "multiprecision") throw ConfigError("params.precision must be double or multiprecision");
  out.multiprecision = prec == "multiprecision";
  out.quad_tol = p.positive("quad_tol", out.multiprecision ? 1e-40 : 1e-12);
  return out;
}

struct OdeParams {
  std::string case_name;
  double eps = 0.0;
  std::optional<double> horizon;
  std::optional<double> horizon_exponent;
  msode::CompareOptions options;
  std::vector<double> probe_times;
};

OdeParams parse_ode(const Json& j) {
  Params p(j, "params",
           {"case", "eps", "horizon", "horizon_exponent", "terms", "rtol", "atol", "newton_tol", "samples",
            "reference", "closed_form_amplitudes", "initial_state", "probe_times"});
  OdeParams out;
  out.case_name = p.string("case");
  const auto names = msode::catalog_names();
  if (std::find(names.begin(), names.end(), out.case_name) == names.end())
    throw ConfigError("unknown ode case '" + out.case_name + "'");
  const auto& c = msode::catalog(out.case_name);
  out.eps = p.number("eps");
  if (!(out.eps >= 0)) throw ConfigError("params.eps must be nonnegative");
  if (p.has("horizon") == p.has("horizon_exponent"))
    throw ConfigError("ode needs exactly one of params.horizon or params.horizon_exponent");
  if (p.has("horizon")) out.horizon = p.positive("horizon");
  if (p.has("horizon_exponent")) {
    out.horizon_exponent = p.number("horizon_exponent");
    if (!(out.eps > 0)) throw ConfigError("horizon_exponent needs eps > 0");
  }
  auto& o = out.options;
  o.terms = static_cast<int>(p.integer("terms", std::min(2, c.max_terms)));
  if (o.terms < 1 || o.terms > c.max_terms)
    throw ConfigError("params.terms must lie in 1.." + std::to_string(c.max_terms) + " for " + c.name);
  o.rtol = p.positive("rtol", 1e-10);
  o.atol = p.positive("atol", 1e-12);
  o.newton_tol = p.positive("newton_tol", 1e-12);
  o.samples = p.integer("samples", 2048);
  if (o.samples < 2) throw ConfigError("params.samples must be at least 2");
  const std::string ref = p.string("reference", "direct");
  if (ref != "direct" && ref != "exact") throw ConfigError("params.reference must be direct or exact");
  o.reference = ref == "exact" ? msode::Reference::exact : msode::Reference::direct;
  o.closed_form_amplitudes = p.boolean("closed_form_amplitudes", false);
  if (p.has("initial_state")) {
    const auto v = p.numbers("initial_state", {});
    if (static_cast<Index>(v.size()) != c.dimension)
      throw ConfigError("params.initial_state needs " + std::to_string(c.dimension) + " entries for " + c.name);
    o.initial_state = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
  }
  out.probe_times = p.numbers("probe_times", {});
  for (std::size_t i = 0; i < out.probe_times.size(); ++i) {
    if (!(out.probe_times[i] >= 0) || (i > 0 && out.probe_times[i] < out.probe_times[i - 1]))
      throw ConfigError("params.probe_times must be nonnegative and nondecreasing");
  }
  return out;
}

struct BlayerParams {
  blayer::Kind kind = blayer::Kind::linear;
  double eps = 0.1;
  Index grid_points = 8192;
  double shoot_tol = 1e-10;
  Index csv_stride = 1;
};

BlayerParams parse_blayer(const Json& j) {
  Params p(j, "params", {"kind", "eps", "grid_points", "shoot_tol", "csv_stride"});
  BlayerParams out;
  const std::string kind = p.string("kind", "linear");
  if (kind != "linear" && kind != "nonlinear") throw ConfigError("params.kind must be linear or nonlinear");
  out.kind = kind == "linear" ? blayer::Kind::linear : blayer::Kind::nonlinear;
  out.eps = p.positive("eps");
  if (out.kind == blayer::Kind::linear && !(out.eps < 1)) throw ConfigError("linear boundary layer needs eps < 1");
  if (out.kind == blayer::Kind::nonlinear && out.eps > 0.2) throw ConfigError("nonlinear boundary layer needs eps <= 0.2");
  out.grid_points = p.integer("grid_points", 8192);
  if (out.grid_points < 64) throw ConfigError("params.grid_points must be at least 64");
  out.shoot_tol = p.positive("shoot_tol", 1e-10);
  out.csv_stride = p.integer("csv_stride", 1);
  if (out.csv_stride < 1) throw ConfigError("params.csv_stride must be positive");
  return out;
}

struct PdeParams {
  mspde::PacketOptions packet;
  std::optional<int> phase_match_n;
  double phase_k_lo = 0.1;
  double phase_k_hi = 10.0;
};

PdeParams parse_pde(const Json& j) {
  Params p(j, "params",
           {"kind", "eps", "k", "amplitude", "sigma_wavelengths", "periods", "points", "center", "checkpoints",
            "order", "rtol", "nls_dt", "phase_match_n", "phase_k_range"});
  PdeParams out;
  auto& o = out.packet;
  try {
    o.kind = mspde::parse_kind(p.string("kind", "klein_gordon"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  o.eps = p.number("eps", o.eps);
  if (!(o.eps >= 0)) throw ConfigError("params.eps must be nonnegative");
  o.k = p.positive("k", o.k);
  o.amplitude = p.number("amplitude", o.amplitude);
  o.sigma_wavelengths = p.positive("sigma_wavelengths", o.sigma_wavelengths);
  if (o.sigma_wavelengths < 10) throw ConfigError("params.sigma_wavelengths must be at least 10");
  o.periods = p.integer("periods", o.periods);
  if (o.periods < 1) throw ConfigError("params.periods must be positive");
  o.points = p.integer("points", o.points);
  if (o.points < 16 || (o.points & (o.points - 1)) != 0) throw ConfigError("params.points must be a power of two >= 16");
  if (p.has("center")) o.center = p.positive("center");
  o.checkpoints = p.numbers("checkpoints", o.checkpoints);
  if (o.checkpoints.empty()) throw ConfigError("params.checkpoints must not be empty");
  for (std::size_t i = 0; i < o.checkpoints.size(); ++i) {
    if (!(o.checkpoints[i] > 0) || (i > 0 && !(o.checkpoints[i] > o.checkpoints[i - 1])))
      throw ConfigError("params.checkpoints must be positive and increasing");
  }
  o.order = static_cast<int>(p.integer("order", o.order));
  if (o.order != 0 && o.order != 1) throw ConfigError("params.order must be 0 or 1");
  o.rtol = p.positive("rtol", o.rtol);
  o.nls_dt = p.positive("nls_dt", o.nls_dt);
  if (p.has("phase_match_n")) {
    const long n = p.integer("phase_match_n");
    if (n != 2 && n != 3) throw ConfigError("params.phase_match_n must be 2 or 3");
    out.phase_match_n = static_cast<int>(n);
  }
  if (p.has("phase_k_range")) {
    const auto r = p.numbers("phase_k_range", {});
    if (r.size() != 2 || !(r[1] > r[0])) throw ConfigError("params.phase_k_range must be [lo, hi] with hi > lo");
    out.phase_k_lo = r[0];
    out.phase_k_hi = r[1];
  }
  return out;
}

void validate_params(const std::string& sub, const Json& params) {
  if (sub == "pi") parse_pi(params);
  else if (sub == "roots") parse_roots(params);
  else if (sub == "euler") parse_euler(params);
  else if (sub == "ode") parse_ode(params);
  else if (sub == "blayer") parse_blayer(params);
  else if (sub == "pde") parse_pde(params);
  else throw ConfigError("unknown subcommand '" + sub + "'");
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each fills `results` and `metrics` and lists its files.

struct Output {
  Json results = Json::object();
  Json metrics = Json::object();
  std::vector<fs::path> files;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Output run_pi(const PiParams& p, const fs::path& base_dir) {
  using namespace dimsys;
  Output out;
  const std::string text = p.fixture ? read_text(base_dir / *p.fixture) : *p.quantities;
  QuantitySet qs;
  try {
    qs = parse_quantity_set(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("quantity set: ") + e.what());
  }
  const auto groups = pi_groups(qs);
  Json gj = Json::array();
  std::vector<RationalVector> basis;
  for (const auto& g : groups) {
    Json m = Json::object();
    for (Index i = 0; i < g.exponents.size(); ++i) {
      if (g.exponents(i) != 0) m[qs.quantities()[static_cast<std::size_t>(i)].name] = exact_json(g.exponents(i));
    }
    gj.push_back(m);
    basis.push_back(g.exponents);
  }
  Json names = Json::array();
  for (const auto& q : qs.quantities()) names.push_back(q.name);
  Json base = Json::array();
  for (const auto& b : qs.base().names()) base.push_back(b);
  out.results["base"] = base;
  out.results["quantities"] = names;
  out.results["rank"] = static_cast<long>(rational_rank(dimension_matrix(qs)));
  out.results["groups"] = gj;

  Json members = Json::array();
  bool all_in_span = true;
  for (const auto& text_m : p.monomials) {
    RationalVector x;
    try {
      x = parse_monomial(qs, text_m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("monomial '" + text_m + "': " + e.what());
    }
    Json m{{"monomial", text_m}, {"dimensionless", is_dimensionless(qs, x)}};
    const auto coeffs = span_coefficients(basis, x);
    m["in_span"] = coeffs.has_value();
    if (coeffs) {
      Json cj = Json::array();
      for (Index i = 0; i < coeffs->size(); ++i) cj.push_back(exact_json((*coeffs)(i)));
      m["coefficients"] = cj;
    }
    all_in_span = all_in_span && coeffs.has_value();
    members.push_back(m);
  }
  out.results["membership"] = members;
  out.metrics["group_count"] = static_cast<long>(groups.size());
  out.metrics["rank"] = out.results["rank"];
  out.metrics["groups"] = gj;
  out.metrics["all_in_span"] = all_in_span;
  return out;
}

template <typename Scalar>
Json scalar_json(const Scalar& x) {
  if constexpr (std::is_same_v<Scalar, Rational>) return exact_json(x);
  else if constexpr (std::is_same_v<Scalar, Radical>) {
    if (x.is_rational()) return exact_json(x.coeffs().front());
    return x.str();
  } else if constexpr (std::is_same_v<Scalar, Complex>) {
    return Json::array({x.real(), x.imag()});
  } else {
    return x;
  }
}

template <typename Scalar, typename Convert>
void roots_body(const RootsParams& p, Convert convert, Output& out) {
  PolyFamily<Scalar> family = build_family<Scalar>(p.coefficients, convert);
  const Scalar a0 = convert(p.root, "params.root");
  if (p.scale_exponent) family = rescale_singular(family, *p.scale_exponent);
  const auto x = expand_root(family, a0, p.order);

  Json coeffs = Json::array();
  for (Index n = 0; n <= x.order(); ++n) coeffs.push_back(scalar_json(x[n]));
  out.results["coefficients"] = coeffs;
  out.results["parameter_root"] = family.root();
  if (p.scale_exponent) {
    out.results["scale_exponent"] = exact_json(*p.scale_exponent);
    out.results["leading_power"] = exact_json(Rational(-*p.scale_exponent));
  }
  out.metrics["coefficients"] = coeffs;

  // residual |p(x_N(eta); eta)| of the family that was expanded
  Json residuals = Json::array();
  std::vector<double> le, lr;
  for (const auto& e : p.eval_eps) {
    double res = 0.0;
    Complex value;
    constexpr bool exact = is_exact_scalar_v<Scalar>;
    if constexpr (exact) {
      if (family.root() == 1) {
        const Rational r = e.is_number_float() ? Rational(e.get<double>()) : rational_value(e, "params.eval_eps");
        const Scalar eta(r);
        const Scalar xv = x.evaluate(eta);
        res = std::abs(to_complex(family.evaluate(xv, eta)));
        value = to_complex(xv);
      }
    }
    if (!exact || family.root() != 1) {
      const auto fc = family.template cast<Complex>();
      PerturbationSeries<Complex> xc(x.order());
      for (Index n = 0; n <= x.order(); ++n) xc[n] = to_complex(x[n]);
      const Complex eta = std::pow(real_value(e, "params.eval_eps"), 1.0 / static_cast<double>(family.root()));
      value = xc.evaluate(eta);
      res = std::abs(fc.evaluate(value, eta));
    }
    const double eps = real_value(e, "params.eval_eps");
    residuals.push_back(Json{{"eps", eps}, {"value", Json::array({value.real(), value.imag()})}, {"residual", res}});
    if (res > 0) {
      le.push_back(std::log(eps));
      lr.push_back(std::log(res));
    }
  }
  out.results["residuals"] = residuals;
  if (le.size() >= 2) {
    const double n = static_cast<double>(le.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < le.size(); ++i) {
      sx += le[i];
      sy += lr[i];
      sxx += le[i] * le[i];
      sxy += le[i] * lr[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.results["residual_slope"] = slope;
    out.metrics["residual_slope"] = slope;
  }
}

Output run_roots(const RootsParams& p) {
  Output out;
  out.results["mode"] = p.mode;
  out.results["order"] = p.order;
  try {
    if (p.mode == "rational") roots_body<Rational>(p, rational_value, out);
    else if (p.mode == "radical") roots_body<Radical>(p, radical_value, out);
    else if (p.mode == "float") roots_body<double>(p, real_value, out);
    else roots_body<Complex>(p, complex_value, out);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  return out;
}

template <typename Real>
void euler_body(const EulerParams& p, Output& out, CsvWriter& csv) {
  Json table = Json::array();
  Json best = Json::array();
  Json diverges = Json::array();
  bool bound_holds = true;
  for (double e : p.eps) {
    const Real eps(e);
    const Real f = euler_f<Real>(eps, Real(p.quad_tol));
    Real fact = 1, power = eps;
    long best_m = 0;
    Real best_err = -1;
    Real last_err = 0;
    for (long m = 0; m <= p.m_max; ++m) {
      fact *= m + 1;
      const Real s = euler_partial_sum<Real>(eps, static_cast<int>(m));
      const Real err = abs(f - s);
      const Real bound = fact * power;
      power *= eps;
      const bool ok = err <= bound;
      bound_holds = bound_holds && ok;
      if (best_err < 0 || err < best_err) {
        best_err = err;
        best_m = m;
      }
      last_err = err;
      table.push_back(Json{{"eps", e},
                           {"m", m},
                           {"f", static_cast<double>(f)},
                           {"partial_sum", static_cast<double>(s)},
                           {"abs_error", static_cast<double>(err)},
                           {"bound", static_cast<double>(bound)},
                           {"within_bound", ok}});
      csv.row({e, static_cast<double>(m), static_cast<double>(f), static_cast<double>(s), static_cast<double>(err),
               static_cast<double>(bound)});
    }
    best.push_back(best_m);
    diverges.push_back(best_m < p.m_max && last_err > best_err);
  }
  out.results["table"] = table;
  out.results["best_m"] = best;
  out.metrics["bound_holds"] = bound_holds;
  out.metrics["best_m"] = best;
  out.metrics["diverges_past_best"] = diverges;
}

Output run_euler(const EulerParams& p, CsvWriter& csv) {
  Output out;
  out.results["precision"] = p.multiprecision ? "multiprecision" : "double";
  out.results["quad_tol"] = p.quad_tol;
  if (p.multiprecision) euler_body<boost::multiprecision::cpp_bin_float_50>(p, out, csv);
  else euler_body<double>(p, out, csv);
  return out;
}

Output run_ode(const OdeParams& p, const fs::path& csv_path) {
  Output out;
  const auto& c = msode::catalog(p.case_name);
  const auto rep = p.horizon ? msode::compare_horizon(c, p.eps, *p.horizon, p.options)
                             : msode::compare(c, p.eps, *p.horizon_exponent, p.options);
  const Index nc = c.component_count();
  {
    CsvWriter csv(csv_path);
    csv.header(nc == 1 ? "t,y_direct,y_multiscale,abs_error" : "component,t,y_direct,y_multiscale,abs_error");
    for (Index k = 0; k < nc; ++k) {
      for (std::size_t i = 0; i < rep.times.size(); ++i) {
        const Index ii = static_cast<Index>(i);
        const auto lead = nc == 1 ? std::nullopt : std::optional<long>(k);
        csv.row({rep.times[i], rep.reference_values(k, ii), rep.multiscale_values(k, ii), rep.abs_error(k, ii)}, lead);
      }
    }
  }
  out.files.push_back(csv_path);

  Json comps = Json::array();
  for (const auto& s : c.components) comps.push_back(s);
  out.results["case"] = c.name;
  out.results["components"] = comps;
  out.results["eps"] = rep.eps;
  out.results["horizon"] = rep.horizon;
  out.results["terms"] = rep.terms;
  out.results["reference"] = rep.reference == msode::Reference::exact ? "exact" : "direct";
  out.results["initial_state"] = array_json(rep.initial_state);
  out.results["amplitudes0"] = array_json(rep.amplitudes0);
  out.results["max_abs_error"] = array_json(rep.max_abs_error);
  out.results["l2_error"] = array_json(rep.l2_error);
  out.results["reference_stats"] = stats_json(rep.reference_stats);
  out.results["amplitude_stats"] = stats_json(rep.amplitude_stats);
  out.metrics["max_abs_error"] = rep.max_error;
  out.metrics["max_abs_error_by_component"] = array_json(rep.max_abs_error);
  out.metrics["l2_error"] = array_json(rep.l2_error);

  if (!p.probe_times.empty()) {
    OdeOptions ode;
    ode.rtol = p.options.rtol;
    ode.atol = p.options.atol;
    const double t1 = p.probe_times.back();
    const auto direct = msode::integrate_reference(c, rep.initial_state, 0.0, t1, p.eps, p.probe_times, ode);
    const auto amps = msode::integrate_amplitude(c, rep.amplitudes0, 0.0, t1, p.eps, rep.terms, p.probe_times, ode,
                                                 p.options.closed_form_amplitudes);
    const bool default_ics = rep.initial_state.isApprox(c.default_initial_state, 0.0);
    Json probes = Json::array();
    for (std::size_t i = 0; i < p.probe_times.size(); ++i) {
      const double t = p.probe_times[i];
      const Index ii = static_cast<Index>(i);
      const Eigen::VectorXd ms = c.reconstruct(t, amps.states.col(ii), p.eps, rep.terms);
      Json pj{{"t", t}};
      auto put = [&](const std::string& name, const Eigen::VectorXd& state) {
        Json v = Json::array();
        for (Index k = 0; k < nc; ++k) v.push_back(state(2 * k));
        pj[name] = nc == 1 ? v[0] : v;
        out.metrics[name + "@" + key_time(t)] = pj[name];
      };
      put("y_direct", direct.states.col(ii));
      put("y_multiscale", ms);
      if (c.exact && default_ics) put("y_exact", c.exact(t, p.eps));
      if (c.name == "damped_linear" && default_ics) {
        pj["y_naive"] = msode::naive_damped_expansion(t, p.eps);
        out.metrics["y_naive@" + key_time(t)] = pj["y_naive"];
      }
      probes.push_back(pj);
    }
    out.results["probes"] = probes;
  }
  return out;
}

Output run_blayer(const BlayerParams& p, const fs::path& csv_path) {
  Output out;
  const auto problem =
      p.kind == blayer::Kind::linear ? blayer::BvpProblem::linear(p.eps) : blayer::BvpProblem::nonlinear(p.eps);
  const auto fd = blayer::solve_bvp_fd(problem, p.grid_points);
  std::vector<double> xs(fd.x.data(), fd.x.data() + fd.x.size());
  std::vector<double> ms;
  if (p.kind == blayer::Kind::linear) {
    for (double x : xs) ms.push_back(blayer::linear_blayer_multiscale(x, p.eps));
  } else {
    const auto shot = blayer::nonlinear_blayer_multiscale(p.eps, p.shoot_tol);
    ms = shot.sample(xs);
    out.results["shooting"] = Json{{"b0", shot.b0},
                                   {"iterations", shot.iterations},
                                   {"residual", shot.residual},
                                   {"u0", shot.u0},
                                   {"u_end", shot.u_end}};
    out.metrics["shooting_u0"] = shot.u0;
    out.metrics["shooting_u_end"] = shot.u_end;
    out.metrics["shooting_iterations"] = shot.iterations;
  }
  double gap = 0.0;
  {
    CsvWriter csv(csv_path);
    csv.header("x,y_multiscale,y_reference,abs_error");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = std::abs(ms[i] - fd.y(static_cast<Index>(i)));
      gap = std::max(gap, e);
      if (i % static_cast<std::size_t>(p.csv_stride) == 0 || i + 1 == xs.size())
        csv.row({xs[i], ms[i], fd.y(static_cast<Index>(i)), e});
    }
  }
  out.files.push_back(csv_path);
  out.results["kind"] = p.kind == blayer::Kind::linear ? "linear" : "nonlinear";
  out.results["eps"] = p.eps;
  out.results["grid_points"] = static_cast<long>(p.grid_points);
  out.results["fd"] = Json{{"residual", fd.residual}, {"newton_iterations", fd.newton_iterations}};
  out.results["max_abs_error"] = gap;
  out.metrics["max_abs_error"] = gap;
  out.metrics["fd_residual"] = fd.residual;
  if (p.kind == blayer::Kind::linear) {
    const double w = blayer::half_width(fd);
    out.results["half_width"] = w;
    out.metrics["half_width"] = w;
    out.metrics["half_width_over_eps"] = w / p.eps;
  }
  return out;
}

Output run_pde(const PdeParams& p, const fs::path& out_dir, const std::string& stem) {
  Output out;
  const auto rep = mspde::packet_compare(p.packet);
  Json cps = Json::array();
  Json rel = Json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < rep.checkpoints.size(); ++i) {
    const auto& cp = rep.checkpoints[i];
    const fs::path path = out_dir / (stem + "_t" + key_time(cp.t) + ".csv");
    {
      CsvWriter csv(path);
      csv.header("x,u_direct,u_reconstructed,abs_error");
      for (Index j = 0; j < rep.x.size(); ++j)
        csv.row({rep.x(j), cp.direct.u(j), cp.reconstructed.u(j), std::abs(cp.direct.u(j) - cp.reconstructed.u(j))});
    }
    out.files.push_back(path);
    cps.push_back(Json{{"t", cp.t}, {"rel_l2", cp.rel_l2}, {"csv", path.filename().string()}});
    rel.push_back(cp.rel_l2);
    out.metrics["rel_l2@" + key_time(cp.t)] = cp.rel_l2;
    if (i > 0 && !(cp.rel_l2 > rep.checkpoints[i - 1].rel_l2)) monotone = false;
  }
  const auto& o = p.packet;
  const mspde::Dispersion d{o.kind};
  out.results["kind"] = mspde::kind_name(o.kind);
  out.results["eps"] = o.eps;
  out.results["k"] = o.k;
  out.results["omega"] = d.omega(o.k);
  out.results["group_velocity"] = d.group_velocity(o.k);
  out.results["length"] = rep.length;
  out.results["center"] = rep.center;
  out.results["points"] = static_cast<long>(o.points);
  out.results["checkpoints"] = cps;
  out.results["energy_drift"] = rep.energy_drift;
  out.results["mass_drift"] = rep.mass_drift;
  out.results["direct_stats"] = stats_json(rep.stats);
  out.metrics["rel_l2"] = rel;
  out.metrics["error_monotone"] = monotone;
  out.metrics["energy_drift"] = rep.energy_drift;
  out.metrics["mass_drift"] = rep.mass_drift;
  if (p.phase_match_n) {
    Json roots = Json::array();
    for (double r : mspde::find_phase_matched(d, *p.phase_match_n, p.phase_k_lo, p.phase_k_hi)) roots.push_back(r);
    out.results["phase_matched"] = roots;
    out.metrics["phase_matched"] = roots;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"pi", "roots", "euler", "ode", "blayer", "pde"};
  return names;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void validate_config(const std::string& subcommand, const Json& config) {
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), subcommand) == subs.end())
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  Params top(config, "config", {"subcommand", "seed", "params", "checks"});
  if (top.has("subcommand") && top.string("subcommand") != subcommand)
    throw ConfigError("config is for '" + top.string("subcommand") + "', not '" + subcommand + "'");
  if (top.has("seed")) top.integer("seed");
  validate_params(subcommand, top.raw("params"));
  if (top.has("checks")) validate_checks(config.at("checks"));
}

RunResult run(const std::string& subcommand, const Json& config, const fs::path& base_dir, const fs::path& out_dir,
              const std::string& stem) {
  RunResult result;
  try {
    validate_config(subcommand, config);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw ConfigError("cannot create output directory " + out_dir.string());

    const Json& params = config.at("params");
    Output out;
    if (subcommand == "pi") {
      out = run_pi(parse_pi(params), base_dir);
    } else if (subcommand == "roots") {
      out = run_roots(parse_roots(params));
    } else if (subcommand == "euler") {
      const fs::path path = out_dir / (stem + ".csv");
      CsvWriter csv(path);
      csv.header("eps,m,f,partial_sum,abs_error,bound");
      out = run_euler(parse_euler(params), csv);
      out.files.push_back(path);
    } else if (subcommand == "ode") {
      out = run_ode(parse_ode(params), out_dir / (stem + ".csv"));
    } else if (subcommand == "blayer") {
      out = run_blayer(parse_blayer(params), out_dir / (stem + ".csv"));
    } else {
      out = run_pde(parse_pde(params), out_dir, stem);
    }

    Json checks = Json::array();
    bool passed = true;
    if (config.contains("checks")) {
      for (const auto& c : config.at("checks")) {
        const std::string metric = c.at("metric").get<std::string>();
        if (!out.metrics.contains(metric)) throw ConfigError("check refers to unknown metric '" + metric + "'");
        const bool ok = evaluate_check(c, out.metrics.at(metric));
        Json cj = c;
        cj["actual"] = out.metrics.at(metric);
        cj["passed"] = ok;
        checks.push_back(cj);
        passed = passed && ok;
      }
    }

    const fs::path json_path = out_dir / (stem + ".json");
    Json files = Json::array();
    for (const auto& f : out.files) files.push_back(f.filename().string());
    files.push_back(json_path.filename().string());

    Json summary = Json::object();
    summary["subcommand"] = subcommand;
    summary["config"] = config;
    summary["results"] = out.results;
    summary["metrics"] = out.metrics;
    summary["checks"] = checks;
    summary["passed"] = passed;
    summary["files"] = files;
    {
      std::ofstream js(json_path);
      if (!js) throw ConfigError("cannot write " + json_path.string());
      js << summary.dump(2) << '\n';
    }
    out.files.push_back(json_path);

    result.summary = std::move(summary);
    result.files = std::move(out.files);
    result.exit_code = passed ? ExitCode::ok : ExitCode::check_failed;
    std::size_t failed = 0;
    for (const auto& c : checks) failed += c.at("passed").get<bool>() ? 0 : 1;
    result.message = std::to_string(checks.size() - failed) + "/" + std::to_string(checks.size()) + " checks passed";
  } catch (const ConfigError& e) {
    result.exit_code = ExitCode::config_error;
    result.message = std::string("config error: ") + e.what();
  } catch (const Json::exception& e) {
    result.exit_code = ExitCode::config_error;
    result.message = std::string("config error: ") + e.what();
  } catch (const std::invalid_argument& e) {
    result.exit_code = ExitCode::config_error;
    result.message = std::string("config error: ") + e.what();
  } catch (const std::domain_error& e) {
    result.exit_code = ExitCode::config_error;
    result.message = std::string("config error: ") + e.what();
  } catch (const SolverError& e) {
    result.exit_code = ExitCode::solver_error;
    result.message = std::string("solver error: ") + e.what();
  } catch (const std::exception& e) {
    result.exit_code = ExitCode::solver_error;
    result.message = std::string("solver error: ") + e.what();
  }
  return result;
}

RunResult run_file(const std::string& subcommand, const fs::path& config_path, const fs::path& out_dir) {
  Json config;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read " + config_path.string());
    config = Json::parse(in);
  } catch (const std::exception& e) {
    RunResult r;
    r.exit_code = ExitCode::config_error;
    r.message = std::string("config error: ") + e.what();
    return r;
  }
  return run(subcommand, config, config_path.parent_path(), out_dir, config_path.stem().string());
}

std::vector<RunResult> run_files(const std::string& subcommand, const std::vector<fs::path>& configs,
                                 const fs::path& out_dir, int jobs) {
  std::vector<RunResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) results[i] = run_file(subcommand, configs[i], out_dir);
  };
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), configs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

int combined_exit_code(const std::vector<RunResult>& results) {
  int code = ExitCode::ok;
  for (const auto& r : results) code = std::max(code, r.exit_code);
  return code;
}

}  // namespace asymptotica::cli
