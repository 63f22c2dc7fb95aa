#include "eccbf/scenario.hpp"

#include "eccbf/sos.hpp"

#include <toml.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace eccbf::sim {

namespace {

// Reads one TOML table, recording type errors and unknown keys.
class Reader {
 public:
  Reader(const toml::table& table, std::string path, std::vector<std::string>& errors)
      : table_(table), path_(std::move(path)), errors_(errors) {}

  ~Reader() {
    for (const auto& [key, node] : table_) {
      const std::string k(key.str());
      if (!seen_.count(k)) errors_.push_back("unknown key '" + qualified(k) + "'");
    }
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  bool has(const char* key) const { return table_.contains(key); }

  void number(const char* key, double& out) {
    if (const auto* node = find(key)) {
      if (auto v = node->value<double>(); v && (node->is_floating_point() || node->is_integer()))
        out = *v;
      else
        error(key, "expected a number");
    }
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (const auto* node = find(key)) {
      if (const auto v = node->value_exact<int64_t>())
        out = static_cast<Int>(*v);
      else
        error(key, "expected an integer");
      if (node->is_integer() && *node->value_exact<int64_t>() < 0 && std::is_unsigned_v<Int>)
        error(key, "must be nonnegative");
    }
  }

  void optional_integer(const char* key, std::optional<int>& out) {
    if (has(key)) {
      int v = 0;
      integer(key, v);
      out = v;
    }
  }

  void boolean(const char* key, bool& out) {
    if (const auto* node = find(key)) {
      if (const auto v = node->value_exact<bool>()) out = *v;
      else error(key, "expected true or false");
    }
  }

  void string(const char* key, std::string& out) {
    if (const auto* node = find(key)) {
      if (const auto v = node->value_exact<std::string>()) out = *v;
      else error(key, "expected a string");
    }
  }

  template <class E>
  void choice(const char* key, E& out, const std::map<std::string, E>& options) {
    if (!has(key)) return;
    std::string s;
    string(key, s);
    const auto it = options.find(s);
    if (it != options.end()) {
      out = it->second;
    } else {
      std::string allowed;
      for (const auto& [name, value] : options) allowed += (allowed.empty() ? "" : ", ") + name;
      error(key, "'" + s + "' is not one of: " + allowed);
    }
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const auto* node = find(key)) {
      const auto* arr = node->as_array();
      if (!arr) return error(key, "expected an array of numbers");
      std::vector<double> v;
      for (const auto& el : *arr) {
        const auto d = el.value<double>();
        if (!d || !(el.is_integer() || el.is_floating_point())) return error(key, "expected an array of numbers");
        v.push_back(*d);
      }
      out = std::move(v);
    }
  }

  void point(const char* key, Point2& out) {
    if (!has(key)) return;
    std::vector<double> v;
    numbers(key, v);
    if (v.size() == 2) out = Point2(v[0], v[1]);
    else if (!v.empty() || table_.get(key)->as_array()) error(key, "expected two numbers");
  }

  void points(const char* key, std::vector<Point2>& out) {
    if (const auto* node = find(key)) {
      const auto* arr = node->as_array();
      if (!arr) return error(key, "expected an array of [x, y] pairs");
      std::vector<Point2> pts;
      for (const auto& el : *arr) {
        const auto* pair = el.as_array();
        if (!pair || pair->size() != 2) return error(key, "expected an array of [x, y] pairs");
        const auto a = (*pair)[0].value<double>();
        const auto b = (*pair)[1].value<double>();
        if (!a || !b) return error(key, "expected an array of [x, y] pairs");
        pts.emplace_back(*a, *b);
      }
      out = std::move(pts);
    }
  }

  void matrix2(const char* key, Eigen::Matrix2d& out) {
    std::vector<Point2> rows;
    if (!has(key)) return;
    points(key, rows);
    if (rows.size() == 2) out << rows[0][0], rows[0][1], rows[1][0], rows[1][1];
    else error(key, "expected [[p11, p12], [p21, p22]]");
  }

  const toml::table* table(const char* key) {
    if (const auto* node = find(key)) {
      if (const auto* t = node->as_table()) return t;
      error(key, "expected a table");
    }
    return nullptr;
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const toml::node* find(const char* key) {
    seen_.insert(key);
    return table_.get(key);
  }

  void error(const char* key, const std::string& what) { errors_.push_back(qualified(key) + ": " + what); }

  const toml::table& table_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

const std::map<std::string, SystemSpec::Kind> kSystemKinds = {
    {"single_integrator", SystemSpec::Kind::SingleIntegrator}, {"unicycle", SystemSpec::Kind::Unicycle}};
const std::map<std::string, ExtentSpec::Kind> kExtentKinds = {
    {"ball", ExtentSpec::Kind::Ball}, {"ellipse", ExtentSpec::Kind::Ellipse},
    {"superellipse4", ExtentSpec::Kind::Superellipse4}};
const std::map<std::string, SafeSpec::Kind> kSafeKinds = {
    {"halfspace", SafeSpec::Kind::Halfspace}, {"ball", SafeSpec::Kind::Ball},
    {"superellipse", SafeSpec::Kind::Superellipse}};
const std::map<std::string, FilterSpec::Kind> kFilterKinds = {
    {"none", FilterSpec::Kind::None}, {"zcbf", FilterSpec::Kind::Zcbf},
    {"sampled", FilterSpec::Kind::Sampled}, {"sos", FilterSpec::Kind::Sos}};
const std::map<std::string, FilterSpec::Constants> kConstantSources = {
    {"user", FilterSpec::Constants::User}, {"estimated", FilterSpec::Constants::Estimated}};
const std::map<std::string, BoundarySpacing> kSpacings = {
    {"uniform_angle", BoundarySpacing::UniformAngle}, {"arc_length", BoundarySpacing::ArcLength}};
const std::map<std::string, NominalSpec::Kind> kNominalKinds = {
    {"go_to_goal", NominalSpec::Kind::GoToGoal}, {"waypoint_cycle", NominalSpec::Kind::WaypointCycle},
    {"constant", NominalSpec::Kind::Constant}};

template <class E>
std::string name_of(const std::map<std::string, E>& options, E value) {
  for (const auto& [name, v] : options)
    if (v == value) return name;
  return "unknown";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string fmt(const Point2& p) { return "[" + fmt(p[0]) + ", " + fmt(p[1]) + "]"; }

std::string fmt(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::size_t state_dimension(const SystemSpec& s) {
  return s.kind == SystemSpec::Kind::Unicycle ? 3 : s.dimension;
}

std::size_t input_dimension(const SystemSpec& s) {
  return s.kind == SystemSpec::Kind::Unicycle ? 2 : s.dimension;
}

}  // namespace

std::string to_string(FilterSpec::Kind kind) { return name_of(kFilterKinds, kind); }

ScenarioConfig parse_config(std::string_view toml_text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(msg.str());
  }

  ScenarioConfig c;
  std::vector<std::string> errors;
  {
    Reader r(root, "", errors);
    r.string("name", c.name);
    r.integer("seed", c.seed);
    r.number("dt", c.dt);
    r.number("horizon", c.horizon);
    r.numbers("initial_state", c.initial_state);
    r.number("initial_state_noise", c.initial_state_noise);
    r.integer("probe_points", c.probe_points);
    if (const auto* t = r.table("domain")) {
      Reader d(*t, "domain", errors);
      d.point("lower", c.domain_lower);
      d.point("upper", c.domain_upper);
    }
    if (const auto* t = r.table("system")) {
      Reader s(*t, "system", errors);
      s.choice("kind", c.system.kind, kSystemKinds);
      s.integer("dimension", c.system.dimension);
      s.number("input_bound", c.system.input_bound);
    } else {
      errors.push_back("missing [system] table");
    }
    if (const auto* t = r.table("extent")) {
      Reader e(*t, "extent", errors);
      e.choice("kind", c.extent.kind, kExtentKinds);
      e.number("radius", c.extent.radius);
      e.matrix2("shape", c.extent.shape);
      e.number("a", c.extent.a);
      e.number("b", c.extent.b);
      e.number("size", c.extent.size);
      e.boolean("oriented", c.extent.oriented);
    } else {
      errors.push_back("missing [extent] table");
    }
    if (const auto* t = r.table("safe_set")) {
      Reader s(*t, "safe_set", errors);
      s.choice("kind", c.safe.kind, kSafeKinds);
      s.point("normal", c.safe.normal);
      s.number("offset", c.safe.offset);
      s.point("center", c.safe.center);
      s.number("radius", c.safe.radius);
      s.point("semi_axes", c.safe.semi_axes);
      s.integer("exponent", c.safe.exponent);
    } else {
      errors.push_back("missing [safe_set] table");
    }
    if (const auto* t = r.table("filter")) {
      Reader f(*t, "filter", errors);
      auto& fs = c.filter;
      f.choice("kind", fs.kind, kFilterKinds);
      f.number("alpha_gain", fs.alpha_gain);
      f.integer("samples", fs.samples);
      f.number("gamma", fs.gamma);
      f.number("tau_margin", fs.tau_margin);
      f.choice("spacing", fs.spacing, kSpacings);
      f.choice("constants", fs.constants, kConstantSources);
      f.number("A", fs.A);
      f.number("B", fs.B);
      f.integer("estimation_resolution", fs.estimation_resolution);
      f.number("estimation_margin", fs.estimation_margin);
      f.number("qp_tolerance", fs.qp_tolerance);
      f.integer("qp_max_iterations", fs.qp_max_iterations);
      f.number("alpha1_gain", fs.alpha1_gain);
      f.number("alpha2_gain", fs.alpha2_gain);
      f.optional_integer("multiplier_degree", fs.multiplier_degree);
      f.number("sdp_tolerance", fs.sdp_tolerance);
      f.integer("sdp_max_iterations", fs.sdp_max_iterations);
    }
    if (const auto* t = r.table("nominal")) {
      Reader n(*t, "nominal", errors);
      auto& ns = c.nominal;
      n.choice("kind", ns.kind, kNominalKinds);
      if (n.has("goal")) {
        Point2 g = Point2::Zero();
        n.point("goal", g);
        ns.goals = {g};
      }
      n.points("goals", ns.goals);
      n.number("position_gain", ns.position_gain);
      n.number("heading_gain", ns.heading_gain);
      n.number("switch_radius", ns.switch_radius);
      n.numbers("input", ns.input);
    } else {
      errors.push_back("missing [nominal] table");
    }
    if (const auto* t = r.table("output")) {
      Reader o(*t, "output", errors);
      o.boolean("csv", c.output.csv);
      o.boolean("svg", c.output.svg);
      o.boolean("summary", c.output.summary);
      o.integer("extent_stride", c.output.extent_stride);
      o.boolean("record_timing", c.output.record_timing);
    }
  }  // readers flag unknown keys on destruction

  if (errors.empty()) {
    const auto more = validate_config(c);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) {
    std::string msg = source + ": invalid scenario";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream o;
  o << "name = " << quoted(c.name) << "\n";
  o << "seed = " << c.seed << "\n";
  o << "dt = " << fmt(c.dt) << "\n";
  o << "horizon = " << fmt(c.horizon) << "\n";
  o << "initial_state = " << fmt(c.initial_state) << "\n";
  o << "initial_state_noise = " << fmt(c.initial_state_noise) << "\n";
  o << "probe_points = " << c.probe_points << "\n";

  o << "\n[domain]\n";
  o << "lower = " << fmt(c.domain_lower) << "\n";
  o << "upper = " << fmt(c.domain_upper) << "\n";

  o << "\n[system]\n";
  o << "kind = " << quoted(name_of(kSystemKinds, c.system.kind)) << "\n";
  if (c.system.kind == SystemSpec::Kind::SingleIntegrator) o << "dimension = " << c.system.dimension << "\n";
  o << "input_bound = " << fmt(c.system.input_bound) << "\n";

  o << "\n[extent]\n";
  o << "kind = " << quoted(name_of(kExtentKinds, c.extent.kind)) << "\n";
  switch (c.extent.kind) {
    case ExtentSpec::Kind::Ball:
      o << "radius = " << fmt(c.extent.radius) << "\n";
      break;
    case ExtentSpec::Kind::Ellipse: {
      const auto& s = c.extent.shape;
      o << "shape = [" << fmt(Point2(s(0, 0), s(0, 1))) << ", " << fmt(Point2(s(1, 0), s(1, 1))) << "]\n";
      break;
    }
    case ExtentSpec::Kind::Superellipse4:
      o << "a = " << fmt(c.extent.a) << "\nb = " << fmt(c.extent.b) << "\nsize = " << fmt(c.extent.size) << "\n";
      break;
  }
  o << "oriented = " << (c.extent.oriented ? "true" : "false") << "\n";

  o << "\n[safe_set]\n";
  o << "kind = " << quoted(name_of(kSafeKinds, c.safe.kind)) << "\n";
  switch (c.safe.kind) {
    case SafeSpec::Kind::Halfspace:
      o << "normal = " << fmt(c.safe.normal) << "\noffset = " << fmt(c.safe.offset) << "\n";
      break;
    case SafeSpec::Kind::Ball:
      o << "center = " << fmt(c.safe.center) << "\nradius = " << fmt(c.safe.radius) << "\n";
      break;
    case SafeSpec::Kind::Superellipse:
      o << "center = " << fmt(c.safe.center) << "\nsemi_axes = " << fmt(c.safe.semi_axes)
        << "\nexponent = " << c.safe.exponent << "\n";
      break;
  }

  const auto& f = c.filter;
  o << "\n[filter]\n";
  o << "kind = " << quoted(name_of(kFilterKinds, f.kind)) << "\n";
  switch (f.kind) {
    case FilterSpec::Kind::None:
      break;
    case FilterSpec::Kind::Zcbf:
      o << "alpha_gain = " << fmt(f.alpha_gain) << "\n";
      o << "qp_tolerance = " << fmt(f.qp_tolerance) << "\n";
      o << "qp_max_iterations = " << f.qp_max_iterations << "\n";
      break;
    case FilterSpec::Kind::Sampled:
      o << "samples = " << f.samples << "\n";
      o << "gamma = " << fmt(f.gamma) << "\n";
      o << "tau_margin = " << fmt(f.tau_margin) << "\n";
      o << "spacing = " << quoted(name_of(kSpacings, f.spacing)) << "\n";
      o << "constants = " << quoted(name_of(kConstantSources, f.constants)) << "\n";
      if (f.constants == FilterSpec::Constants::User) {
        o << "A = " << fmt(f.A) << "\nB = " << fmt(f.B) << "\n";
      } else {
        o << "estimation_resolution = " << f.estimation_resolution << "\n";
        o << "estimation_margin = " << fmt(f.estimation_margin) << "\n";
      }
      o << "qp_tolerance = " << fmt(f.qp_tolerance) << "\n";
      o << "qp_max_iterations = " << f.qp_max_iterations << "\n";
      break;
    case FilterSpec::Kind::Sos:
      o << "alpha1_gain = " << fmt(f.alpha1_gain) << "\n";
      o << "alpha2_gain = " << fmt(f.alpha2_gain) << "\n";
      if (f.multiplier_degree) o << "multiplier_degree = " << *f.multiplier_degree << "\n";
      o << "sdp_tolerance = " << fmt(f.sdp_tolerance) << "\n";
      o << "sdp_max_iterations = " << f.sdp_max_iterations << "\n";
      break;
  }

  const auto& n = c.nominal;
  o << "\n[nominal]\n";
  o << "kind = " << quoted(name_of(kNominalKinds, n.kind)) << "\n";
  if (n.kind == NominalSpec::Kind::Constant) {
    o << "input = " << fmt(n.input) << "\n";
  } else {
    o << "goals = [";
    for (std::size_t i = 0; i < n.goals.size(); ++i) o << (i ? ", " : "") << fmt(n.goals[i]);
    o << "]\n";
    o << "position_gain = " << fmt(n.position_gain) << "\n";
    o << "heading_gain = " << fmt(n.heading_gain) << "\n";
    if (n.kind == NominalSpec::Kind::WaypointCycle) o << "switch_radius = " << fmt(n.switch_radius) << "\n";
  }

  o << "\n[output]\n";
  o << "csv = " << (c.output.csv ? "true" : "false") << "\n";
  o << "svg = " << (c.output.svg ? "true" : "false") << "\n";
  o << "summary = " << (c.output.summary ? "true" : "false") << "\n";
  o << "extent_stride = " << c.output.extent_stride << "\n";
  o << "record_timing = " << (c.output.record_timing ? "true" : "false") << "\n";
  return o.str();
}

std::vector<std::string> validate_config(const ScenarioConfig& c) {
  std::vector<std::string> e;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) e.push_back(msg);
  };
  auto positive = [&](double v, const std::string& what) { check(std::isfinite(v) && v > 0.0, what + " must be positive"); };

  positive(c.dt, "dt");
  positive(c.horizon, "horizon");
  if (c.dt > 0.0 && c.horizon > 0.0) check(c.horizon >= c.dt, "horizon must be at least one step");
  check(std::isfinite(c.initial_state_noise) && c.initial_state_noise >= 0.0, "initial_state_noise must be >= 0");
  check(c.probe_points >= 16, "probe_points must be at least 16");
  check((c.domain_upper.array() > c.domain_lower.array()).all(), "domain.upper must exceed domain.lower");

  positive(c.system.input_bound, "system.input_bound");
  if (c.system.kind == SystemSpec::Kind::SingleIntegrator)
    check(c.system.dimension >= 2, "system.dimension must be at least 2 (the extent center is planar)");
  const std::size_t n = state_dimension(c.system);
  const std::size_t m = input_dimension(c.system);
  check(c.initial_state.size() == n,
        "initial_state has " + std::to_string(c.initial_state.size()) + " entries, system needs " + std::to_string(n));
  for (double v : c.initial_state) check(std::isfinite(v), "initial_state entries must be finite");

  switch (c.extent.kind) {
    case ExtentSpec::Kind::Ball:
      positive(c.extent.radius, "extent.radius");
      break;
    case ExtentSpec::Kind::Ellipse: {
      const auto& s = c.extent.shape;
      check(s.allFinite() && std::abs(s(0, 1) - s(1, 0)) <= 1e-12 * (1.0 + s.cwiseAbs().maxCoeff()),
            "extent.shape must be symmetric");
      check(s(0, 0) > 0.0 && s.determinant() > 0.0, "extent.shape must be positive definite");
      break;
    }
    case ExtentSpec::Kind::Superellipse4:
      positive(c.extent.a, "extent.a");
      positive(c.extent.b, "extent.b");
      positive(c.extent.size, "extent.size");
      break;
  }

  switch (c.safe.kind) {
    case SafeSpec::Kind::Halfspace:
      check(c.safe.normal.allFinite() && c.safe.normal.norm() > 0.0, "safe_set.normal must be nonzero");
      break;
    case SafeSpec::Kind::Ball:
      positive(c.safe.radius, "safe_set.radius");
      break;
    case SafeSpec::Kind::Superellipse:
      check((c.safe.semi_axes.array() > 0.0).all(), "safe_set.semi_axes must be positive");
      check(c.safe.exponent >= 2 && c.safe.exponent % 2 == 0, "safe_set.exponent must be even and >= 2");
      break;
  }

  const auto& f = c.filter;
  switch (f.kind) {
    case FilterSpec::Kind::None:
      break;
    case FilterSpec::Kind::Zcbf:
      positive(f.alpha_gain, "filter.alpha_gain");
      positive(f.qp_tolerance, "filter.qp_tolerance");
      check(f.qp_max_iterations > 0, "filter.qp_max_iterations must be positive");
      break;
    case FilterSpec::Kind::Sampled:
      check(f.samples >= 2, "filter.samples must be at least 2");
      positive(f.gamma, "filter.gamma");
      check(f.tau_margin >= 1.0, "filter.tau_margin must be >= 1");
      if (f.constants == FilterSpec::Constants::User) {
        check(f.A >= 0.0 && f.B >= 0.0, "filter.A and filter.B must be nonnegative");
      } else {
        check(f.estimation_resolution >= 2, "filter.estimation_resolution must be at least 2");
        check(f.estimation_margin >= 1.0, "filter.estimation_margin must be >= 1");
      }
      positive(f.qp_tolerance, "filter.qp_tolerance");
      check(f.qp_max_iterations > 0, "filter.qp_max_iterations must be positive");
      break;
    case FilterSpec::Kind::Sos:
      positive(f.alpha1_gain, "filter.alpha1_gain");
      positive(f.alpha2_gain, "filter.alpha2_gain");
      if (f.multiplier_degree)
        check(*f.multiplier_degree >= 0 && *f.multiplier_degree % 2 == 0,
              "filter.multiplier_degree must be even and nonnegative");
      positive(f.sdp_tolerance, "filter.sdp_tolerance");
      check(f.sdp_max_iterations > 0, "filter.sdp_max_iterations must be positive");
      break;
  }

  const auto& nm = c.nominal;
  switch (nm.kind) {
    case NominalSpec::Kind::GoToGoal:
    case NominalSpec::Kind::WaypointCycle:
      check(!nm.goals.empty(), "nominal.goals must not be empty");
      for (const auto& g : nm.goals) check(g.allFinite(), "nominal goals must be finite");
      positive(nm.position_gain, "nominal.position_gain");
      positive(nm.heading_gain, "nominal.heading_gain");
      if (nm.kind == NominalSpec::Kind::WaypointCycle) positive(nm.switch_radius, "nominal.switch_radius");
      if (c.system.kind == SystemSpec::Kind::SingleIntegrator)
        check(c.system.dimension == 2, "go-to-goal needs a planar single integrator");
      break;
    case NominalSpec::Kind::Constant:
      check(nm.input.size() == m, "nominal.input must have " + std::to_string(m) + " entries");
      break;
  }
  check(c.output.extent_stride >= 1, "output.extent_stride must be at least 1");

  if (!e.empty()) return e;

  // Initial extent strictly inside the safe set on a dense probe.
  try {
    const ExtentFunction extent = make_extent(c);
    const SafeFunction h = make_safe(c);
    const Vector x0 = make_initial_state(c);
    std::vector<double> angles(c.probe_points);
    for (std::size_t i = 0; i < angles.size(); ++i)
      angles[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(angles.size());
    const auto probe = trace_boundary(extent, x0, angles);
    const double min_h = min_safe_value(h, probe);
    check(min_h >= 1e-3, "initial extent is not strictly inside the safe set (min h on its boundary is " +
                             std::to_string(min_h) + ", needs >= 1e-3)");
  } catch (const std::exception& ex) {
    e.push_back(std::string("initial extent check failed: ") + ex.what());
  }
  return e;
}

ControlAffineSystem make_system(const ScenarioConfig& c) {
  if (c.system.kind == SystemSpec::Kind::Unicycle) return ControlAffineSystem::unicycle(c.system.input_bound);
  return ControlAffineSystem::single_integrator(c.system.dimension, c.system.input_bound);
}

ExtentFunction make_extent(const ScenarioConfig& c) {
  const std::size_t n = state_dimension(c.system);
  std::optional<std::size_t> heading;
  if (c.system.kind == SystemSpec::Kind::Unicycle && c.extent.oriented) heading = 2;
  switch (c.extent.kind) {
    case ExtentSpec::Kind::Ball: return ExtentFunction::ball(c.extent.radius, n);
    case ExtentSpec::Kind::Ellipse: return ExtentFunction::ellipse(c.extent.shape, n, heading);
    case ExtentSpec::Kind::Superellipse4:
      return ExtentFunction::superellipse4(c.extent.a, c.extent.b, c.extent.size, n, heading);
  }
  throw ConfigError("unknown extent kind");
}

SafeFunction make_safe(const ScenarioConfig& c) {
  switch (c.safe.kind) {
    case SafeSpec::Kind::Halfspace: return SafeFunction::halfspace(Vector(c.safe.normal), c.safe.offset);
    case SafeSpec::Kind::Ball: return SafeFunction::ball(Vector(c.safe.center), c.safe.radius);
    case SafeSpec::Kind::Superellipse:
      return SafeFunction::superellipse(Vector(c.safe.center), Vector(c.safe.semi_axes), c.safe.exponent);
  }
  throw ConfigError("unknown safe set kind");
}

NominalController make_nominal(const ScenarioConfig& c) {
  const auto& n = c.nominal;
  switch (n.kind) {
    case NominalSpec::Kind::GoToGoal:
      return NominalController(GoToGoal{n.goals.front(), n.position_gain, n.heading_gain});
    case NominalSpec::Kind::WaypointCycle:
      return NominalController(WaypointCycle{n.goals, n.switch_radius, n.position_gain, n.heading_gain});
    case NominalSpec::Kind::Constant:
      return NominalController(ConstantInput{Eigen::Map<const Vector>(n.input.data(), static_cast<Eigen::Index>(n.input.size()))});
  }
  throw ConfigError("unknown nominal controller kind");
}

Vector make_initial_state(const ScenarioConfig& c) {
  Vector x = Eigen::Map<const Vector>(c.initial_state.data(), static_cast<Eigen::Index>(c.initial_state.size()));
  if (c.initial_state_noise > 0.0) {
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> noise(0.0, c.initial_state_noise);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += noise(rng);
  }
  if (c.system.kind == SystemSpec::Kind::Unicycle) x[2] = wrap_angle(x[2]);
  return x;
}

BuiltFilter make_filter(const ScenarioConfig& c) {
  const auto& f = c.filter;
  BuiltFilter out;
  qp::QpOptions qp_options;
  qp_options.tol = f.qp_tolerance;
  qp_options.max_iter = f.qp_max_iterations;
  switch (f.kind) {
    case FilterSpec::Kind::None:
      out.filter = std::make_unique<NoFilter>();
      break;
    case FilterSpec::Kind::Zcbf:
      out.filter = std::make_unique<ZcbfFilter>(make_system(c), make_safe(c), ClassKFunction::linear(f.alpha_gain),
                                                qp_options);
      break;
    case FilterSpec::Kind::Sampled: {
      const auto sys = make_system(c);
      const auto extent = make_extent(c);
      const auto h = make_safe(c);
      LipschitzConstants consts;
      if (f.constants == FilterSpec::Constants::User) {
        consts = LipschitzConstants::user(f.A, f.B);
      } else {
        EstimationOptions opts;
        opts.resolution = f.estimation_resolution;
        opts.margin = f.estimation_margin;
        consts = estimate_constants(extent, h, sys, {c.domain_lower, c.domain_upper}, opts);
      }
      SampledFilterConfig cfg;
      cfg.samples = f.samples;
      cfg.gamma = f.gamma;
      cfg.net.spacing = f.spacing;
      cfg.net.tau_margin = f.tau_margin;
      cfg.qp = qp_options;
      out.constants = consts;
      out.filter = std::make_unique<SampledFilter>(sys, extent, h, consts, cfg);
      break;
    }
    case FilterSpec::Kind::Sos: {
      sdp::SdpOptions opts;
      opts.feas_tol = f.sdp_tolerance;
      opts.gap_tol = f.sdp_tolerance;
      opts.max_iter = f.sdp_max_iterations;
      out.filter = std::make_unique<sos::SosFilter>(make_system(c), make_extent(c), make_safe(c),
                                                    ClassKFunction::linear(f.alpha1_gain),
                                                    ClassKFunction::linear(f.alpha2_gain), f.multiplier_degree, opts);
      break;
    }
  }
  return out;
}

}  // namespace eccbf::sim
