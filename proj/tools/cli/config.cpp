#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

#include "viscoctl/errors.hpp"

namespace viscoctl::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("expected an integer, got '" + s + "'");
  return v;
}

std::vector<double> doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& w : words(s)) out.push_back(to_double(w));
  return out;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

double positive(double v, const char* what) {
  if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  return v;
}

FieldSpec parse_field(const std::string& s) {
  FieldSpec f;
  if (s == "zero") return f;
  for (const auto& term : split(s, ';')) {
    const auto w = words(term);
    if (w.size() < 2 || w.size() > 3) throw ConfigError("field term must be 'amplitude kx [ky]', got '" + term + "'");
    SineTerm t;
    t.amplitude = to_double(w[0]);
    t.kx = int(to_int(w[1]));
    t.ky = w.size() == 3 ? int(to_int(w[2])) : 1;
    if (t.kx < 1 || t.ky < 1) throw ConfigError("sine mode numbers must be >= 1");
    f.terms.push_back(t);
  }
  return f;
}

CoefficientSpec parse_coefficient(const std::string& s) {
  auto w = words(s);
  if (w.empty()) throw ConfigError("empty coefficient");
  CoefficientSpec c;
  c.kind = w[0];
  c.values.clear();
  for (std::size_t i = 1; i < w.size(); ++i) c.values.push_back(to_double(w[i]));
  const std::size_t n = c.values.size();
  if (c.kind == "const" && n == 1) return c;
  if ((c.kind == "sin" || c.kind == "cos") && n == 3) return c;
  if (c.kind == "table" && n >= 2) return c;
  throw ConfigError("coefficient must be 'const c', 'sin c a k', 'cos c a k' or 'table v0 v1 ...'");
}

RegionSet parse_set(const std::string& s) {
  if (s == "omega0") return RegionSet::Omega0;
  if (s == "omega1") return RegionSet::Omega1;
  if (s == "omega") return RegionSet::Omega;
  throw ConfigError("region set must be omega0, omega1 or omega");
}

}  // namespace

Field FieldSpec::sample(const Grid& grid) const {
  const double Lx = grid.extent(0);
  const double Ly = grid.dimension() == 2 ? grid.extent(1) : 1.0;
  return grid.sample([&](const Point& x) {
    double v = 0.0;
    for (const auto& t : terms) {
      double m = t.amplitude * std::sin(t.kx * std::numbers::pi * x.x() / Lx);
      if (grid.dimension() == 2) m *= std::sin(t.ky * std::numbers::pi * x.y() / Ly);
      v += m;
    }
    return v;
  });
}

ProblemSpec CoefficientSpec::build(const Grid& grid) const {
  const double L = grid.extent(0);
  const auto& v = values;
  std::function<double(const Point&)> f;
  if (kind == "const") {
    return ProblemSpec::constant(grid, v[0]);
  } else if (kind == "sin") {
    f = [=](const Point& x) { return v[0] + v[1] * std::sin(2.0 * std::numbers::pi * v[2] * x.x() / L); };
  } else if (kind == "cos") {
    f = [=](const Point& x) { return v[0] + v[1] * std::cos(2.0 * std::numbers::pi * v[2] * x.x() / L); };
  } else {
    f = [=](const Point& x) {
      const double u = std::clamp(x.x() / L, 0.0, 1.0) * double(v.size() - 1);
      const std::size_t i = std::min(std::size_t(u), v.size() - 2);
      const double a = u - double(i);
      return (1.0 - a) * v[i] + a * v[i + 1];
    };
  }
  return ProblemSpec::from_function(grid, f);
}

Shape parse_shape(int dimension, const std::string& text) {
  Shape out;
  bool first = true;
  for (const auto& part : split(text, '|')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError("shape part '" + part + "' needs 'box:' or 'ball:'");
    const std::string kind = trim(part.substr(0, colon));
    std::vector<double> v;
    for (const auto& x : split(part.substr(colon + 1), ',')) v.push_back(to_double(x));
    Shape s;
    if (kind == "box" && dimension == 1 && v.size() == 2) {
      s = Shape::interval(v[0], v[1]);
    } else if (kind == "box" && dimension == 2 && v.size() == 4) {
      s = Shape::box(Point(v[0], v[1]), Point(v[2], v[3]));
    } else if (kind == "ball" && dimension == 1 && v.size() == 2) {
      s = Shape::ball(1, Point(v[0], 0.0), v[1]);
    } else if (kind == "ball" && dimension == 2 && v.size() == 3) {
      s = Shape::ball(2, Point(v[0], v[1]), v[2]);
    } else {
      throw ConfigError("bad shape part '" + part + "' for dimension " + std::to_string(dimension));
    }
    out = first ? s : out.unite(s);
    first = false;
  }
  if (first) throw ConfigError("empty shape");
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig c;
  c.text = text;
  using Handler = std::function<void(const std::string&)>;
  const std::map<std::string, Handler> handlers{
      {"dimension", [&](const std::string& v) { c.dimension = int(to_int(v)); }},
      {"extent", [&](const std::string& v) { c.extent = doubles(v); }},
      {"nodes",
       [&](const std::string& v) {
         c.nodes.clear();
         for (const auto& w : words(v)) c.nodes.push_back(int(to_int(w)));
       }},
      {"horizon", [&](const std::string& v) { c.horizon = positive(to_double(v), "horizon"); }},
      {"steps", [&](const std::string& v) { c.steps = int(to_int(v)); }},
      {"flow",
       [&](const std::string& v) {
         auto w = words(v);
         if (w.empty()) throw ConfigError("empty flow");
         c.flow_kind = w[0];
         c.flow_params = doubles(v.substr(v.find(w[0]) + w[0].size()));
       }},
      {"omega0", [&](const std::string& v) { c.omega0 = v; }},
      {"omega1", [&](const std::string& v) { c.omega1 = v; }},
      {"omega", [&](const std::string& v) { c.omega = v; }},
      {"margin1", [&](const std::string& v) { c.margin1 = positive(to_double(v), "margin1"); }},
      {"margin", [&](const std::string& v) { c.margin = positive(to_double(v), "margin"); }},
      {"b", [&](const std::string& v) { c.b = parse_coefficient(v); }},
      {"model",
       [&](const std::string& v) {
         if (v != "coupled" && v != "viscoelastic") throw ConfigError("model must be coupled or viscoelastic");
         c.model = v;
       }},
      {"y0", [&](const std::string& v) { c.y0 = parse_field(v); }},
      {"z0", [&](const std::string& v) { c.z0 = parse_field(v); }},
      {"y1", [&](const std::string& v) { c.y1 = parse_field(v); }},
      {"v0", [&](const std::string& v) { c.v0 = parse_field(v); }},
      {"beta", [&](const std::string& v) { c.beta = positive(to_double(v), "beta"); }},
      {"cg_tol", [&](const std::string& v) { c.cg.rel_tol = positive(to_double(v), "cg_tol"); }},
      {"cg_max_iter", [&](const std::string& v) { c.cg.max_iter = int(to_int(v)); }},
      {"control_set", [&](const std::string& v) { c.control_set = parse_set(v); }},
      {"mask",
       [&](const std::string& v) {
         if (v == "sharp") c.mask_mode = MaskMode::Sharp;
         else if (v == "smoothed") c.mask_mode = MaskMode::Smoothed;
         else throw ConfigError("mask must be sharp or smoothed");
       }},
      {"cascade_epsilon", [&](const std::string& v) { c.cascade_epsilon = positive(to_double(v), "cascade_epsilon"); }},
      {"cascade_omega_m1", [&](const std::string& v) { c.cascade_omega_m1 = v; }},
      {"psi1_mode",
       [&](const std::string& v) {
         if (v == "moving") c.weights.psi1_mode = Psi1Mode::MovingCenter;
         else if (v == "pilot") c.weights.psi1_mode = Psi1Mode::PilotFlow;
         else throw ConfigError("psi1_mode must be moving or pilot");
       }},
      {"tol_grad_rel", [&](const std::string& v) { c.weights.tol_grad_rel = positive(to_double(v), "tol_grad_rel"); }},
      {"tol_t_rel", [&](const std::string& v) { c.weights.tol_t_rel = positive(to_double(v), "tol_t_rel"); }},
      {"max_doublings", [&](const std::string& v) { c.weights.max_doublings = int(to_int(v)); }},
      {"lambda", [&](const std::string& v) { c.lambda = positive(to_double(v), "lambda"); }},
      {"s", [&](const std::string& v) { c.s = positive(to_double(v), "s"); }},
      {"obs_system",
       [&](const std::string& v) {
         if (v != "coupled" && v != "transport") throw ConfigError("obs_system must be coupled or transport");
         c.obs_system = v;
       }},
      {"obs_q_only", [&](const std::string& v) { c.obs.q_only = to_bool(v); }},
      {"obs_terminal_lhs", [&](const std::string& v) { c.obs.terminal_lhs = to_bool(v); }},
      {"obs_max_outer", [&](const std::string& v) { c.obs.max_outer = int(to_int(v)); }},
      {"obs_block", [&](const std::string& v) { c.obs.block = int(to_int(v)); }},
      {"obs_tol", [&](const std::string& v) { c.obs.rel_tol = positive(to_double(v), "obs_tol"); }},
      {"obs_epsilon", [&](const std::string& v) { c.obs_epsilon = positive(to_double(v), "obs_epsilon"); }},
      {"carleman_ensemble", [&](const std::string& v) { c.carleman.ensemble = int(to_int(v)); }},
      {"carleman_s", [&](const std::string& v) { c.carleman.s_grid = doubles(v); }},
      {"carleman_lambda", [&](const std::string& v) { c.carleman.lambda_grid = doubles(v); }},
      {"seed", [&](const std::string& v) { c.seed = static_cast<unsigned long long>(to_int(v)); }},
      {"out", [&](const std::string& v) { c.out = v; }},
  };

  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto h = handlers.find(key);
    if (h == handlers.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "key '" + key + "': missing value");
    try {
      h->second(value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + "key '" + key + "': " + e.what());
    }
  }

  const auto fail = [&](const std::string& msg) { throw ConfigError(source + ": " + msg); };
  if (c.dimension != 1 && c.dimension != 2) fail("dimension must be 1 or 2");
  if (int(c.extent.size()) != c.dimension) fail("extent needs one value per dimension");
  if (int(c.nodes.size()) != c.dimension) fail("nodes needs one value per dimension");
  for (double e : c.extent)
    if (!(e > 0.0)) fail("extent must be positive");
  for (int n : c.nodes)
    if (n < 5) fail("nodes must be at least 5 per axis");
  if (c.steps < 1) fail("steps must be at least 1");
  if (c.cg.max_iter < 1) fail("cg_max_iter must be at least 1");
  if (c.obs.max_outer < 1 || c.obs.block < 1) fail("obs_max_outer and obs_block must be at least 1");
  if (c.carleman.ensemble < 0) fail("carleman_ensemble must be nonnegative");
  if (c.carleman.s_grid.empty() || c.carleman.lambda_grid.empty()) fail("carleman_s and carleman_lambda need values");
  if (c.margin1 >= c.margin) fail("margin1 must be smaller than margin");
  const auto check = [&](const char* key, auto&& build) {
    try {
      build();
    } catch (const Error& e) {
      fail(std::string("key '") + key + "': " + e.what());
    }
  };
  check("flow", [&] { c.flow(); });
  for (const auto& [key, text] : {std::pair<const char*, const std::string*>{"omega0", &c.omega0},
                                  {"omega1", &c.omega1},
                                  {"omega", &c.omega},
                                  {"cascade_omega_m1", &c.cascade_omega_m1}})
    if (!text->empty()) check(key, [&] { parse_shape(c.dimension, *text); });
  c.carleman.seed = c.seed;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

Grid RunConfig::grid() const { return Grid::build(dimension, extent, nodes, horizon, steps); }

FlowField RunConfig::flow() const {
  const auto& p = flow_params;
  const std::size_t n = p.size();
  const auto need = [&](bool ok, const char* form) {
    if (!ok) throw ConfigError(std::string("flow must be '") + form + "'");
  };
  if (flow_kind == "static") {
    need(n == 0, "static");
    return FlowField::translation(Point::Zero());
  }
  if (flow_kind == "translation") {
    need(n == std::size_t(dimension), dimension == 1 ? "translation vx" : "translation vx vy");
    return FlowField::translation(Point(p[0], dimension == 2 ? p[1] : 0.0));
  }
  if (flow_kind == "oscillating") {
    if (dimension == 1) {
      need(n == 3, "oscillating base amplitude period");
      return FlowField::oscillating_translation(Point(p[0], 0.0), Point(p[1], 0.0), positive(p[2], "period"));
    }
    need(n == 5, "oscillating bx by ax ay period");
    return FlowField::oscillating_translation(Point(p[0], p[1]), Point(p[2], p[3]), positive(p[4], "period"));
  }
  if (flow_kind == "rotation") {
    need(dimension == 2 && n == 3, "rotation cx cy omega (2D)");
    return FlowField::rotation(Point(p[0], p[1]), p[2]);
  }
  if (flow_kind == "tabulated") {
    if (dimension == 1) {
      need(n >= 4, "tabulated lo hi count v...");
      const int count = int(p[2]);
      need(count >= 2 && n == std::size_t(3 + count), "tabulated lo hi count v_1 ... v_count");
      std::vector<Point> samples;
      for (int i = 0; i < count; ++i) samples.emplace_back(p[3 + i], 0.0);
      return FlowField::tabulated(1, Point(p[0], 0.0), Point(p[1], 0.0), {count, 1}, samples);
    }
    need(n >= 6, "tabulated lox loy hix hiy nx ny vx vy ...");
    const int nx = int(p[4]), ny = int(p[5]);
    need(nx >= 2 && ny >= 2 && n == std::size_t(6 + 2 * nx * ny), "tabulated lox loy hix hiy nx ny (vx vy) x nx*ny");
    std::vector<Point> samples;
    for (int i = 0; i < nx * ny; ++i) samples.emplace_back(p[6 + 2 * i], p[7 + 2 * i]);
    return FlowField::tabulated(2, Point(p[0], p[1]), Point(p[2], p[3]), {nx, ny}, samples);
  }
  throw ConfigError("unknown flow '" + flow_kind + "'");
}

RegionSpec RunConfig::regions() const {
  if (omega0.empty()) throw ConfigError("omega0 is required");
  const Shape s0 = parse_shape(dimension, omega0);
  RegionSpec spec = RegionSpec::nested(s0, margin1, margin);
  if (!omega1.empty()) spec.omega1 = parse_shape(dimension, omega1);
  if (!omega.empty()) spec.omega = parse_shape(dimension, omega);
  spec.validate();
  return spec;
}

MovingRegion RunConfig::region() const { return build_moving_region(flow(), regions(), grid()); }

}  // namespace viscoctl::cli
