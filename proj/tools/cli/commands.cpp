#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "viscoctl/carleman.hpp"
#include "viscoctl/errors.hpp"

namespace viscoctl::cli {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

namespace fs = std::filesystem;

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name);
    if (!f) throw ConfigError("cannot write " + (dir_ / name).string());
    names_.push_back(name);
    return f;
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

using Command = std::function<int(const RunConfig&, const std::string&, Outputs&, std::ostream&)>;

NodeMask shape_mask(const Grid& g, const Shape& s) {
  NodeMask m(std::size_t(g.size()), 0);
  for (Eigen::Index i = 0; i < g.size(); ++i) m[i] = s.contains(g.coord(i)) ? 1 : 0;
  return m;
}

int level_of(const Grid& g, double t, const char* key) {
  const double u = t / g.dt();
  const int level = int(std::lround(u));
  if (std::abs(u - level) > 1e-9 * std::max(1.0, u))
    throw ConfigError(std::string(key) + " must be a multiple of the time step");
  if (level < 1 || level >= g.steps()) throw ConfigError(std::string(key) + " must lie strictly inside (0, horizon)");
  return level;
}

WeightSet admissible_weights(const RunConfig& c, const MovingRegion& region) {
  const GeometryReport geo = analyze_geometry(region);
  if (!geo.admissible()) {
    std::ostringstream msg;
    msg << "geometry is not admissible (A3a " << to_string(geo.pilot.verdict) << ", A3b "
        << to_string(geo.covering.verdict) << ", A3c " << to_string(geo.connectivity.a3c) << ", A3d "
        << to_string(geo.connectivity.a3d) << ", A3e " << to_string(geo.escape.verdict) << ")";
    throw PreconditionError(msg.str());
  }
  return build_psi(region, geo, c.weights);
}

int cmd_check_geometry(const RunConfig& c, const std::string&, Outputs& out, std::ostream&) {
  const MovingRegion region = c.region();
  const GeometryReport geo = analyze_geometry(region);
  {
    auto f = out.open("geometry_report.txt");
    write_geometry_report(f, geo);
  }
  {
    auto f = out.open("geometry_timeseries.csv");
    write_geometry_timeseries(f, region, geo);
  }
  {
    auto f = out.open("omega0_masks.csv");
    write_mask_csv(f, region.grid, region.omega0, std::max(1, region.grid.steps() / 50));
  }
  return kExitOk;
}

int cmd_build_weights(const RunConfig& c, const std::string&, Outputs& out, std::ostream&) {
  const MovingRegion region = c.region();
  WeightSet ws = admissible_weights(c, region);
  const PsiPropertyReport rep = verify_psi_properties(ws, c.weights);
  try {
    eval_weights(ws, c.lambda, c.s);
  } catch (const NumericalError& e) {
    throw PreconditionError(std::string("advisory: ") + e.what());
  }
  {
    auto f = out.open("psi_report.txt");
    write_psi_report(f, ws, rep);
    f << "theta_time_ratio = " << theta_time_ratio(ws) << "\n";
  }
  {
    auto f = out.open("weights.csv");
    write_weights_csv(f, ws);
  }
  {
    auto f = out.open("g.csv");
    f << std::setprecision(12) << "level,t,g\n";
    for (int n = 0; n < ws.levels(); ++n) f << n << ',' << ws.grid.time(n) << ',' << ws.g[n] << '\n';
  }
  return rep.all_pass() ? kExitOk : kExitNumerical;
}

int cmd_simulate(const RunConfig& c, const std::string&, Outputs& out, std::ostream&) {
  const Grid g = c.grid();
  const ProblemSpec spec = c.b.build(g);
  SpaceTimeField chi = c.omega0.empty() ? fixed_masks(g, NodeMask(std::size_t(g.size()), 0))
                                        : control_masks(c.region(), c.control_set, c.mask_mode);
  auto report = out.open("simulate_report.txt");
  report << std::setprecision(10) << "model = " << c.model << "\n";
  if (c.model == "coupled") {
    const CoupledTrajectory traj = solve_coupled_forward(g, spec, c.y0.sample(g), c.z0.sample(g), chi);
    {
      auto f = out.open("norms.csv");
      write_coupled_norms(f, g, traj);
    }
    const SplittingReport split = verify_splitting(g, spec, traj, chi);
    report << "final_norm_y = " << l2_norm(g, traj.y.back()) << "\n";
    report << "final_norm_z = " << l2_norm(g, traj.z.back()) << "\n";
    report << "splitting_viscoelastic = " << split.viscoelastic << "\n";
    report << "splitting_v = " << split.v_equation << "\n";
    report << "splitting_y = " << split.y_equation << "\n";
    report << "adjoint_duality_defect = " << adjoint_consistency(g, spec, chi, c.seed) << "\n";
  } else {
    const ViscoTrajectory traj = solve_viscoelastic(g, spec, c.y0.sample(g), c.y1.sample(g), chi);
    {
      auto f = out.open("norms.csv");
      write_visco_norms(f, g, traj);
    }
    double worst = 0.0;
    for (double b : traj.balance) worst = std::max(worst, std::abs(b));
    report << "initial_energy = " << traj.energy.front() << "\n";
    report << "final_energy = " << traj.energy.back() << "\n";
    report << "max_energy_balance_defect = " << worst << "\n";
  }
  return kExitOk;
}

void write_control_csv(Outputs& out, const Grid& g, const SpaceTimeField& h, const SpaceTimeField* k = nullptr) {
  auto f = out.open("control.csv");
  f << std::setprecision(12) << (k ? "level,t,norm_h,norm_k\n" : "level,t,norm_h\n");
  for (int n = 0; n <= g.steps(); ++n) {
    f << n << ',' << g.time(n) << ',' << l2_norm(g, h[n]);
    if (k) f << ',' << l2_norm(g, (*k)[n]);
    f << '\n';
  }
}

int cmd_control_hum(const RunConfig& c, Outputs& out) {
  const MovingRegion region = c.region();
  const Grid& g = region.grid;
  const ProblemSpec spec = c.b.build(g);
  const SpaceTimeField chi = control_masks(region, c.control_set, c.mask_mode);
  const HUMResult res = hum_control_coupled(g, spec, chi, c.y0.sample(g), c.z0.sample(g), c.beta, c.cg);
  {
    auto f = out.open("hum_report.txt");
    write_hum_report(f, res.report);
  }
  {
    auto f = out.open("residuals.csv");
    write_residual_csv(f, res.report);
  }
  SpaceTimeField applied;
  for (std::size_t n = 0; n < res.h.size(); ++n) applied.push_back(chi[n].cwiseProduct(res.h[n]));
  write_control_csv(out, g, applied);
  return res.report.converged ? kExitOk : kExitNumerical;
}

int cmd_control_cascade(const RunConfig& c, Outputs& out) {
  const MovingRegion region = c.region();
  const Grid& g = region.grid;
  const ProblemSpec spec = c.b.build(g);
  if (((spec.b.array() - 1.0).abs() > 0.0).any())
    throw PreconditionError("cascade control requires b = 1 (set 'b = const 1')");
  CascadeParameters params = choose_cascade_parameters(region);
  if (c.cascade_epsilon) {
    params.level = level_of(g, *c.cascade_epsilon, "cascade_epsilon");
    params.epsilon = g.time(params.level);
  }
  if (!c.cascade_omega_m1.empty()) params.omega_m1 = shape_mask(g, parse_shape(g.dimension(), c.cascade_omega_m1));
  const CascadeResult res = cascade_control(region, c.v0.sample(g), c.y0.sample(g), params, c.beta, c.cg);
  {
    auto f = out.open("cascade_report.txt");
    write_cascade_report(f, res);
  }
  {
    auto f = out.open("phase1_residuals.csv");
    write_residual_csv(f, res.phase1);
  }
  write_control_csv(out, g, res.h, &res.k);
  {
    auto f = out.open("w.csv");
    f << std::setprecision(12) << (g.dimension() == 2 ? "x,y,w,w_scheme,lower_bound\n" : "x,w,w_scheme,lower_bound\n");
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const Point x = g.coord(i);
      f << x.x() << ',';
      if (g.dimension() == 2) f << x.y() << ',';
      f << res.w[i] << ',' << res.w_scheme[i] << ',' << res.w_lower << '\n';
    }
  }
  return res.phase1.converged ? kExitOk : kExitNumerical;
}

int cmd_control(const RunConfig& c, const std::string& mode, Outputs& out, std::ostream&) {
  if (mode == "hum") return cmd_control_hum(c, out);
  if (mode == "cascade") return cmd_control_cascade(c, out);
  throw ConfigError("control mode must be cascade or hum");
}

int cmd_verify_carleman(const RunConfig& c, const std::string&, Outputs& out, std::ostream&) {
  const MovingRegion region = c.region();
  const WeightSet ws = admissible_weights(c, region);
  const CarlemanReport rep = carleman_sweep(region, ws, c.b.build(region.grid), c.carleman);
  {
    auto f = out.open("carleman.csv");
    write_carleman_csv(f, rep);
  }
  {
    auto f = out.open("carleman_summary.txt");
    write_carleman_summary(f, rep);
  }
  return kExitOk;
}

int cmd_estimate_observability(const RunConfig& c, const std::string&, Outputs& out, std::ostream&) {
  const MovingRegion region = c.region();
  const Grid& g = region.grid;
  auto f = out.open("observability_report.txt");
  f << std::setprecision(10) << "system = " << c.obs_system << "\n";
  ObservabilityEstimate est;
  if (c.obs_system == "coupled") {
    const ControlSystem sys = coupled_system(g, c.b.build(g), control_masks(region, c.control_set, c.mask_mode));
    est = estimate_observability_constant(sys, c.obs);
  } else {
    if (!c.obs_epsilon) throw ConfigError("obs_epsilon is required for the transport system");
    const int m = level_of(g, *c.obs_epsilon, "obs_epsilon");
    const Grid sub = g.with_horizon(g.horizon() - g.time(m), g.steps() - m);
    SpaceTimeField chi;
    for (int n = m; n <= g.steps(); ++n) chi.push_back(as_field(region.omega0[n]));
    const ControlSystem sys = transport_system(sub, chi);
    est = estimate_observability_constant(sys, c.obs);

    const CoveringResult cover = check_covering(region, m);
    const double T = g.horizon(), eps = g.time(m);
    const double lhs_factor = c.obs.terminal_lhs ? 1.0 : std::exp(2.0 * (eps - T));
    Field w = Field::Zero(g.size());
    for (int n = m; n <= g.steps(); ++n) w += g.dt() * std::exp(2.0 * (g.time(n) - T)) * chi[n - m];
    const double w_min = w.minCoeff();
    const double c_diag = w_min > 0.0 ? lhs_factor / w_min : std::numeric_limits<double>::infinity();
    const double bound = cover.delta0 > 0.0 ? lhs_factor * std::exp(2.0 * (T - eps)) / cover.delta0
                                             : std::numeric_limits<double>::infinity();
    f << "epsilon = " << eps << "\ndelta0 = " << cover.delta0 << "\n";
    f << "c_diagonal = " << c_diag << "\nc_bound = " << bound << "\n";
    f << "ratio_to_diagonal = " << est.c_obs / c_diag << "\n";
  }
  write_observability_report(f, est);
  return est.status == Verdict::Pass ? kExitOk : kExitNumerical;
}

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"check-geometry", cmd_check_geometry},
      {"build-weights", cmd_build_weights},
      {"simulate", cmd_simulate},
      {"control", cmd_control},
      {"verify-carleman", cmd_verify_carleman},
      {"estimate-observability", cmd_estimate_observability},
  };
  return table;
}

void write_manifest(const fs::path& dir, const std::string& command, const std::string& mode, const RunConfig& c,
                    int code, double seconds, const std::vector<std::string>& outputs, const std::string& message) {
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(c.text);
  nlohmann::json j;
  j["command"] = command;
  if (!mode.empty()) j["mode"] = mode;
  j["config_hash"] = "fnv1a64:" + hash.str();
  j["version"] = kVersion;
  j["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  j["seed"] = c.seed;
  j["exit_code"] = code;
  j["wall_time_s"] = seconds;
  j["outputs"] = outputs;
  if (!message.empty()) j["message"] = message;
  std::ofstream f(dir / "manifest.json");
  f << j.dump(2) << "\n";
}

}  // namespace

int run_command(const std::string& command, const RunConfig& config, const std::string& mode, std::ostream& err) {
  const auto it = commands().find(command);
  if (it == commands().end()) {
    err << "error: unknown command '" << command << "'\n";
    return kExitConfig;
  }
  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  std::string message;
  std::unique_ptr<Outputs> out;
  try {
    out = std::make_unique<Outputs>(config.out);
    code = it->second(config, mode, *out, err);
  } catch (const ConfigError& e) {
    code = kExitConfig;
    message = e.what();
  } catch (const PreconditionError& e) {
    code = kExitPrecondition;
    message = e.what();
  } catch (const NumericalError& e) {
    code = kExitNumerical;
    message = e.what();
  } catch (const fs::filesystem_error& e) {
    code = kExitConfig;
    message = e.what();
  }
  if (!message.empty()) err << "error: " << message << "\n";
  if (out) {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out->dir(), command, mode, config, code, seconds, out->names(), message);
  }
  return code;
}

int run_command_file(const std::string& command, const fs::path& config_path, const std::string& mode,
                     const std::optional<fs::path>& out, const std::optional<unsigned long long>& seed,
                     std::ostream& err) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (out) config.out = *out;
  if (seed) {
    config.seed = *seed;
    config.carleman.seed = *seed;
  }
  return run_command(command, config, mode, err);
}

}  // namespace viscoctl::cli
