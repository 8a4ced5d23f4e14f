#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "viscoctl/carleman.hpp"
#include "viscoctl/control.hpp"

namespace viscoctl::cli {

// One term amplitude * sin(kx pi x / Lx) * sin(ky pi y / Ly).
struct SineTerm {
  double amplitude = 0.0;
  int kx = 1;
  int ky = 1;
};

struct FieldSpec {
  std::vector<SineTerm> terms;
  Field sample(const Grid& grid) const;
};

// b(x) = const c | sin c a k | cos c a k (c + a sin(2 pi k x / Lx)) | table v0 v1 ... (piecewise linear in x).
struct CoefficientSpec {
  std::string kind = "const";
  std::vector<double> values{1.0};
  ProblemSpec build(const Grid& grid) const;
};

struct RunConfig {
  std::string text;  // raw configuration, hashed into the manifest

  // grid
  int dimension = 1;
  std::vector<double> extent{1.0};
  std::vector<int> nodes{61};
  double horizon = 1.0;
  int steps = 100;

  // flow and regions
  std::string flow_kind = "translation";
  std::vector<double> flow_params{0.0};
  std::string omega0, omega1, omega;
  double margin1 = 0.05;
  double margin = 0.1;

  // problem
  CoefficientSpec b;
  std::string model = "coupled";
  FieldSpec y0, z0, y1, v0;

  // control
  double beta = 1e-8;
  CGOptions cg{1e-8, 500};
  RegionSet control_set = RegionSet::Omega;
  MaskMode mask_mode = MaskMode::Sharp;
  std::optional<double> cascade_epsilon;
  std::string cascade_omega_m1;

  // weights
  WeightOptions weights;
  double lambda = 1.0;
  double s = 1.0;

  // observability
  std::string obs_system = "coupled";
  ObservabilityOptions obs;
  std::optional<double> obs_epsilon;

  // carleman
  CarlemanSweepOptions carleman;

  unsigned long long seed = 1;
  std::filesystem::path out = "out";

  Grid grid() const;
  FlowField flow() const;
  RegionSpec regions() const;
  MovingRegion region() const;
};

// Parses "key = value" lines ('#' starts a comment). Unknown keys, duplicate
// keys and malformed values raise ConfigError naming the line and the key.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// "box:lo,hi" / "box:lox,loy,hix,hiy" / "ball:c,r" / "ball:cx,cy,r", joined by '|'.
Shape parse_shape(int dimension, const std::string& text);

}  // namespace viscoctl::cli
