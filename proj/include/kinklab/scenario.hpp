#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kinklab/evolve.hpp"
#include "kinklab/field.hpp"
#include "kinklab/io.hpp"
#include "kinklab/kink.hpp"
#include "kinklab/potential.hpp"
#include "kinklab/spectral.hpp"

namespace kinklab {

enum class Experiment { kink_check, spectrum, resonance, linear_decay, nonlinear_decay, asymptotics, sweep };
std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

enum class Shape { gaussian, wavelet, tau_mixture };
std::string to_string(Shape s);
Shape shape_from_string(const std::string& s);

struct PotentialSpec {
  PotentialKind kind = PotentialKind::flat_well;
  double a = 1;
  double m = 1.4142135623730951;
  double delta = 0.1;
  double barrier_height = 0.65;
  Potential build() const;
};

struct GridSpec {
  double L = 130;
  double h = 0.05;
  int order = 0;  // 0 = Fourier
  Grid build() const { return Grid::centered(L, h, order); }
};

// Defaults: Psi bump at center + 2 (width w), Pi bump of half height at
// center - 1.5 (width w sqrt 2), scaled so that ||X0||_E = amplitude.
struct PerturbationSpec {
  Shape shape = Shape::gaussian;
  double amplitude = 1e-2;  // d0
  double center = 0;
  double width = 2;
  unsigned long long seed = 1;
};

struct Scenario {
  std::string name = "scenario";
  Experiment experiment = Experiment::nonlinear_decay;
  PotentialSpec potential;
  GridSpec grid;
  double profile_L = 30, profile_h = 0.005;  // kink profile sampling
  EvolveConfig evolve;
  PerturbationSpec perturbation;
  double v0 = 0.3, b0 = 0;
  double beta = 2.6, nu = 0.25;
  SpectralOptions spectral;
  std::vector<double> certify_v = {0.5};
  // optional expectations for spectrum / resonance runs ("expect": {...})
  json expect = json::object();
  // sweep: inner experiment and axes
  Experiment sweep_experiment = Experiment::nonlinear_decay;
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  std::string output_dir = "out";
};

Scenario default_scenario(Experiment e);
// unknown keys and invalid values throw ConfigError
Scenario scenario_from_json(const json& j);
json to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

// "v0=0,0.2,0.4"
std::pair<std::string, std::vector<double>> parse_axis(const std::string& spec);
void apply_axis(Scenario& s, const std::string& axis, double value);

// Initial transversal data on `grid`, before any projection. Bit-reproducible
// for a fixed spec.
PerturbationState make_perturbation(const PerturbationSpec& spec, const KinkProfile& profile, double v,
                                    const Grid& grid);

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Outcome {
  int exit_code = 0;  // 0 ok, 1 assertion failed, 2 config error, 3 numerical failure
  std::string error;
  std::vector<Assertion> assertions;
  json verdict = json::object();
  std::vector<std::pair<std::string, double>> metrics;  // summary numbers for sweep tables
  std::vector<std::string> files;                       // relative to the output directory
};

// Runs the experiment, writes artifacts plus manifest.json under output_dir.
// Never throws for numerical trouble; the exit code says what happened.
Outcome run_scenario(const Scenario& s);

// One run per grid point of the axes, at most `threads` at a time, each in
// output_dir/cell_NNN; sweep.csv and sweep.json aggregate them.
Outcome run_sweep(const Scenario& tmpl, const std::vector<std::pair<std::string, std::vector<double>>>& axes,
                  unsigned threads);

// KINKLAB_THREADS, else the hardware concurrency
unsigned thread_cap();

// Summary of the manifests under dir; returns the text and sets ok to whether every run passed.
std::string report(const std::filesystem::path& dir, bool& ok);

}  // namespace kinklab
