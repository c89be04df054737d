#include "kinklab/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "kinklab/analysis.hpp"
#include "kinklab/asymptotics.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/symplectic.hpp"

namespace kinklab {

namespace fs = std::filesystem;

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::kink_check: return "kink_check";
    case Experiment::spectrum: return "spectrum";
    case Experiment::resonance: return "resonance";
    case Experiment::linear_decay: return "linear_decay";
    case Experiment::nonlinear_decay: return "nonlinear_decay";
    case Experiment::asymptotics: return "asymptotics";
    case Experiment::sweep: return "sweep";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  for (auto e : {Experiment::kink_check, Experiment::spectrum, Experiment::resonance, Experiment::linear_decay,
                 Experiment::nonlinear_decay, Experiment::asymptotics, Experiment::sweep})
    if (to_string(e) == s) return e;
  throw ConfigError("unknown experiment '" + s + "'");
}

std::string to_string(Shape s) {
  switch (s) {
    case Shape::gaussian: return "gaussian";
    case Shape::wavelet: return "wavelet";
    case Shape::tau_mixture: return "tau_mixture";
  }
  return "?";
}

Shape shape_from_string(const std::string& s) {
  if (s == "gaussian") return Shape::gaussian;
  if (s == "wavelet") return Shape::wavelet;
  if (s == "tau_mixture" || s == "tau-mixture") return Shape::tau_mixture;
  throw ConfigError("unknown perturbation shape '" + s + "'");
}

Potential PotentialSpec::build() const {
  if (kind == PotentialKind::quartic) return make_quartic(a);
  return make_flat_well(a, m, delta, barrier_height);
}

Scenario default_scenario(Experiment e) {
  Scenario s;
  s.experiment = e;
  s.evolve.dt = 0.02;
  s.evolve.T = 100;
  s.evolve.snapshot_stride = 5;
  if (e == Experiment::linear_decay) {
    s.grid.L = 80;
    s.evolve.dt = 0.01;
    s.evolve.T = 50;
    s.evolve.snapshot_stride = 50;
  }
  if (e == Experiment::spectrum || e == Experiment::resonance) s.v0 = 0;
  return s;
}

namespace {

// reads an object, remembering which keys were consumed
struct Reader {
  const json& j;
  std::string where;
  std::set<std::string> seen;

  Reader(const json& obj, std::string w) : j(obj), where(std::move(w)) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
  }
  bool has(const std::string& k) {
    seen.insert(k);
    return j.contains(k);
  }
  double num(const std::string& k, double def) {
    if (!has(k)) return def;
    if (!j[k].is_number()) throw ConfigError(where + "." + k + ": expected a number");
    return j[k].get<double>();
  }
  int integer(const std::string& k, int def) {
    if (!has(k)) return def;
    if (!j[k].is_number_integer()) throw ConfigError(where + "." + k + ": expected an integer");
    return j[k].get<int>();
  }
  std::string str(const std::string& k, const std::string& def) {
    if (!has(k)) return def;
    if (!j[k].is_string()) throw ConfigError(where + "." + k + ": expected a string");
    return j[k].get<std::string>();
  }
  std::vector<double> list(const std::string& k, const std::vector<double>& def) {
    if (!has(k)) return def;
    if (!j[k].is_array()) throw ConfigError(where + "." + k + ": expected an array");
    std::vector<double> out;
    for (const auto& x : j[k]) {
      if (!x.is_number()) throw ConfigError(where + "." + k + ": expected numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  void finish() const {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!seen.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
};

void validate(const Scenario& s) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(s.grid.L > 0 && s.grid.h > 0 && s.grid.h < s.grid.L, "grid: need 0 < h < L");
  need(s.grid.order == 0 || s.grid.order == 2 || s.grid.order == 4 || s.grid.order == 6 || s.grid.order == 8,
       "grid.order must be 0, 2, 4, 6 or 8");
  need(s.profile_L > 0 && s.profile_h > 0, "profile: need L, h > 0");
  need(s.evolve.dt > 0 && s.evolve.T > 0 && s.evolve.snapshot_stride > 0, "evolve: need dt, T, snapshot_stride > 0");
  need(std::abs(s.v0) < 1, "soliton.v must satisfy |v| < 1");
  need(s.perturbation.amplitude >= 0 && s.perturbation.width > 0, "perturbation: need amplitude >= 0, width > 0");
  need(s.beta > 0 && s.nu > 0 && s.nu < 0.5, "norms: need beta > 0 and 0 < nu < 1/2");
  need(s.spectral.L > 0 && s.spectral.h > 0 && s.spectral.count > 0, "spectral: need L, h, count > 0");
  for (double v : s.certify_v) need(std::abs(v) < 1, "spectral.certify_v: need |v| < 1");
  for (const auto& [k, vals] : s.axes) {
    need(k == "v0" || k == "d0" || k == "barrier_height" || k == "h", "sweep axis '" + k + "' not in {v0, d0, barrier_height, h}");
    need(!vals.empty(), "sweep axis '" + k + "' has no values");
  }
  need(s.sweep_experiment != Experiment::sweep, "sweep.experiment cannot itself be a sweep");
  need(!s.output_dir.empty(), "output_dir is empty");
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  try {
    Reader top(j, "scenario");
    const Experiment e = experiment_from_string(top.str("experiment", "nonlinear_decay"));
    Scenario s = default_scenario(e);
    s.name = top.str("name", s.name);
    s.output_dir = top.str("output_dir", s.output_dir);
    if (top.has("potential")) {
      Reader r(j["potential"], "potential");
      s.potential.kind = potential_kind_from_string(r.str("kind", to_string(s.potential.kind)));
      s.potential.a = r.num("a", s.potential.a);
      s.potential.m = r.num("m", s.potential.m);
      s.potential.delta = r.num("delta", s.potential.delta);
      s.potential.barrier_height = r.num("barrier_height", s.potential.barrier_height);
      r.finish();
    }
    if (top.has("grid")) {
      Reader r(j["grid"], "grid");
      s.grid.L = r.num("L", s.grid.L);
      s.grid.h = r.num("h", s.grid.h);
      s.grid.order = r.integer("order", s.grid.order);
      r.finish();
    }
    if (top.has("profile")) {
      Reader r(j["profile"], "profile");
      s.profile_L = r.num("L", s.profile_L);
      s.profile_h = r.num("h", s.profile_h);
      r.finish();
    }
    if (top.has("evolve")) {
      Reader r(j["evolve"], "evolve");
      s.evolve.dt = r.num("dt", s.evolve.dt);
      s.evolve.T = r.num("T", s.evolve.T);
      s.evolve.scheme = scheme_from_string(r.str("scheme", to_string(s.evolve.scheme)));
      s.evolve.boundary = boundary_from_string(r.str("boundary", to_string(s.evolve.boundary)));
      s.evolve.snapshot_stride = r.integer("snapshot_stride", s.evolve.snapshot_stride);
      r.finish();
    }
    if (top.has("soliton")) {
      Reader r(j["soliton"], "soliton");
      s.b0 = r.num("b", s.b0);
      s.v0 = r.num("v", s.v0);
      r.finish();
    }
    if (top.has("perturbation")) {
      Reader r(j["perturbation"], "perturbation");
      s.perturbation.shape = shape_from_string(r.str("shape", to_string(s.perturbation.shape)));
      s.perturbation.amplitude = r.num("amplitude", s.perturbation.amplitude);
      s.perturbation.center = r.num("center", s.perturbation.center);
      s.perturbation.width = r.num("width", s.perturbation.width);
      if (r.has("seed")) {
        if (!j["perturbation"]["seed"].is_number_unsigned())
          throw ConfigError("perturbation.seed: expected a nonnegative integer");
        s.perturbation.seed = j["perturbation"]["seed"].get<unsigned long long>();
      }
      r.finish();
    }
    if (top.has("norms")) {
      Reader r(j["norms"], "norms");
      s.beta = r.num("beta", s.beta);
      s.nu = r.num("nu", s.nu);
      r.finish();
    }
    if (top.has("spectral")) {
      Reader r(j["spectral"], "spectral");
      s.spectral.L = r.num("L", s.spectral.L);
      s.spectral.h = r.num("h", s.spectral.h);
      s.spectral.count = r.integer("count", s.spectral.count);
      s.spectral.zero_tol = r.num("zero_tol", s.spectral.zero_tol);
      s.spectral.edge_gap = r.num("edge_gap", s.spectral.edge_gap);
      s.spectral.resonance_threshold = r.num("resonance_threshold", s.spectral.resonance_threshold);
      s.certify_v = r.list("certify_v", s.certify_v);
      r.finish();
    }
    if (top.has("expect")) {
      Reader r(j["expect"], "expect");
      if (r.has("u2") && !j["expect"]["u2"].is_boolean()) throw ConfigError("expect.u2: expected a boolean");
      if (r.has("u1") && !j["expect"]["u1"].is_boolean()) throw ConfigError("expect.u1: expected a boolean");
      r.list("eigenvalues", {});
      const std::string res = r.str("resonance", "none");
      if (res != "resonance" && res != "none" && res != "inconclusive")
        throw ConfigError("expect.resonance: expected resonance, none or inconclusive");
      r.integer("internal_modes", 0);
      r.finish();
      s.expect = j["expect"];
    }
    if (top.has("sweep")) {
      Reader r(j["sweep"], "sweep");
      s.sweep_experiment = experiment_from_string(r.str("experiment", to_string(s.sweep_experiment)));
      if (r.has("axes")) {
        const json& ax = j["sweep"]["axes"];
        if (!ax.is_object()) throw ConfigError("sweep.axes: expected an object");
        Reader ra(ax, "sweep.axes");
        for (auto it = ax.begin(); it != ax.end(); ++it) s.axes.emplace_back(it.key(), ra.list(it.key(), {}));
      }
      r.finish();
    }
    top.finish();
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["experiment"] = to_string(s.experiment);
  j["output_dir"] = s.output_dir;
  j["potential"] = {{"kind", to_string(s.potential.kind)},
                    {"a", s.potential.a},
                    {"m", s.potential.m},
                    {"delta", s.potential.delta},
                    {"barrier_height", s.potential.barrier_height}};
  j["grid"] = {{"L", s.grid.L}, {"h", s.grid.h}, {"order", s.grid.order}};
  j["profile"] = {{"L", s.profile_L}, {"h", s.profile_h}};
  j["evolve"] = {{"dt", s.evolve.dt},
                 {"T", s.evolve.T},
                 {"scheme", to_string(s.evolve.scheme)},
                 {"boundary", to_string(s.evolve.boundary)},
                 {"snapshot_stride", s.evolve.snapshot_stride}};
  j["soliton"] = {{"b", s.b0}, {"v", s.v0}};
  j["perturbation"] = {{"shape", to_string(s.perturbation.shape)},
                       {"amplitude", s.perturbation.amplitude},
                       {"center", s.perturbation.center},
                       {"width", s.perturbation.width},
                       {"seed", s.perturbation.seed}};
  j["norms"] = {{"beta", s.beta}, {"nu", s.nu}};
  j["spectral"] = {{"L", s.spectral.L},
                   {"h", s.spectral.h},
                   {"count", s.spectral.count},
                   {"zero_tol", s.spectral.zero_tol},
                   {"edge_gap", s.spectral.edge_gap},
                   {"resonance_threshold", s.spectral.resonance_threshold},
                   {"certify_v", s.certify_v}};
  j["expect"] = s.expect;
  json ax = json::object();
  for (const auto& [k, v] : s.axes) ax[k] = v;
  j["sweep"] = {{"experiment", to_string(s.sweep_experiment)}, {"axes", ax}};
  return j;
}

Scenario load_scenario(const fs::path& path) { return scenario_from_json(read_json(path)); }

std::pair<std::string, std::vector<double>> parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("axis '" + spec + "': expected name=v1,v2,...");
  std::pair<std::string, std::vector<double>> out;
  out.first = spec.substr(0, eq);
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size() || !std::isfinite(x))
      throw ConfigError("axis '" + spec + "': bad value '" + item + "'");
    out.second.push_back(x);
  }
  if (out.second.empty()) throw ConfigError("axis '" + spec + "' has no values");
  if (out.first != "v0" && out.first != "d0" && out.first != "barrier_height" && out.first != "h")
    throw ConfigError("sweep axis '" + out.first + "' not in {v0, d0, barrier_height, h}");
  return out;
}

void apply_axis(Scenario& s, const std::string& axis, double value) {
  if (axis == "v0") s.v0 = value;
  else if (axis == "d0") s.perturbation.amplitude = value;
  else if (axis == "barrier_height") s.potential.barrier_height = value;
  else if (axis == "h") s.grid.h = value;
  else throw ConfigError("sweep axis '" + axis + "' not in {v0, d0, barrier_height, h}");
}

PerturbationState make_perturbation(const PerturbationSpec& spec, const KinkProfile& profile, double v,
                                    const Grid& grid) {
  PerturbationState X(grid);
  if (spec.amplitude == 0) return X;
  std::mt19937_64 rng(spec.seed);
  const double w = spec.width, c1 = spec.center + 2, c2 = spec.center - 1.5;
  double k = 0, phase = 0;
  if (spec.shape == Shape::wavelet) {
    std::uniform_real_distribution<double> kd(1.0, 3.0), pd(0.0, 2 * M_PI);
    k = kd(rng) / w;
    phase = pd(rng);
  }
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double u1 = (grid.x(i) - c1) / w, u2 = (grid.x(i) - c2) / w;
    X.Psi[i] = std::exp(-u1 * u1);
    X.Pi[i] = 0.5 * std::exp(-0.5 * u2 * u2);
    if (spec.shape == Shape::wavelet) {
      X.Psi[i] *= std::cos(k * w * u1 + phase);
      X.Pi[i] *= std::sin(k * w * u2 + phase);
    }
  }
  if (spec.shape == Shape::tau_mixture) {
    // tangent directions that the projection will absorb into sigma
    const TangentFrame f = tangent_frame(profile, v, grid);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double n0 = norm_E(X);
    const double a1 = nd(rng) * n0 / norm_E(f.tau1), a2 = nd(rng) * n0 / norm_E(f.tau2);
    X.axpy(a1, f.tau1);
    X.axpy(a2, f.tau2);
  }
  const double n = norm_E(X);
  if (!(n > 0)) throw DomainError("perturbation vanishes on this grid");
  X *= spec.amplitude / n;
  return X;
}

namespace {

struct Ctx {
  const Scenario& s;
  fs::path dir;
  Outcome& out;

  void csv(const std::string& name, const Table& t) {
    write_csv(dir / name, t);
    out.files.push_back(name);
  }
  void js(const std::string& name, const json& j) {
    write_json(dir / name, j);
    out.files.push_back(name);
  }
  void check(const std::string& name, bool pass, const std::string& detail) {
    out.assertions.push_back({name, pass, detail});
  }
  void metric(const std::string& name, double x) { out.metrics.emplace_back(name, x); }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

json fit_entry(const std::string& name, const DecayFit& f) {
  json j = {{"name", name}};
  j.update(to_json(f));
  return j;
}

json fit_entry(const std::string& name, const DecayFit& f, double lo, double hi, bool pass) {
  json j = fit_entry(name, f);
  j["band"] = {std::isfinite(lo) ? json(lo) : json(nullptr), hi};
  j["pass"] = pass;
  return j;
}

void kink_check(Ctx& c) {
  const Potential p = c.s.potential.build();
  const KinkProfile prof = build_profile(p, c.s.profile_L, c.s.profile_h);
  c.csv("profile.csv", profile_table(prof));
  const ConditionReport u1 = check_U1(p, 1e-10);
  c.js("condition_report.json", to_json(u1));
  json v;
  v["psi_star"] = prof.psi_star();
  const double fi = prof.first_integral_residual();
  v["first_integral_residual"] = fi;
  c.check("first_integral", fi <= 1e-10, fmt("max |s'^2/2 - U(s)| = %.3e (tol 1e-10)", fi));
  c.metric("first_integral_residual", fi);
  if (c.s.expect.contains("u1")) {
    const bool want = c.s.expect["u1"].get<bool>();
    c.check("U1", u1.pass() == want, std::string("check_U1 ") + (u1.pass() ? "passes" : "fails"));
  }
  if (p.kind() == PotentialKind::quartic) {
    const double a = p.a(), Lc = std::min(20.0, prof.L());
    double err = 0;
    for (std::size_t i = 0; i < prof.size(); ++i)
      if (std::abs(prof.x(i)) <= Lc) err = std::max(err, std::abs(prof.s()[i] - a * std::tanh(prof.x(i) / std::sqrt(2.0))));
    v["tanh_max_error"] = err;
    c.check("tanh_profile", err <= 1e-6, fmt("max |s - a tanh(x/sqrt2)| = %.3e on |x| <= %g", err, Lc));
    c.metric("tanh_max_error", err);
  }
  const TailFit tf = tail_rate(prof);
  v["tail"] = {{"lambda_minus", tf.lambda_minus},
               {"lambda_plus", tf.lambda_plus},
               {"expected", p.m()},
               {"residual", tf.residual},
               {"flagged", tf.flagged}};
  c.metric("tail_lambda_plus", tf.lambda_plus);
  c.out.verdict = v;
}

void spectrum(Ctx& c) {
  const Potential p = c.s.potential.build();
  const KinkProfile prof = build_profile(p, c.s.profile_L, c.s.profile_h);
  const SpectralReport rep = spectral_report(prof, c.s.v0, c.s.spectral);
  const U2Certificate cert = certify_U2(p, c.s.certify_v, c.s.spectral);
  const Grid rg = Grid::centered(std::min(c.s.grid.L, 40.0), c.s.grid.h, c.s.grid.order);
  const RootSpaceReport rs = root_space_check(prof, c.s.v0, rg, c.s.spectral);
  json j;
  j["report"] = to_json(rep);
  j["certificate"] = to_json(cert);
  j["root_space"] = to_json(rs);
  c.js("spectrum.json", j);
  for (std::size_t k = 0; k < rep.fine_pairs.values.size() && k < rep.discrete.size(); ++k)
    if (rep.discrete[k])
      c.csv("eigenfunction_" + std::to_string(k) + ".csv", eigenfunction_table(rep.fine_grid, rep.fine_pairs.vectors[k]));
  for (std::size_t k = 0; k < rep.eigenvalues.size() && k < 4; ++k)
    c.metric("eigenvalue_" + std::to_string(k), rep.eigenvalues[k]);
  c.metric("wronskian", rep.resonance.wronskian);
  c.metric("u2", cert.pass ? 1 : 0);
  const json& e = c.s.expect;
  if (e.contains("u2")) {
    const bool want = e["u2"].get<bool>();
    c.check("U2_verdict", !cert.inconclusive && cert.pass == want,
            std::string("certify_U2 ") + (cert.inconclusive ? "inconclusive" : cert.pass ? "passes" : "fails") +
                ", expected " + (want ? "pass" : "fail"));
  }
  if (e.contains("eigenvalues")) {
    const auto want = e["eigenvalues"].get<std::vector<double>>();
    double worst = 0;
    bool ok = rep.eigenvalues.size() >= want.size();
    for (std::size_t k = 0; ok && k < want.size(); ++k) worst = std::max(worst, std::abs(rep.eigenvalues[k] - want[k]));
    c.check("eigenvalues", ok && worst <= 1e-3, fmt("max deviation %.3e (tol 1e-3)", worst));
  }
  if (e.contains("resonance"))
    c.check("resonance", to_string(rep.resonance.verdict) == e["resonance"].get<std::string>(),
            "verdict " + to_string(rep.resonance.verdict) + fmt(", W = %.3e", rep.resonance.wronskian));
  if (e.contains("internal_modes"))
    c.check("internal_modes", rep.internal_modes_fine == e["internal_modes"].get<int>(),
            fmt("%g internal modes", rep.internal_modes_fine));
  c.out.verdict = {{"u2", cert.pass},
                   {"inconclusive", cert.inconclusive},
                   {"eigenvalues", rep.eigenvalues},
                   {"resonance", to_string(rep.resonance.verdict)},
                   {"root_space_pass", rs.pass()}};
}

void resonance(Ctx& c) {
  const Potential p = c.s.potential.build();
  const KinkProfile prof = build_profile(p, c.s.profile_L, c.s.profile_h);
  const ResonanceResult r = resonance_test(prof, c.s.v0, c.s.spectral.resonance_threshold);
  c.js("resonance.json", to_json(r));
  c.metric("wronskian", r.wronskian);
  if (c.s.expect.contains("resonance"))
    c.check("resonance", to_string(r.verdict) == c.s.expect["resonance"].get<std::string>(),
            "verdict " + to_string(r.verdict) + fmt(", W = %.3e", r.wronskian));
  c.out.verdict = to_json(r);
}

void linear_decay(Ctx& c) {
  const Scenario& s = c.s;
  const Potential p = s.potential.build();
  const KinkProfile prof = build_profile(p, s.profile_L, s.profile_h);
  const Grid g = s.grid.build();
  const TangentFrame f = tangent_frame(prof, s.v0, g);
  const PerturbationState X0 = projector_split(make_perturbation(s.perturbation, prof, s.v0, g), f).Xc;
  RunHistory H = evolve_linearized(X0, s.v0, prof, s.evolve, s.beta);
  H.config_echo = to_json(s).dump();
  c.csv("norms.csv", norms_table(H));

  const double T = H.t.back(), t1 = std::min(5.0, T / 10), t2 = std::min(50.0, T);
  json fits = json::array();
  const DecayFit fe = fit_power_law(H.t, H.E_minus_beta, t1, t2);
  const DecayFit fl = fit_power_law(H.t, H.Linf, t1, t2);
  const bool pe = fe.exponent >= -1.8 && fe.exponent <= -1.2, pl = fl.exponent >= -0.8 && fl.exponent <= -0.3;
  fits.push_back(fit_entry("E_minus_beta", fe, -1.8, -1.2, pe));
  fits.push_back(fit_entry("Linf", fl, -0.8, -0.3, pl));
  c.check("E_minus_beta_exponent", pe, fmt("exponent %.3f on [%g, %g], band [-1.8, -1.2]", fe.exponent, t1, t2));
  c.check("Linf_exponent", pl, fmt("exponent %.3f on [%g, %g], band [-0.8, -0.3]", fl.exponent, t1, t2));
  c.metric("E_minus_beta_exponent", fe.exponent);
  c.metric("Linf_exponent", fl.exponent);

  // free group on a unit Gaussian; wider data reach t^-1/2 later (stationary
  // phase sets in for t >> width^2)
  {
    const double T0 = 80;
    const FreeKG W(g, p.m());
    PerturbationState G(g);
    for (std::size_t i = 0; i < g.n; ++i) G.Psi[i] = std::exp(-g.x(i) * g.x(i));
    std::vector<double> ts, li;
    for (int k = 0; k <= int(T0); ++k) {
      ts.push_back(k);
      li.push_back(norm_Linf(W.apply(G, k, 0.0).Psi));
    }
    const DecayFit ff = fit_power_law(ts, li, 10, T0);
    const bool pf = ff.exponent >= -0.6 && ff.exponent <= -0.4;
    fits.push_back(fit_entry("free_Linf", ff, -0.6, -0.4, pf));
    c.check("free_Linf_exponent", pf, fmt("exponent %.3f on [10, 80], band [-0.6, -0.4]", ff.exponent));
    c.metric("free_Linf_exponent", ff.exponent);
  }

  double drift = 0;
  for (double e : H.hamiltonian) drift = std::max(drift, std::abs(e - H.hamiltonian.front()));
  drift /= std::abs(H.hamiltonian.front());
  c.check("hamiltonian_drift", drift <= 1e-6, fmt("relative drift %.3e (tol 1e-6)", drift));
  c.metric("hamiltonian_drift", drift);
  c.out.verdict = {{"fits", fits}, {"hamiltonian_drift", drift}};
}

struct MainRun {
  RunHistory H, Href;
  ProjectionResult initial;
};

MainRun main_run(const Scenario& s, const Potential& p, const KinkProfile& prof, bool refine) {
  const Grid g = s.grid.build();
  FieldState Y0 = soliton_state(prof, {s.b0, s.v0}, g);
  const PerturbationState X = make_perturbation(s.perturbation, prof, s.v0, g.shifted(s.b0));
  for (std::size_t i = 0; i < g.n; ++i) {
    Y0.psi[i] += X.Psi[i];
    Y0.pi[i] += X.Pi[i];
  }
  MainRun r;
  r.initial = project(Y0, prof, {s.b0, s.v0});
  TrackerOptions to;
  to.beta = s.beta;
  to.nu = s.nu;
  to.keep_fields = true;
  r.H = evolve_nonlinear(Y0, p, s.evolve, {make_tracker(prof, r.initial.sigma, to)});
  r.H.config_echo = to_json(s).dump();
  if (refine) {
    EvolveConfig cfg = s.evolve;
    cfg.dt /= 2;
    cfg.snapshot_stride *= 2;
    to.keep_fields = false;
    r.Href = evolve_nonlinear(Y0, p, cfg, {make_tracker(prof, r.initial.sigma, to)});
  }
  return r;
}

void nonlinear(Ctx& c, bool asymptotic_assertions) {
  const Scenario& s = c.s;
  const Potential p = s.potential.build();
  const KinkProfile prof = build_profile(p, s.profile_L, s.profile_h);
  const MainRun M = main_run(s, p, prof, true);
  const RunHistory& H = M.H;
  const double T = H.t.back();
  c.csv("norms.csv", norms_table(H));
  c.csv("tracking.csv", tracking_table(H));
  c.csv("snapshot_initial.csv", snapshot_table(H.field_snapshots.front()));
  c.csv("snapshot_final.csv", snapshot_table(H.field_snapshots.back()));
  json v;
  v["d0_projected"] = norm_E(M.initial.X);
  c.metric("d0_projected", norm_E(M.initial.X));

  double drift = 0;
  for (double e : H.energy) drift = std::max(drift, std::abs(e - H.energy.front()));
  drift /= std::abs(H.energy.front());
  v["energy_drift"] = drift;
  c.check("energy_drift", drift <= 1e-6, fmt("relative drift %.3e (tol 1e-6)", drift));

  json fits = json::array();
  const bool perturbed = norm_E(M.initial.X) > 1e-12;
  if (perturbed) {
    fits.push_back(fit_entry("E_minus_beta", fit_power_law(H.t, H.E_minus_beta, T / 4, T)));
    fits.push_back(fit_entry("Linf", fit_power_law(H.t, H.Linf, T / 4, T)));
  }

  const Majorants mj = majorants(H);
  const bool p1 = mj.growth1 <= 0.05, p2 = mj.growth2 <= 0.05;
  v["majorant_plateaus"] = json::array({{{"name", "m1"}, {"growth", mj.growth1}, {"final", mj.m1.back()}, {"pass", p1}},
                                        {{"name", "m2"}, {"growth", mj.growth2}, {"final", mj.m2.back()}, {"pass", p2}}});
  c.check("m1_plateau", p1, fmt("growth over [T/10, T] %.2f%% (tol 5%%)", 100 * mj.growth1));
  c.check("m2_plateau", p2, fmt("growth over [T/10, T] %.2f%% (tol 5%%)", 100 * mj.growth2));
  c.metric("m1_growth", mj.growth1);
  c.metric("m2_growth", mj.growth2);

  const AsymptoticsResult A = extract_asymptotics(H, prof);
  {
    const bool ok = std::isnan(A.v_tail.exponent) || A.v_tail.exponent <= -1.5;
    fits.push_back(fit_entry("v_tail", A.v_tail, -INFINITY, -1.5, ok));
    c.check("v_tail_exponent", ok, fmt("|v - v+| exponent %.3f (need <= -1.5)", A.v_tail.exponent));
    c.metric("v_tail_exponent", A.v_tail.exponent);
  }
  v["fits"] = fits;

  const ModulationCheck mc = modulation_crosscheck(H, T / 10, T, 10, &M.Href);
  v["modulation"] = {{"t1", mc.t1},           {"t2", mc.t2},           {"mismatch_c", mc.mismatch_c},
                     {"mismatch_v", mc.mismatch_v}, {"error_c", mc.error_c}, {"error_v", mc.error_v},
                     {"floor", mc.floor},     {"ratio", mc.ratio},     {"pass", mc.pass}};
  c.check("modulation_crosscheck", mc.pass, fmt("mismatch / error estimate = %.3f (tol 10)", mc.ratio));
  c.metric("modulation_ratio", mc.ratio);

  if (perturbed) {
    const TangentFrame f = tangent_frame(prof, M.initial.sigma.v, M.initial.X.grid);
    const HalvingResult hv = halving_test(M.initial.X, f, prof);
    v["halving"] = {{"full", hv.full}, {"half", hv.half}, {"ratio", hv.ratio}, {"pass", hv.pass}};
    c.check("halving", hv.pass, fmt("rate ratio %.4f (quadratic law gives 4)", hv.ratio));
  }

  const VirialResult vr = virial_check(H, s.nu);
  v["virial"] = {{"fit", to_json(vr.fit)}, {"bound", vr.bound}, {"pass", vr.pass}};
  c.check("virial", vr.pass, fmt("growth exponent %.3f (bound %.2f)", vr.fit.exponent, vr.bound));
  c.metric("virial_exponent", vr.fit.exponent);

  json we = json::array();
  for (double sig : {1.0, 2.0}) {
    const WeightedEnergyResult w = weighted_energy_check(H.field_snapshots, H.b, p, sig);
    we.push_back({{"sigma", sig}, {"initial", w.initial}, {"early_max", w.early_max}, {"late_max", w.late_max}, {"pass", w.pass}});
    c.check(fmt("weighted_energy_sigma%g", sig), w.pass, fmt("R(0) %.3e, max on [0, T/2) %.3e, on [T/2, T] %.3e", w.initial, w.early_max, w.late_max));
  }
  v["weighted_energy"] = we;

  const LocalEnergyResult le = local_energy_check(H.field_snapshots, p, 20, s.perturbation.seed);
  v["local_energy"] = {{"samples", le.samples.size()}, {"worst_excess", le.worst_excess}, {"pass", le.pass}};
  c.check("local_energy", le.pass, fmt("worst excess %.3e (slack 1e-6)", le.worst_excess));

  c.csv("remainder.csv", remainder_table(A));
  c.csv("phi_plus.csv", [&] {
    Table t;
    std::vector<double> x(A.phi.grid.n);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = A.phi.grid.x(i);
    t.add("x", std::move(x));
    t.add("Psi", A.phi.Psi);
    t.add("Pi", A.phi.Pi);
    return t;
  }());
  v["asymptotics"] = {{"v_plus", A.v_plus},
                      {"q_plus", A.q_plus},
                      {"remainder_exponent", A.remainder_fit.exponent},
                      {"remainder_fit", to_json(A.remainder_fit)},
                      {"increment_fit", to_json(A.increment_fit)},
                      {"phi_norm", A.phi_norm},
                      {"tail_estimate", A.tail_estimate},
                      {"tail_ratio", A.tail_ratio},
                      {"b_fit_residual", A.b_fit_residual},
                      {"quadrature_mismatch", A.quadrature_mismatch},
                      {"warnings", A.warnings}};
  c.metric("v_plus", A.v_plus);
  c.metric("q_plus", A.q_plus);
  c.metric("remainder_exponent", A.remainder_fit.exponent);
  c.metric("increment_exponent", A.increment_fit.exponent);
  c.metric("tail_ratio", A.tail_ratio);
  if (asymptotic_assertions) {
    const double q = A.remainder_fit.exponent;
    c.check("remainder_exponent", q >= -0.8 && q <= -0.3, fmt("||r+||_E exponent %.3f on [T/4, T], band [-0.8, -0.3]", q));
    c.check("tail_ratio", A.tail_ratio < 0.1, fmt("tail / ||Phi+||_E = %.3f (tol 0.1)", A.tail_ratio));
  }
  c.out.verdict = v;
}

int code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  return 3;
}

void write_manifest(const Scenario& s, const fs::path& dir, const Outcome& o) {
  json m;
  m["name"] = s.name;
  m["experiment"] = to_string(s.experiment);
  m["exit_code"] = o.exit_code;
  m["status"] = o.exit_code == 0 ? "pass" : o.exit_code == 1 ? "assertion_failed"
                : o.exit_code == 2 ? "config_error" : "numerical_failure";
  if (!o.error.empty()) m["error"] = o.error;
  m["assertions"] = json::array();
  for (const auto& a : o.assertions) m["assertions"].push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  json metrics = json::object();
  for (const auto& [k, x] : o.metrics) metrics[k] = x;
  m["metrics"] = metrics;
  m["files"] = o.files;
  write_json(dir / "manifest.json", m);
}

}  // namespace

Outcome run_scenario(const Scenario& s) {
  if (s.experiment == Experiment::sweep) return run_sweep(s, s.axes, thread_cap());
  Outcome out;
  const fs::path dir(s.output_dir);
  try {
    validate(s);
    fs::create_directories(dir);
    write_json(dir / "config.json", to_json(s));
    out.files.push_back("config.json");
    try {
      (void)s.potential.build();
      (void)s.grid.build();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    Ctx c{s, dir, out};
    switch (s.experiment) {
      case Experiment::kink_check: kink_check(c); break;
      case Experiment::spectrum: spectrum(c); break;
      case Experiment::resonance: resonance(c); break;
      case Experiment::linear_decay: linear_decay(c); break;
      case Experiment::nonlinear_decay: nonlinear(c, false); break;
      case Experiment::asymptotics: nonlinear(c, true); break;
      case Experiment::sweep: break;
    }
    if (!out.verdict.empty()) {
      write_json(dir / "verdict.json", out.verdict);
      out.files.push_back("verdict.json");
    }
    out.exit_code = 0;
    for (const auto& a : out.assertions)
      if (!a.pass) out.exit_code = 1;
  } catch (const std::exception& e) {
    out.exit_code = code_for(e);
    out.error = e.what();
  }
  try {
    fs::create_directories(dir);
    write_manifest(s, dir, out);
  } catch (const std::exception& e) {
    if (out.error.empty()) out.error = e.what();
    if (out.exit_code == 0) out.exit_code = 3;
  }
  return out;
}

unsigned thread_cap() {
  if (const char* e = std::getenv("KINKLAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(e, &end, 10);
    if (end != e && *end == '\0' && n > 0) return unsigned(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Outcome run_sweep(const Scenario& tmpl, const std::vector<std::pair<std::string, std::vector<double>>>& axes,
                  unsigned threads) {
  Outcome out;
  const fs::path dir(tmpl.output_dir);
  // cartesian product, first axis slowest
  std::vector<std::vector<double>> points{{}};
  for (const auto& [name, vals] : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& pt : points)
      for (double x : vals) {
        auto q = pt;
        q.push_back(x);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  const std::size_t n = points.size();
  std::vector<Scenario> cells(n, tmpl);
  std::vector<std::string> ids(n);
  for (std::size_t k = 0; k < n; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "cell_%03zu", k);
    ids[k] = buf;
    Scenario& c = cells[k];
    if (c.experiment == Experiment::sweep) c.experiment = tmpl.sweep_experiment;
    c.axes.clear();
    c.name = tmpl.name + "/" + ids[k];
    c.output_dir = (dir / ids[k]).string();
    for (std::size_t a = 0; a < axes.size(); ++a) apply_axis(c, axes[a].first, points[k][a]);
  }

  std::vector<Outcome> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        results[k] = run_scenario(cells[k]);
      } catch (const std::exception& e) {
        results[k].exit_code = 3;
        results[k].error = e.what();
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(threads, unsigned(n)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // merge
  std::vector<std::string> metric_names;
  for (const auto& r : results)
    for (const auto& [k, x] : r.metrics)
      if (std::find(metric_names.begin(), metric_names.end(), k) == metric_names.end()) metric_names.push_back(k);
  Table tab;
  {
    std::vector<double> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = double(k);
    tab.add("cell", idx);
  }
  for (std::size_t a = 0; a < axes.size(); ++a) {
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = points[k][a];
    tab.add(axes[a].first, col);
  }
  {
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = results[k].exit_code;
    tab.add("exit_code", col);
  }
  for (const auto& name : metric_names) {
    std::vector<double> col(n, NAN);
    for (std::size_t k = 0; k < n; ++k)
      for (const auto& [mk, x] : results[k].metrics)
        if (mk == name) col[k] = x;
    tab.add(name, col);
  }
  fs::create_directories(dir);
  write_csv(dir / "sweep.csv", tab);
  out.files.push_back("sweep.csv");

  json sj;
  sj["template"] = to_json(tmpl);
  json ax = json::object();
  for (const auto& [k, v] : axes) ax[k] = v;
  sj["axes"] = ax;
  sj["cells"] = json::array();
  for (std::size_t k = 0; k < n; ++k) {
    json cell = {{"id", ids[k]}, {"exit_code", results[k].exit_code}};
    json at = json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) at[axes[a].first] = points[k][a];
    cell["at"] = at;
    if (!results[k].error.empty()) cell["error"] = results[k].error;
    json failed = json::array();
    for (const auto& a : results[k].assertions)
      if (!a.pass) failed.push_back(a.name);
    cell["failed_assertions"] = failed;
    sj["cells"].push_back(cell);
    out.files.push_back(ids[k] + "/manifest.json");
  }
  out.exit_code = 0;
  for (const auto& r : results)
    if (r.exit_code != 0) out.exit_code = 1;
  // resolution gate: cells that differ only in h must reach the same verdict
  for (std::size_t ha = 0; ha < axes.size(); ++ha) {
    if (axes[ha].first != "h") continue;
    bool agree = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = i + 1; k < n; ++k) {
        bool same = true;
        for (std::size_t a = 0; a < axes.size(); ++a)
          if (a != ha && points[i][a] != points[k][a]) same = false;
        if (same && results[i].exit_code != results[k].exit_code) agree = false;
      }
    sj["resolution_agreement"] = agree;
    out.assertions.push_back({"resolution_agreement", agree, agree ? "verdicts agree across h" : "verdicts differ across h"});
    if (!agree) out.exit_code = 1;
  }
  write_json(dir / "sweep.json", sj);
  out.files.push_back("sweep.json");
  out.verdict = sj;

  Scenario top = tmpl;
  if (top.experiment != Experiment::sweep) {
    top.sweep_experiment = top.experiment;
    top.experiment = Experiment::sweep;
  }
  top.axes = axes;
  write_json(dir / "config.json", to_json(top));
  out.files.insert(out.files.begin(), "config.json");
  write_manifest(top, dir, out);
  return out;
}

std::string report(const fs::path& dir, bool& ok) {
  if (!fs::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
  std::vector<fs::path> manifests;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "manifest.json") manifests.push_back(e.path());
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) throw ConfigError("no manifest.json under " + dir.string());
  ok = true;
  std::ostringstream os;
  for (const auto& mp : manifests) {
    const json m = read_json(mp);
    const int code = m.value("exit_code", 3);
    if (code != 0) ok = false;
    os << fs::relative(mp.parent_path(), dir).string() << "  " << m.value("name", "?") << "  "
       << m.value("experiment", "?") << "  " << m.value("status", "?") << '\n';
    if (m.contains("error")) os << "    error: " << m["error"].get<std::string>() << '\n';
    if (m.contains("assertions"))
      for (const auto& a : m["assertions"])
        os << "    " << (a.value("pass", false) ? "PASS " : "FAIL ") << a.value("name", "") << "  "
           << a.value("detail", "") << '\n';
  }
  return os.str();
}

}  // namespace kinklab
