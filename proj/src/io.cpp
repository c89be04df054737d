#include "kinklab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kinklab/errors.hpp"

namespace kinklab {

namespace fs = std::filesystem;

void Table::add(const std::string& name, std::vector<double> col) {
  if (!columns.empty() && col.size() != columns.front().size())
    throw DomainError("table column '" + name + "' has " + std::to_string(col.size()) + " rows, expected " +
                      std::to_string(columns.front().size()));
  names.push_back(name);
  columns.push_back(std::move(col));
}

std::size_t Table::rows() const { return columns.empty() ? 0 : columns.front().size(); }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  // shortest text that reads back to the same double
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_csv(const fs::path& path, const Table& t) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t j = 0; j < t.names.size(); ++j) out << (j ? "," : "") << t.names[j];
  out << '\n';
  const std::size_t n = t.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < t.columns.size(); ++j) out << (j ? "," : "") << format_number(t.columns[j][i]);
    out << '\n';
  }
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      t.names.push_back(cell);
      t.columns.emplace_back();
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t j = 0;
    while (std::getline(ss, cell, ',') && j < t.columns.size()) t.columns[j++].push_back(std::strtod(cell.c_str(), nullptr));
    if (j != t.columns.size()) throw std::runtime_error("ragged row in " + path.string());
  }
  return t;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Table profile_table(const KinkProfile& profile) {
  Table t;
  std::vector<double> x(profile.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = profile.x(i);
  t.add("x", std::move(x));
  t.add("s", profile.s());
  t.add("s_prime", profile.s_prime());
  return t;
}

Table snapshot_table(const FieldState& Y) {
  Table t;
  std::vector<double> x(Y.grid.n);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = Y.grid.x(i);
  t.add("x", std::move(x));
  t.add("psi", Y.psi);
  t.add("pi", Y.pi);
  return t;
}

namespace {
std::vector<double> or_nan(const std::vector<double>& v, std::size_t n) {
  return v.size() == n ? v : std::vector<double>(n, NAN);
}
}  // namespace

Table norms_table(const RunHistory& h) {
  const std::size_t n = h.t.size();
  Table t;
  t.add("t", h.t);
  t.add("E_minus_beta", or_nan(h.E_minus_beta, n));
  t.add("Linf", or_nan(h.Linf, n));
  t.add("W", or_nan(h.W, n));
  t.add("energy", h.energy.size() == n ? h.energy : or_nan(h.hamiltonian, n));
  return t;
}

Table tracking_table(const RunHistory& h) {
  const std::size_t n = h.t.size();
  Table t;
  t.add("t", h.t);
  t.add("b", or_nan(h.b, n));
  t.add("v", or_nan(h.v, n));
  t.add("c", or_nan(h.c, n));
  t.add("cdot", or_nan(h.cdot, n));
  t.add("vdot", or_nan(h.vdot, n));
  t.add("residual_1", or_nan(h.residual1, n));
  t.add("residual_2", or_nan(h.residual2, n));
  return t;
}

Table remainder_table(const AsymptoticsResult& a) {
  Table t;
  t.add("t", a.t);
  t.add("remainder", or_nan(a.remainder, a.t.size()));
  t.add("increment", or_nan(a.increment, a.t.size()));
  return t;
}

Table eigenfunction_table(const Grid& interior, const std::vector<double>& u) {
  if (u.size() != interior.n) throw DomainError("eigenfunction does not match its grid");
  Table t;
  std::vector<double> x(interior.n);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = interior.x(i);
  t.add("x", std::move(x));
  t.add("u", u);
  return t;
}

json to_json(const ConditionReport& r) {
  json j;
  j["pass"] = r.pass();
  json cl = json::object();
  for (const auto& c : r.clauses) cl[c.name] = {{"pass", c.pass}, {"value", c.value}, {"detail", c.detail}};
  j["clauses"] = cl;
  return j;
}

json to_json(const DecayFit& f) {
  return {{"t1", f.t1}, {"t2", f.t2}, {"exponent", f.exponent}, {"intercept", f.intercept},
          {"residual", f.residual}, {"samples", f.samples}};
}

json to_json(const ResonanceResult& r) {
  return {{"verdict", to_string(r.verdict)}, {"wronskian", r.wronskian}, {"x_inf", r.x_inf}, {"threshold", r.threshold}};
}

json to_json(const SpectralReport& r) {
  json j;
  j["v"] = r.v;
  j["m2"] = r.m2;
  j["eigenvalues"] = r.eigenvalues;
  j["eigenvalues_coarse"] = r.eigenvalues_coarse;
  j["eigenvalues_fine"] = r.eigenvalues_fine;
  j["discrete"] = r.discrete;
  j["internal_modes"] = {r.internal_modes_coarse, r.internal_modes_fine};
  j["groundstate_overlap"] = r.groundstate_overlap;
  j["resonance"] = to_json(r.resonance);
  j["zero_present"] = r.zero_present;
  j["u2"] = r.u2;
  j["diagnostics"] = r.diagnostics;
  return j;
}

json to_json(const U2Certificate& c) {
  json j;
  j["pass"] = c.pass;
  j["inconclusive"] = c.inconclusive;
  j["base"] = to_json(c.base);
  j["boosted"] = json::array();
  for (const auto& b : c.boosted) j["boosted"].push_back(to_json(b));
  j["discrepancy"] = c.discrepancy;
  j["diagnostics"] = c.diagnostics;
  return j;
}

json to_json(const RootSpaceReport& r) {
  return {{"v", r.v},
          {"residual_tau1", r.residual_tau1},
          {"residual_tau2", r.residual_tau2},
          {"kernel_norm", r.kernel_norm},
          {"internal_modes", r.internal_modes},
          {"obstruction", r.obstruction},
          {"tangent_ok", r.tangent_ok},
          {"fredholm_ok", r.fredholm_ok},
          {"no_modes", r.no_modes},
          {"pass", r.pass()}};
}

json to_json(const TuningResult& r) {
  json j;
  j["found"] = r.found;
  j["barrier_height"] = r.barrier_height;
  j["candidates"] = json::array();
  for (const auto& c : r.candidates)
    j["candidates"].push_back({{"barrier_height", c.barrier_height},
                               {"constructed", c.constructed},
                               {"certified", c.certified},
                               {"wronskian", c.wronskian},
                               {"v_depth", c.v_depth},
                               {"internal_modes", c.internal_modes},
                               {"note", c.note}});
  if (r.found) {
    j["coarse"] = to_json(r.coarse);
    j["fine"] = to_json(r.fine);
  }
  return j;
}

}  // namespace kinklab
