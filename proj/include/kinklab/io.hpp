#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kinklab/analysis.hpp"
#include "kinklab/asymptotics.hpp"
#include "kinklab/history.hpp"
#include "kinklab/kink.hpp"
#include "kinklab/potential.hpp"
#include "kinklab/spectral.hpp"

namespace kinklab {

using json = nlohmann::ordered_json;

// Column-major table written as CSV. Numbers are the shortest round-trip form, so a rerun of the same
// scenario reproduces the file byte for byte.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  void add(const std::string& name, std::vector<double> col);
  std::size_t rows() const;
};

std::string format_number(double x);
void write_csv(const std::filesystem::path& path, const Table& t);
Table read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

// x, s, s_prime
Table profile_table(const KinkProfile& profile);
// x, psi, pi
Table snapshot_table(const FieldState& Y);
// t, E_minus_beta, Linf, W, energy (energy is the linear Hamiltonian for linearized runs)
Table norms_table(const RunHistory& h);
// t, b, v, c, cdot, vdot, residual_1, residual_2
Table tracking_table(const RunHistory& h);
// t, remainder, increment
Table remainder_table(const AsymptoticsResult& a);
// x, u
Table eigenfunction_table(const Grid& interior, const std::vector<double>& u);

json to_json(const ConditionReport& r);
json to_json(const DecayFit& f);
json to_json(const ResonanceResult& r);
json to_json(const SpectralReport& r);
json to_json(const U2Certificate& c);
json to_json(const RootSpaceReport& r);
json to_json(const TuningResult& r);

}  // namespace kinklab
