#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/scenario.hpp"

using namespace kinklab;

namespace {

void print(const Outcome& o) {
  for (const auto& a : o.assertions) std::printf("%s %s  %s\n", a.pass ? "PASS" : "FAIL", a.name.c_str(), a.detail.c_str());
  if (o.verdict.contains("cells"))
    for (const auto& c : o.verdict["cells"])
      std::printf("%s exit %d\n", c["id"].get<std::string>().c_str(), c["exit_code"].get<int>());
  if (!o.error.empty()) std::fprintf(stderr, "kinklab: %s\n", o.error.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinklab: kink stability experiments"};
  app.require_subcommand(1);

  std::string scenario_path;
  auto* run = app.add_subcommand("run", "run one scenario");
  run->add_option("scenario", scenario_path, "scenario JSON")->required();
  std::string out_override;
  run->add_option("-o,--output", out_override, "override output_dir");

  std::string template_path;
  std::vector<std::string> axes;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "run a scenario over a parameter grid");
  sweep->add_option("template", template_path, "scenario JSON")->required();
  sweep->add_option("--axis", axes, "name=v1,v2,... (v0, d0, barrier_height, h)");
  sweep->add_option("-o,--output", sweep_out, "override output_dir");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "summarize the artifacts under a directory");
  rep->add_option("dir", report_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      Scenario s = load_scenario(scenario_path);
      if (!out_override.empty()) s.output_dir = out_override;
      const Outcome o = run_scenario(s);
      print(o);
      return o.exit_code;
    }
    if (*sweep) {
      Scenario s = load_scenario(template_path);
      if (!sweep_out.empty()) s.output_dir = sweep_out;
      std::vector<std::pair<std::string, std::vector<double>>> ax = s.axes;
      for (const auto& a : axes) {
        auto parsed = parse_axis(a);
        bool replaced = false;
        for (auto& e : ax)
          if (e.first == parsed.first) {
            e.second = parsed.second;
            replaced = true;
          }
        if (!replaced) ax.push_back(parsed);
      }
      const Outcome o = run_sweep(s, ax, thread_cap());
      print(o);
      return o.exit_code;
    }
    if (*rep) {
      bool ok = false;
      std::cout << report(report_dir, ok);
      return ok ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "kinklab: config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "kinklab: %s\n", e.what());
    return 3;
  }
  return 0;
}
