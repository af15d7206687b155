#include <omp.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "peakon/errors.hpp"
#include "peakon/scenarios.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw peakon::ConfigError("config: cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void print_summary(const peakon::ScenarioConfig& cfg, const peakon::ScenarioResult& res) {
  std::cout << "scenario " << cfg.scenario << " (" << cfg.mode << ")\n";
  if (res.report.contains("events")) {
    for (const auto& e : res.report["events"]) std::cout << "  " << e.dump() << '\n';
  }
  if (!res.trajectory.times.empty()) {
    std::cout << "  samples " << res.trajectory.times.size() << ", t_end " << res.trajectory.times.back() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"N-peakon laboratory for the modified Camassa-Holm equation"};
  std::string scenario;
  std::string config_path;
  std::string out_dir;
  std::optional<double> epsilon;
  std::optional<double> t_end;
  std::optional<double> dt;
  std::string mode;
  int jobs = 0;
  bool list = false;

  auto* scen = app.add_option("--scenario", scenario, "built-in scenario name");
  auto* conf = app.add_option("--config", config_path, "JSON scenario config");
  scen->excludes(conf);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--epsilon", epsilon, "mollifier width");
  app.add_option("--t-end", t_end, "final time");
  app.add_option("--dt", dt, "time step");
  app.add_option("--mode", mode, "regularized|sticky|dispersive_limit|ch|meanfield|limit_suite");
  app.add_option("--jobs", jobs, "worker thread bound")->check(CLI::PositiveNumber);
  app.add_flag("--list", list, "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (list) {
    for (const auto& name : peakon::builtin_scenario_names()) std::cout << name << '\n';
    return 0;
  }
  if (jobs > 0) omp_set_num_threads(jobs);

  try {
    peakon::ScenarioConfig cfg;
    if (!config_path.empty()) {
      cfg = peakon::scenario_from_json(slurp(config_path));
    } else if (!scenario.empty()) {
      cfg = peakon::builtin_scenario(scenario);
    } else {
      throw peakon::ConfigError("one of --scenario or --config is required");
    }
    if (epsilon) cfg.epsilon = *epsilon;
    if (t_end) cfg.t_end = *t_end;
    if (dt) cfg.dt = *dt;
    if (!mode.empty()) cfg.mode = mode;
    cfg.validate();

    const auto res = peakon::run_scenario(cfg, out_dir);
    print_summary(cfg, res);
    if (out_dir.empty()) std::cout << res.report.dump(2) << '\n';
    return 0;
  } catch (const peakon::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const peakon::NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
