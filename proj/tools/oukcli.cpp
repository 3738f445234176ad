// Experiment runner: validates a JSON config, executes the named suite and
// writes CSV tables plus a structured summary. Exit status 0 on success, 1 on
// failed suite assertions, 2 on config errors.

#include "ouk/parallel.hpp"
#include "ouk/suites.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"nonautonomous Ornstein-Uhlenbeck transition lab"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;

  auto* run = app.add_subcommand("run", "execute a suite from a config file");
  run->add_option("--config", config_path, "config JSON path")->required();
  run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--workers", workers, "worker threads (never changes results)");
  run->add_option("--out", out_dir, "output directory (overrides config)");

  auto* validate = app.add_subcommand("validate-config", "schema-check a config file");
  validate->add_option("--config", config_path, "config JSON path")->required();

  app.add_subcommand("list-builtins", "print the model/field/source registry");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("list-builtins")) {
    std::cout << ouk::list_builtins();
    return 0;
  }

  nlohmann::json config;
  {
    std::ifstream in(config_path);
    if (!in.good()) {
      std::cerr << "cannot open config: " << config_path << "\n";
      return 2;
    }
    try {
      in >> config;
    } catch (const std::exception& e) {
      std::cerr << "config parse error: " << e.what() << "\n";
      return 2;
    }
  }

  if (app.got_subcommand("validate-config")) {
    try {
      const auto effective = ouk::validate_config(config);
      std::cout << effective.dump(2) << "\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "config invalid: " << e.what() << "\n";
      return 2;
    }
  }

  ouk::set_worker_count(workers);
  if (seed_set) config["seed"] = seed;
  const ouk::RunResult result = ouk::run_suite(config, out_dir);
  for (const auto& f : result.failures) std::cerr << "[FAIL] " << f << "\n";
  if (result.status == 0) std::cout << "[PASS] suite completed: " << result.summary_path << "\n";
  return result.status;
}
