#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nam/errors.hpp"
#include "nam/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nam: clustered associative memory simulator and analysis toolkit"};
  std::string config_path;
  std::string experiment_override;
  std::string out_override;
  long long seed_override = -1;
  int workers_override = 0;
  app.add_option("--config", config_path, "experiment config file")->required();
  app.add_option("--experiment", experiment_override,
                 "override the experiment kind from the config");
  app.add_option("--seed", seed_override, "override the master seed");
  app.add_option("--workers", workers_override, "override the worker count");
  app.add_option("--out", out_override, "override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    nam::ExperimentConfig cfg = nam::ExperimentConfig::from_file(config_path);
    if (!experiment_override.empty()) cfg.kind = nam::kind_from_name(experiment_override);
    if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
    if (workers_override > 0) cfg.workers = workers_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    cfg.validate();

    nam::RunResult result = nam::run_experiment(cfg);
    std::cout << "experiment: " << nam::kind_name(cfg.kind) << "\n"
              << "model hash: " << result.model_hash << "\n";
    for (const auto& file : result.files) std::cout << "wrote " << file << "\n";
    return 0;
  } catch (const nam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const nam::InfeasibleSpecError& e) {
    std::cerr << "infeasible generator spec: " << e.what() << "\n";
    return 2;
  } catch (const nam::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
