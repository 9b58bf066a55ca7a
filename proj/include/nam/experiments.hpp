#pragma once

#include <map>
#include <string>
#include <vector>

#include "nam/analysis.hpp"
#include "nam/generator.hpp"
#include "nam/model.hpp"
#include "nam/recall.hpp"

namespace nam {

enum class ExperimentKind {
  SerSweep,
  IterationSweep,
  PciGrid,
  DeCompare,
  NoExternalNoise,
  StoppingSetDemo,
  LargerAlphabet,
};

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);

// Flat dotted-key experiment configuration. The manifest emitted by a run is
// itself a valid config file that reproduces the run byte-for-byte.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SerSweep;
  uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "out";
  int trials = 2000;

  GeneratorSpec generator;
  double psi = 0.45;
  double phi = 0.9;
  std::vector<double> epsilon_grid;
  std::vector<double> upsilon_grid;
  std::vector<double> nu_grid;
  int error_magnitude = 1;
  RecallLimits limits;

  int pci_max_errors = 4;
  int pci_trials_per_cluster = 40;

  int stopping_sets = 20;
  int stopping_restarts = 50;
  int stopping_groups = 4;             // corrupted neuron groups per set
  int stopping_errors_per_group = 2;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_string(const std::string& text);
  std::map<std::string, std::string> to_map() const;
  void validate() const;
};

struct RunResult {
  std::string out_dir;
  std::string model_hash;
  std::vector<std::string> files;  // paths written, manifest first
};

// Builds (or reuses) the model, runs the configured experiment across the
// worker pool and writes CSV outputs plus a manifest into cfg.out_dir.
// Aggregation is integer-exact, so output bytes do not depend on the worker
// count.
RunResult run_experiment(const ExperimentConfig& cfg);

// 64-bit FNV-1a, used to fingerprint the model file in the manifest.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace nam
