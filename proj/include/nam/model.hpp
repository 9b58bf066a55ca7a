#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nam/degree_distribution.hpp"

namespace nam {

// One cluster of the memory: a bipartite graph between its member pattern
// neurons and its constraint neurons, with weight matrix w (rows() x size()).
// All stored subpatterns are orthogonal to every row.
struct Cluster {
  int index = 0;
  std::vector<int> member_ids;                 // global pattern-neuron ids
  std::vector<std::vector<double>> w;          // constraint rows
  std::vector<int> pattern_degrees;            // nonzero column counts

  // Adjacency caches, built by finalize().
  struct Entry {
    int index;       // row_support: global neuron id; col_support: row id
    double weight;
  };
  std::vector<std::vector<Entry>> row_support;  // per row: nonzero (global id, weight)
  std::vector<std::vector<Entry>> col_support;  // per member: nonzero (row, weight)

  int rows() const { return static_cast<int>(w.size()); }
  int size() const { return static_cast<int>(member_ids.size()); }

  // Recomputes degrees and adjacency caches from w. Must be called after
  // constructing or mutating the weight matrix.
  void finalize();
};

// Noise levels for a recall run. upsilon/nu are the half-widths of the
// bounded uniform internal noise at pattern/constraint neurons; epsilon and
// magnitude describe the external error process (+-1..+-magnitude symbols).
struct NoiseSpec {
  double upsilon = 0.0;
  double nu = 0.0;
  double epsilon = 0.0;
  int magnitude = 1;  // S

  void validate() const;
};

// Firing thresholds. eta records the minimum nonzero |weight| of the model
// the thresholds are used with; the safe regime requires psi > nu, phi >
// upsilon and eta >= psi.
struct Thresholds {
  double psi = 0.45;
  double phi = 0.9;
  double eta = 0.0;

  bool safe_for(const NoiseSpec& noise) const {
    return psi > noise.nu && phi > noise.upsilon && eta >= psi;
  }
};

struct NetworkModel {
  int n = 0;           // pattern neurons
  int q = 2;           // alphabet size, states in {0..q-1}
  int magnitude = 1;   // external-error amplitude bound S the model tolerates
  double eta = 0.0;    // min nonzero |weight| across all clusters
  std::vector<Cluster> clusters;

  int cluster_count() const { return static_cast<int>(clusters.size()); }

  // Structural invariants: full neuron coverage, no all-zero rows or
  // columns, degree caches consistent, recorded eta matches the weights.
  // Throws std::runtime_error on violation.
  void validate() const;
};

// Contraction of the model: clusters become single nodes, adjacency is
// membership, and lambda/rho are the edge-perspective degree distributions
// of the pattern and cluster sides.
struct ContractedGraph {
  std::vector<std::vector<uint8_t>> adjacency;  // L x n
  DegreeDistribution lambda;
  DegreeDistribution rho;
};

// Result of one recall trial.
struct RecallOutcome {
  std::vector<int> final_state;
  int symbol_errors = 0;
  bool pattern_error = false;
  int outer_iterations = 0;
  bool declared_failure = false;
  std::vector<uint8_t> per_cluster_converged;
};

// Line-oriented text model format. Header "n L Q S eta", then per cluster
// one "m_l n_l" line, one member-id line and m_l weight rows.
void save_model(const NetworkModel& model, std::ostream& out);
void save_model_file(const NetworkModel& model, const std::string& path);
NetworkModel load_model(std::istream& in);
NetworkModel load_model_file(const std::string& path);

// Shortest round-trippable decimal for a double (used by the model format
// and all CSV emitters).
std::string format_double(double value);

}  // namespace nam
