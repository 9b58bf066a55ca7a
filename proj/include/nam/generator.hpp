#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "nam/model.hpp"
#include "nam/rng.hpp"

namespace nam {

struct GeneratorSpec {
  int n = 400;
  int clusters = 50;                // L
  double mean_cluster_size = 40.0;  // pattern neurons per cluster
  double mean_constraints = 20.0;   // constraint neurons per cluster
  double subspace_ratio = 0.5;      // r, per-cluster dimension k_l ~ r * n_l
  int alphabet = 16;                // Q
  double mean_overlap = 0.0;        // clusters per pattern neuron; 0 = derive
  int dual_weight = 4;              // sparsity target: support of a base dual vector
  double row_span = 1.0;            // fraction of other segments a constraint row mixes in
  uint64_t seed = 1;

  void validate() const;
};

// Integer basis of the admissible pattern space. Every {0,1}-coefficient
// combination of the (already scaled) basis vectors is a valid pattern:
// entries stay inside {0..Q-1} and all cluster syndromes are zero.
struct PatternBasis {
  int n = 0;
  int rank = 0;
  int scale = 1;          // basis vectors carry this factor
  int coeff_max = 1;      // coefficients range over {0..coeff_max}
  std::vector<std::vector<int>> vectors;  // rank x n, nonnegative

  std::vector<int> pattern_from_coeffs(const std::vector<int>& coeffs) const;
  std::vector<int> sample(Rng& rng) const;
};

// Builds a clustered network whose subpatterns lie in known low-dimensional
// subspaces, together with the basis of valid patterns. Deterministic given
// spec.seed. Throws InfeasibleSpecError when the spec cannot be realized.
std::pair<NetworkModel, PatternBasis> construct_subspace_model(const GeneratorSpec& spec);

// Contracted graph and edge-perspective degree distributions of a model.
ContractedGraph contract_and_degree_distributions(const NetworkModel& model);

// i.i.d. external error vector: each entry is 0 with probability 1-epsilon,
// otherwise uniform over {-S..S}\{0}.
std::vector<int> sample_external_error(int n, const NoiseSpec& noise, Rng& rng);

// Iterative dual-vector learning (alternative to the direct construction):
// fits rows orthogonal to the given training subpatterns under a sparsity
// penalty. Reports per-row residuals instead of failing silently.
struct LearnOptions {
  double sparsity_weight = 0.0;
  double step = 0.1;
  int max_iterations = 20000;
  double tolerance = 1e-6;
  double min_weight = 0.0;   // rescale rows so min nonzero >= this, when nonzero
  uint64_t seed = 1;
};

struct LearnReport {
  bool converged = false;
  std::vector<double> residuals;  // max |w . x| per row over the training set
};

std::pair<std::vector<std::vector<double>>, LearnReport> learn_dual_vectors(
    const std::vector<std::vector<double>>& patterns, int dimension, int rows,
    const LearnOptions& options);

}  // namespace nam
