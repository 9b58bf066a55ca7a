#pragma once

#include <span>
#include <string>
#include <vector>

#include "nam/degree_distribution.hpp"
#include "nam/generator.hpp"
#include "nam/model.hpp"
#include "nam/rng.hpp"

namespace nam {

// Wrong-decision probabilities of isolated neurons under bounded uniform
// internal noise and zero external error: pi0 for constraint neurons,
// p0 for pattern neurons.
struct FlipProbs {
  double pi0 = 0.0;
  double p0 = 0.0;
};
FlipProbs noiseless_flip_probs(double upsilon, double nu, double phi, double psi);

// Upper bound on the probability that a constraint neuron carrying a single
// external error goes silent by mistake. Requires eta >= psi.
double pi1_upper_bound(double nu, double psi, double eta);

// Degree summary of one cluster, input to the analytic single-error chain.
struct ClusterStats {
  int size = 0;
  int rows = 0;
  std::vector<int> degrees;
  double mean_degree = 0.0;

  static ClusterStats from(const Cluster& cluster);
};

// Analytic single-error mistake chain: per-round mistake probabilities of
// non-corrupted (q1) and corrupted (q2) pattern neurons, combined into the
// cluster-level P1 and the single-error correction probability
// Pc1 = (1 - P1)^size.
struct AnalyticP1 {
  double p1 = 0.0;
  double pc1 = 0.0;
  double q1bar = 0.0;
  double q2bar = 0.0;
};
AnalyticP1 analytic_p1(const ClusterStats& stats, double upsilon, double phi, double pi1);

// Monte-Carlo estimate of the probability that a cluster corrects `errors`
// simultaneous +-1 external errors, averaged over all clusters.
struct PciRow {
  double upsilon = 0.0;
  double nu = 0.0;
  int errors = 0;
  long trials = 0;
  double p_ci = 0.0;
  double ci_halfwidth = 0.0;
};
PciRow estimate_pci(const NetworkModel& model, const PatternBasis& basis, int errors,
                    const NoiseSpec& noise, const Thresholds& thresholds,
                    int trials_per_cluster, int t_max, Rng& rng);

struct PciTable {
  std::vector<PciRow> rows;
  std::string to_csv() const;  // upsilon,nu,i,trials,p_ci,ci_halfwidth
};

// One step of the failure-probability recursion over the contracted-graph
// ensemble: Pi = 1 - sum_i pc[i-1] z^(i-1)/(i-1)! rho^(i-1)(1-z), and
// z' = epsilon * lambda(Pi).
double de_recursion_step(double z, double epsilon, const DegreeDistribution& lambda,
                         const DegreeDistribution& rho, std::span<const double> pc);

struct DeResult {
  double epsilon = 0.0;
  std::vector<double> trajectory;  // z(0), z(1), ...
  double final_value = 0.0;
  bool success = false;
  double threshold = -1.0;  // filled by de_threshold when searched

  std::string to_csv() const;  // epsilon,t,z_t
};

DeResult de_trajectory(double epsilon, const DegreeDistribution& lambda,
                       const DegreeDistribution& rho, std::span<const double> pc,
                       double tol = 1e-6, int max_iterations = 1000);

// Largest epsilon (bisection to tol) for which the recursion condition
// epsilon * lambda(Pi(z)) < z holds on a uniform grid of [tol, epsilon].
double de_threshold(const DegreeDistribution& lambda, const DegreeDistribution& rho,
                    std::span<const double> pc, double tol = 1e-6, int grid_size = 10000);

// Sweeps the pattern update threshold and returns the grid argmin of
// P_e1 = 1 - Pc1 (ties toward larger phi) together with the full curve.
struct PhiCurve {
  std::vector<double> phi;
  std::vector<double> pe1;
  double best_phi = 0.0;
  double best_pe1 = 1.0;
};
PhiCurve optimize_threshold_phi(double upsilon, double pi1, const ClusterStats& stats,
                                std::span<const double> phi_grid);

}  // namespace nam
