#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nam/model.hpp"
#include "nam/rng.hpp"

namespace nam {

// Constraint neuron transfer: +1 if h >= psi, 0 if -psi <= h <= psi,
// -1 otherwise. The h = +psi boundary fires (first case wins), h = -psi
// stays silent.
int constraint_update(double h, double psi);

// Pattern neuron transfer: x - sign(g) when |g| >= phi, else x, saturated
// into [0, q-1].
int pattern_update(int x, double g, double phi, int q);

struct IntraClusterStats {
  long state_changes = 0;
  long nonzero_messages = 0;
  long rounds = 0;
};

// Runs t_max forward/backward rounds of the intra-cluster error correction
// on the cluster's slice of the global state. Internal noise is redrawn per
// round per neuron. Returns true iff a final noiseless syndrome check passes.
bool intra_cluster_correct(const Cluster& cluster, std::span<int> state,
                           const Thresholds& thresholds, const NoiseSpec& noise, int q,
                           int t_max, Rng& rng, IntraClusterStats* stats = nullptr);

// One fresh noisy forward pass; true iff every constraint outputs 0.
// Reliable only in the safe regime psi > nu (see satisfaction_check_reliable).
bool cluster_satisfied(const Cluster& cluster, std::span<const int> state,
                       const Thresholds& thresholds, const NoiseSpec& noise, Rng& rng);

// Noiseless variant used for convergence ground truth and tests.
bool cluster_satisfied_exact(const Cluster& cluster, std::span<const int> state,
                             const Thresholds& thresholds);

bool satisfaction_check_reliable(const Thresholds& thresholds, const NoiseSpec& noise);

struct RecallLimits {
  int inner_rounds = 10;  // t_max of the intra-cluster loop
  int outer_rounds = 40;  // peeling schedule cap
};

// Called after each outer round with (round, count of clusters whose exact
// noiseless syndrome is satisfied). Test hook for the no-harm property.
using PeelingObserver = std::function<void(int round, int exact_satisfied)>;

// Sequential peeling: round-robin over clusters, correcting unsatisfied ones
// and reverting their members when correction fails to satisfy them.
// `reference` is the uncorrupted pattern used to fill the error counts.
RecallOutcome sequential_peeling(const NetworkModel& model, std::vector<int> initial,
                                 const std::vector<int>& reference,
                                 const Thresholds& thresholds, const NoiseSpec& noise,
                                 const RecallLimits& limits, Rng& rng,
                                 const PeelingObserver& observer = nullptr);

}  // namespace nam
