#include "nam/recall.hpp"

#include <cassert>
#include <cmath>

namespace nam {

int constraint_update(double h, double psi) {
  if (h >= psi) return 1;
  if (h >= -psi) return 0;
  return -1;
}

int pattern_update(int x, double g, double phi, int q) {
  if (std::abs(g) >= phi) x -= (g > 0.0) - (g < 0.0);
  if (x < 0) return 0;
  if (x >= q) return q - 1;
  return x;
}

namespace {

double row_sum(const Cluster& cluster, int row, std::span<const int> state) {
  double h = 0.0;
  for (const auto& entry : cluster.row_support[row]) h += entry.weight * state[entry.index];
  return h;
}

}  // namespace

bool intra_cluster_correct(const Cluster& cluster, std::span<int> state,
                           const Thresholds& thresholds, const NoiseSpec& noise, int q,
                           int t_max, Rng& rng, IntraClusterStats* stats) {
  const int m = cluster.rows();
  const int nl = cluster.size();
  std::vector<int> messages(m);
  for (int t = 0; t < t_max; ++t) {
    for (int i = 0; i < m; ++i) {
      double h = row_sum(cluster, i, state);
      if (noise.nu > 0.0) h += rng.uniform_sym(noise.nu);
      messages[i] = constraint_update(h, thresholds.psi);
      if (stats && messages[i] != 0) ++stats->nonzero_messages;
    }
    for (int j = 0; j < nl; ++j) {
      double belief = 0.0;
      for (const auto& entry : cluster.col_support[j])
        belief += (entry.weight > 0 ? 1.0 : -1.0) * messages[entry.index];
      double g = belief / cluster.pattern_degrees[j];
      if (noise.upsilon > 0.0) g += rng.uniform_sym(noise.upsilon);
      int id = cluster.member_ids[j];
      int next = pattern_update(state[id], g, thresholds.phi, q);
      if (next != state[id]) {
        state[id] = next;
        if (stats) ++stats->state_changes;
      }
    }
    if (stats) ++stats->rounds;
  }
  return cluster_satisfied_exact(cluster, state, thresholds);
}

bool cluster_satisfied(const Cluster& cluster, std::span<const int> state,
                       const Thresholds& thresholds, const NoiseSpec& noise, Rng& rng) {
  for (int i = 0; i < cluster.rows(); ++i) {
    double h = row_sum(cluster, i, state);
    if (noise.nu > 0.0) h += rng.uniform_sym(noise.nu);
    if (constraint_update(h, thresholds.psi) != 0) return false;
  }
  return true;
}

bool cluster_satisfied_exact(const Cluster& cluster, std::span<const int> state,
                             const Thresholds& thresholds) {
  for (int i = 0; i < cluster.rows(); ++i)
    if (constraint_update(row_sum(cluster, i, state), thresholds.psi) != 0) return false;
  return true;
}

bool satisfaction_check_reliable(const Thresholds& thresholds, const NoiseSpec& noise) {
  return thresholds.psi > noise.nu;
}

RecallOutcome sequential_peeling(const NetworkModel& model, std::vector<int> initial,
                                 const std::vector<int>& reference,
                                 const Thresholds& thresholds, const NoiseSpec& noise,
                                 const RecallLimits& limits, Rng& rng,
                                 const PeelingObserver& observer) {
  const int L = model.cluster_count();
  RecallOutcome outcome;
  outcome.per_cluster_converged.assign(L, 0);
  std::vector<int>& state = initial;
  std::vector<int> snapshot;

  bool success = false;
  const bool deterministic = noise.upsilon == 0.0 && noise.nu == 0.0;
  for (int round = 1; round <= limits.outer_rounds; ++round) {
    // One sweep of the schedule. Success means a sweep in which every
    // cluster is observed satisfied at its turn; a cluster corrected during
    // the sweep still needs a clean observation in a later sweep, since
    // corrections of overlapping clusters may disturb it again.
    bool any_unsatisfied = false;
    bool state_changed = false;
    for (int l = 0; l < L; ++l) {
      const Cluster& cluster = model.clusters[l];
      if (cluster_satisfied(cluster, state, thresholds, noise, rng)) {
        outcome.per_cluster_converged[l] = 1;
        continue;
      }
      any_unsatisfied = true;
      snapshot.resize(cluster.size());
      for (int j = 0; j < cluster.size(); ++j) snapshot[j] = state[cluster.member_ids[j]];
      intra_cluster_correct(cluster, state, thresholds, noise, model.q,
                            limits.inner_rounds, rng);
      if (cluster_satisfied(cluster, state, thresholds, noise, rng)) {
        outcome.per_cluster_converged[l] = 1;
        for (int j = 0; j < cluster.size(); ++j)
          if (state[cluster.member_ids[j]] != snapshot[j]) {
            state_changed = true;
            break;
          }
      } else {
        for (int j = 0; j < cluster.size(); ++j) state[cluster.member_ids[j]] = snapshot[j];
        outcome.per_cluster_converged[l] = 0;
      }
    }
    outcome.outer_iterations = round;
    if (observer) {
      int exact = 0;
      for (const auto& cluster : model.clusters)
        exact += cluster_satisfied_exact(cluster, state, thresholds) ? 1 : 0;
      observer(round, exact);
    }
    if (!any_unsatisfied) {
      success = true;
      break;
    }
    // Without internal noise a sweep that changed nothing repeats forever;
    // the remaining sweeps are observationally identical, so skip them.
    if (deterministic && !state_changed && !observer) {
      outcome.outer_iterations = limits.outer_rounds;
      break;
    }
  }
  outcome.declared_failure = !success;
  outcome.symbol_errors = 0;
  for (int j = 0; j < model.n; ++j)
    if (state[j] != reference[j]) ++outcome.symbol_errors;
  outcome.pattern_error = outcome.symbol_errors > 0;
  outcome.final_state = std::move(state);
  return outcome;
}

}  // namespace nam
