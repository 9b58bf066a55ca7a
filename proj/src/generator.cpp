#include "nam/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "nam/errors.hpp"

namespace nam {

namespace {

struct Segment {
  int start = 0;            // global id of first neuron
  int size = 0;
  std::vector<int> free_pos;   // global ids carrying basis coefficients
  std::vector<int> pivot_pos;  // global ids owned by the segment's dual vectors
  std::vector<std::vector<uint8_t>> incidence;  // duals x free, {0,1}
};

// Balanced cyclic {0,1} incidence with the requested total weight. Rows are
// the segment's dual vectors, columns its basis features.
std::vector<std::vector<uint8_t>> build_incidence(int rows, int cols, int row_weight, Rng& rng) {
  std::vector<std::vector<uint8_t>> inc(rows, std::vector<uint8_t>(cols, 0));
  const int total = rows * std::min(row_weight, cols);
  for (int t = 0; t < cols; ++t) {
    int weight = total / cols + (t < total % cols ? 1 : 0);
    weight = std::clamp(weight, 1, rows);
    for (int i = 0; i < weight; ++i) inc[(t + i) % rows][t] = 1;
  }
  // Random relabeling keeps the balanced weights but varies the supports.
  std::vector<int> row_perm(rows), col_perm(cols);
  std::iota(row_perm.begin(), row_perm.end(), 0);
  std::iota(col_perm.begin(), col_perm.end(), 0);
  rng.shuffle(row_perm);
  rng.shuffle(col_perm);
  std::vector<std::vector<uint8_t>> out(rows, std::vector<uint8_t>(cols, 0));
  for (int i = 0; i < rows; ++i)
    for (int t = 0; t < cols; ++t) out[row_perm[i]][col_perm[t]] = inc[i][t];
  return out;
}

// Apportion per-segment basis dimensions so they sum to k_target exactly,
// honoring 1 <= c_s <= size_s - 1.
std::vector<int> apportion_dimensions(const std::vector<int>& sizes, double ratio, int k_target) {
  const int count = static_cast<int>(sizes.size());
  std::vector<int> dims(count);
  int total = 0;
  for (int s = 0; s < count; ++s) {
    dims[s] = std::clamp(static_cast<int>(std::floor(ratio * sizes[s])), 1, sizes[s] - 1);
    total += dims[s];
  }
  int step = total < k_target ? 1 : -1;
  int guard = 0;
  while (total != k_target) {
    bool moved = false;
    for (int s = 0; s < count && total != k_target; ++s) {
      int next = dims[s] + step;
      if (next >= 1 && next <= sizes[s] - 1) {
        dims[s] = next;
        total += step;
        moved = true;
      }
    }
    if (!moved || ++guard > 4 * count)
      throw InfeasibleSpecError("generator: cannot reach requested subspace dimension");
  }
  return dims;
}

int rank_of(std::vector<std::vector<double>> m) {
  const int rows = static_cast<int>(m.size());
  if (rows == 0) return 0;
  const int cols = static_cast<int>(m[0].size());
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int pivot = -1;
    double best = 1e-9;
    for (int r = rank; r < rows; ++r)
      if (std::abs(m[r][col]) > best) {
        best = std::abs(m[r][col]);
        pivot = r;
      }
    if (pivot < 0) continue;
    std::swap(m[rank], m[pivot]);
    for (int r = rank + 1; r < rows; ++r) {
      double f = m[r][col] / m[rank][col];
      for (int cc = col; cc < cols; ++cc) m[r][cc] -= f * m[rank][cc];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (n < 2) throw ConfigError("generator: n must be >= 2");
  if (clusters < 1 || clusters > n / 2)
    throw ConfigError("generator: cluster count must be in [1, n/2]");
  if (subspace_ratio <= 0.0 || subspace_ratio >= 1.0)
    throw ConfigError("generator: subspace ratio must be in (0,1)");
  if (mean_cluster_size * clusters < n)
    throw ConfigError("generator: mean_cluster_size * clusters must cover all n neurons");
  if (mean_constraints <= 0.0) throw ConfigError("generator: mean_constraints must be positive");
  if (alphabet < 2) throw ConfigError("generator: alphabet must be >= 2");
  if (dual_weight < 2) throw ConfigError("generator: dual_weight must be >= 2");
  if (row_span < 0.0 || row_span > 1.0) throw ConfigError("generator: row_span must be in [0,1]");
  if (mean_overlap < 0.0) throw ConfigError("generator: mean_overlap must be >= 0");
}

std::vector<int> PatternBasis::pattern_from_coeffs(const std::vector<int>& coeffs) const {
  std::vector<int> x(n, 0);
  for (int t = 0; t < rank; ++t) {
    if (coeffs[t] == 0) continue;
    for (int j = 0; j < n; ++j) x[j] += coeffs[t] * vectors[t][j];
  }
  return x;
}

std::vector<int> PatternBasis::sample(Rng& rng) const {
  std::vector<int> coeffs(rank);
  for (int t = 0; t < rank; ++t) coeffs[t] = rng.below_int(coeff_max + 1);
  return pattern_from_coeffs(coeffs);
}

std::pair<NetworkModel, PatternBasis> construct_subspace_model(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int n = spec.n;
  const int L = spec.clusters;

  // Segmentation of the neuron ring.
  std::vector<int> seg_sizes(L, n / L);
  for (int s = 0; s < n % L; ++s) ++seg_sizes[s];
  const int k_target = static_cast<int>(std::floor(spec.subspace_ratio * n));
  if (k_target < L || k_target > n - L)
    throw InfeasibleSpecError("generator: subspace ratio incompatible with cluster count");
  std::vector<int> seg_dims = apportion_dimensions(seg_sizes, spec.subspace_ratio, k_target);

  std::vector<Segment> segments(L);
  int offset = 0;
  for (int s = 0; s < L; ++s) {
    Segment& seg = segments[s];
    seg.start = offset;
    seg.size = seg_sizes[s];
    offset += seg.size;
    std::vector<int> ids(seg.size);
    std::iota(ids.begin(), ids.end(), seg.start);
    rng.shuffle(ids);
    const int c = seg_dims[s];
    seg.free_pos.assign(ids.begin(), ids.begin() + c);
    seg.pivot_pos.assign(ids.begin() + c, ids.end());
    seg.incidence = build_incidence(seg.size - c, c, spec.dual_weight - 1, rng);
  }

  // Scale so that every {0,1}-combination stays inside the alphabet.
  int max_row_weight = 1;
  for (const auto& seg : segments)
    for (const auto& row : seg.incidence)
      max_row_weight = std::max(
          max_row_weight, static_cast<int>(std::count(row.begin(), row.end(), uint8_t{1})));
  const int scale = (spec.alphabet - 1) / max_row_weight;
  if (scale < 1)
    throw InfeasibleSpecError("generator: alphabet too small for the dual weight; raise Q");

  // Cluster windows over the segment ring, then a repair pass so every
  // segment (hence every neuron) lands in at least one cluster.
  const double mean_seg = static_cast<double>(n) / L;
  int window = spec.mean_overlap > 0.0
                   ? static_cast<int>(std::lround(spec.mean_overlap))
                   : static_cast<int>(std::lround(spec.mean_cluster_size / mean_seg));
  window = std::clamp(window, 1, L);
  const double implied_size = window * mean_seg;
  if (std::abs(implied_size - spec.mean_cluster_size) > 0.3 * spec.mean_cluster_size)
    throw InfeasibleSpecError("generator: mean_cluster_size inconsistent with n, L and overlap");
  const double implied_constraints = implied_size * (1.0 - spec.subspace_ratio);
  if (std::abs(implied_constraints - spec.mean_constraints) > 0.3 * spec.mean_constraints)
    throw InfeasibleSpecError("generator: mean_constraints inconsistent with subspace ratio");

  std::vector<std::vector<int>> cluster_segments(L);
  std::vector<int> coverage(L, 0);
  for (int l = 0; l < L; ++l) {
    int start = rng.below_int(L);
    for (int i = 0; i < window; ++i) {
      int s = (start + i) % L;
      cluster_segments[l].push_back(s);
      ++coverage[s];
    }
  }
  for (int s = 0; s < L; ++s) {
    if (coverage[s] > 0) continue;
    int best = 0, best_dist = L + 1;
    for (int l = 0; l < L; ++l)
      for (int covered : cluster_segments[l]) {
        int d = std::abs(covered - s);
        d = std::min(d, L - d);
        if (d < best_dist) {
          best_dist = d;
          best = l;
        }
      }
    cluster_segments[best].push_back(s);
    ++coverage[s];
  }

  NetworkModel model;
  model.n = n;
  model.q = spec.alphabet;
  model.magnitude = std::max(1, scale - 1);
  model.clusters.resize(L);
  double min_weight = 1.0;

  static const double kMixCoeffs[4] = {-1.0, -0.5, 0.5, 1.0};

  for (int l = 0; l < L; ++l) {
    Cluster& cluster = model.clusters[l];
    cluster.index = l;
    std::vector<int>& segs = cluster_segments[l];
    std::sort(segs.begin(), segs.end());
    for (int s : segs)
      for (int id = segments[s].start; id < segments[s].start + segments[s].size; ++id)
        cluster.member_ids.push_back(id);
    std::sort(cluster.member_ids.begin(), cluster.member_ids.end());
    std::vector<int> local(n, -1);
    for (int j = 0; j < cluster.size(); ++j) local[cluster.member_ids[j]] = j;

    // Dual index bookkeeping: (segment, dual j) -> flat index within cluster.
    std::vector<std::pair<int, int>> duals;
    std::vector<int> seg_first;
    for (int s : segs) {
      seg_first.push_back(static_cast<int>(duals.size()));
      for (int j = 0; j < static_cast<int>(segments[s].incidence.size()); ++j)
        duals.emplace_back(s, j);
    }
    const int m = static_cast<int>(duals.size());

    // Each constraint row is an independent sparse combination of the
    // segment dual bases. Reusing whole base duals across rows would tie
    // a pivot neuron's messages rigidly to its dual's support and trap the
    // bit-flipping dynamics in two-cycles, so coefficients are drawn per
    // row per dual.
    std::vector<std::vector<double>> best_w;
    int best_min_degree = -1;
    for (int attempt = 0; attempt < 64; ++attempt) {
      // Deal each segment's duals to rows under a usage quota: balanced
      // degrees keep every member well connected, which the bit-flipping
      // dynamics need.
      std::vector<std::vector<double>> mix(m, std::vector<double>(m, 0.0));
      std::vector<int> uses(m, 0);
      for (int r = 0; r < m; ++r) {
        bool nonzero = false;
        while (!nonzero) {
          for (size_t si = 0; si < segs.size(); ++si) {
            if (spec.row_span < 1.0 && rng.uniform() >= spec.row_span) continue;
            int count = static_cast<int>(segments[segs[si]].incidence.size());
            int take = (count + 1) / 2;
            std::vector<std::pair<uint64_t, int>> order;
            for (int j = 0; j < count; ++j) {
              int d = seg_first[si] + j;
              order.emplace_back((static_cast<uint64_t>(uses[d]) << 32) | (rng.next() & 0xffffffffu), d);
            }
            std::sort(order.begin(), order.end());
            for (int pick = 0; pick < take; ++pick) {
              int d = order[pick].second;
              mix[r][d] = kMixCoeffs[rng.below_int(4)];
              ++uses[d];
              nonzero = true;
            }
          }
        }
      }
      if (rank_of(mix) < m) continue;

      std::vector<std::vector<double>> w(m, std::vector<double>(cluster.size(), 0.0));
      for (int r = 0; r < m; ++r) {
        for (int d = 0; d < m; ++d) {
          double coeff = mix[r][d];
          if (coeff == 0.0) continue;
          const Segment& seg = segments[duals[d].first];
          int j = duals[d].second;
          w[r][local[seg.pivot_pos[j]]] += coeff;
          for (int t = 0; t < static_cast<int>(seg.free_pos.size()); ++t)
            if (seg.incidence[j][t]) w[r][local[seg.free_pos[t]]] -= coeff;
        }
      }
      // Collisions can zero an entry; keep the attempt with the healthiest
      // minimum member degree (low-degree members are mischief-prone).
      std::vector<int> degrees(cluster.size(), 0);
      bool zero_row = false;
      for (int r = 0; r < m; ++r) {
        int weight = 0;
        for (int j = 0; j < cluster.size(); ++j)
          if (w[r][j] != 0.0) {
            ++degrees[j];
            ++weight;
          }
        if (weight == 0) zero_row = true;
      }
      if (zero_row) continue;
      int min_degree = *std::min_element(degrees.begin(), degrees.end());
      if (min_degree > best_min_degree) {
        best_min_degree = min_degree;
        best_w = std::move(w);
      }
      if (best_min_degree >= std::min(3, std::max(1, m / 4))) break;
    }
    if (best_min_degree < 1)
      throw InfeasibleSpecError("generator: could not build a full-rank cluster");
    cluster.w = std::move(best_w);
    cluster.finalize();
    for (const auto& row : cluster.row_support)
      for (const auto& entry : row) min_weight = std::min(min_weight, std::abs(entry.weight));
  }
  model.eta = min_weight;
  model.validate();

  // Basis: one scaled feature per (segment, coefficient slot).
  PatternBasis basis;
  basis.n = n;
  basis.rank = k_target;
  basis.scale = scale;
  basis.coeff_max = 1;
  for (const auto& seg : segments) {
    for (int t = 0; t < static_cast<int>(seg.free_pos.size()); ++t) {
      std::vector<int> v(n, 0);
      v[seg.free_pos[t]] = scale;
      for (int j = 0; j < static_cast<int>(seg.incidence.size()); ++j)
        if (seg.incidence[j][t]) v[seg.pivot_pos[j]] += scale;
      basis.vectors.push_back(std::move(v));
    }
  }

  // Every basis vector is itself a valid pattern; check range and syndromes.
  for (const auto& v : basis.vectors) {
    for (int value : v)
      if (value < 0 || value >= spec.alphabet)
        throw InfeasibleSpecError("generator: basis leaves the alphabet range");
    for (const auto& cluster : model.clusters) {
      for (int i = 0; i < cluster.rows(); ++i) {
        double h = 0.0;
        for (const auto& entry : cluster.row_support[i]) h += entry.weight * v[entry.index];
        if (std::abs(h) > 1e-12)
          throw InfeasibleSpecError("generator: basis vector violates a constraint");
      }
    }
  }
  return {std::move(model), std::move(basis)};
}

ContractedGraph contract_and_degree_distributions(const NetworkModel& model) {
  ContractedGraph graph;
  graph.adjacency.assign(model.cluster_count(), std::vector<uint8_t>(model.n, 0));
  std::vector<int> pattern_degree(model.n, 0);
  std::vector<int> cluster_degree;
  for (int l = 0; l < model.cluster_count(); ++l) {
    for (int id : model.clusters[l].member_ids) {
      graph.adjacency[l][id] = 1;
      ++pattern_degree[id];
    }
    cluster_degree.push_back(model.clusters[l].size());
  }
  graph.lambda = DegreeDistribution::from_node_degrees(pattern_degree);
  graph.rho = DegreeDistribution::from_node_degrees(cluster_degree);
  return graph;
}

std::vector<int> sample_external_error(int n, const NoiseSpec& noise, Rng& rng) {
  noise.validate();
  std::vector<int> z(n, 0);
  for (int j = 0; j < n; ++j) {
    if (rng.uniform() >= noise.epsilon) continue;
    if (noise.magnitude == 1) {
      z[j] = rng.coin() ? 1 : -1;
    } else {
      int v = 1 + rng.below_int(noise.magnitude);
      z[j] = rng.coin() ? v : -v;
    }
  }
  return z;
}

std::pair<std::vector<std::vector<double>>, LearnReport> learn_dual_vectors(
    const std::vector<std::vector<double>>& patterns, int dimension, int rows,
    const LearnOptions& options) {
  if (patterns.empty()) throw ConfigError("learn_dual_vectors: no training patterns");
  if (options.step <= 0.0 || options.max_iterations < 1 || options.tolerance <= 0.0)
    throw ConfigError("learn_dual_vectors: options must be positive");
  Rng rng(options.seed);
  std::vector<std::vector<double>> w_rows;
  LearnReport report;
  report.converged = true;

  auto residual = [&](const std::vector<double>& w) {
    double worst = 0.0;
    for (const auto& x : patterns) {
      double dot = 0.0;
      for (int j = 0; j < dimension; ++j) dot += w[j] * x[j];
      worst = std::max(worst, std::abs(dot));
    }
    return worst;
  };

  for (int r = 0; r < rows; ++r) {
    std::vector<double> w(dimension);
    bool row_done = false;
    for (int restart = 0; restart < 8 && !row_done; ++restart) {
      for (double& v : w) v = rng.uniform(-1.0, 1.0);
      for (int it = 0; it < options.max_iterations; ++it) {
        const auto& x = patterns[rng.below(patterns.size())];
        double dot = 0.0, norm2 = 0.0;
        for (int j = 0; j < dimension; ++j) {
          dot += w[j] * x[j];
          norm2 += x[j] * x[j];
        }
        if (norm2 > 0.0)
          for (int j = 0; j < dimension; ++j) w[j] -= options.step * dot / norm2 * x[j];
        for (const auto& prev : w_rows) {
          double proj = 0.0, pn = 0.0;
          for (int j = 0; j < dimension; ++j) {
            proj += w[j] * prev[j];
            pn += prev[j] * prev[j];
          }
          for (int j = 0; j < dimension; ++j) w[j] -= proj / pn * prev[j];
        }
        if (options.sparsity_weight > 0.0) {
          double shrink = options.step * options.sparsity_weight / dimension;
          for (double& v : w) {
            double mag = std::abs(v) - shrink;
            v = mag > 0.0 ? (v > 0 ? mag : -mag) : 0.0;
          }
        }
        double max_mag = 0.0;
        for (double v : w) max_mag = std::max(max_mag, std::abs(v));
        if (max_mag < 1e-9) break;  // collapsed row; restart with new init
        for (double& v : w) v /= max_mag;
        if ((it & 63) == 0 && residual(w) <= options.tolerance) break;
      }
      double max_mag = 0.0;
      for (double v : w) max_mag = std::max(max_mag, std::abs(v));
      if (max_mag >= 1e-9) row_done = true;
    }

    // Prune near-zero entries when doing so keeps the row orthogonal.
    std::vector<double> pruned = w;
    for (double& v : pruned)
      if (std::abs(v) < 0.02) v = 0.0;
    if (residual(pruned) <= options.tolerance) w = pruned;

    double res = residual(w);
    if (res > options.tolerance) report.converged = false;
    if (options.min_weight > 0.0) {
      double min_nz = 0.0;
      for (double v : w)
        if (v != 0.0) min_nz = (min_nz == 0.0) ? std::abs(v) : std::min(min_nz, std::abs(v));
      if (min_nz > 0.0 && min_nz < options.min_weight) {
        double f = options.min_weight / min_nz;
        for (double& v : w) v *= f;
        res *= f;
      }
    }
    report.residuals.push_back(res);
    w_rows.push_back(std::move(w));
  }
  return {std::move(w_rows), std::move(report)};
}

}  // namespace nam
