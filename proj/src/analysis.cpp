#include "nam/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nam/recall.hpp"

namespace nam {

namespace {

constexpr int kExactBinomialLimit = 64;

// P(X = k) for X ~ Binomial(n, p); exact in log space up to
// kExactBinomialLimit, normal approximation above.
std::vector<double> binomial_weights(int n, double p) {
  std::vector<double> w(n + 1, 0.0);
  if (p <= 0.0) {
    w[0] = 1.0;
    return w;
  }
  if (p >= 1.0) {
    w[n] = 1.0;
    return w;
  }
  if (n <= kExactBinomialLimit) {
    double lp = std::log(p), lq = std::log1p(-p);
    for (int k = 0; k <= n; ++k) {
      double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      w[k] = std::exp(lc + k * lp + (n - k) * lq);
    }
  } else {
    double mu = n * p, sigma = std::sqrt(n * p * (1.0 - p));
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
      double t = (k - mu) / sigma;
      w[k] = std::exp(-0.5 * t * t);
      total += w[k];
    }
    for (double& v : w) v /= total;
  }
  return w;
}

// Mistake probability of a non-corrupted pattern neuron given the signed
// constraint-message sum o and its degree d: the four-case rule for
// Pr(|o/d + u| >= phi), u ~ Uniform[-upsilon, upsilon].
double q1_given(double o, double d, double upsilon, double phi) {
  if (upsilon <= 0.0) return std::abs(o / d) >= phi ? 1.0 : 0.0;
  double q;
  if (std::abs(o) >= (upsilon + phi) * d) {
    q = 1.0;
  } else if (std::abs(o) <= std::abs(upsilon - phi) * d) {
    q = std::max(0.0, (upsilon - phi) / upsilon);
  } else if (std::abs(o - phi * d) <= upsilon * d) {
    q = (upsilon - (phi - o / d)) / (2.0 * upsilon);
  } else if (std::abs(o + phi * d) <= upsilon * d) {
    q = (upsilon - (phi + o / d)) / (2.0 * upsilon);
  } else {
    q = 0.0;
  }
  return std::clamp(q, 0.0, 1.0);
}

// Mistake probability of the corrupted neuron when j of its d1 constraints
// went silent: the three-case rule for Pr((d1-j)/d1 + u < phi).
double q2_given(int j, double d1, double upsilon, double phi) {
  if (upsilon <= 0.0) return (d1 - j) / d1 < phi ? 1.0 : 0.0;
  double q;
  if (j >= (1.0 + upsilon - phi) * d1) {
    q = 1.0;
  } else if (j <= (1.0 - upsilon - phi) * d1) {
    q = std::max(0.0, (upsilon - phi) / upsilon);
  } else {
    q = (upsilon + phi - (d1 - j) / d1) / (2.0 * upsilon);
  }
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace

FlipProbs noiseless_flip_probs(double upsilon, double nu, double phi, double psi) {
  if (phi <= 0.0 || psi <= 0.0) throw std::invalid_argument("thresholds must be positive");
  FlipProbs probs;
  probs.pi0 = nu > 0.0 ? std::max(0.0, (nu - psi) / nu) : 0.0;
  probs.p0 = upsilon > 0.0 ? std::max(0.0, (upsilon - phi) / upsilon) : 0.0;
  return probs;
}

double pi1_upper_bound(double nu, double psi, double eta) {
  if (psi <= 0.0) throw std::invalid_argument("pi1_upper_bound: psi must be positive");
  if (eta < psi) throw std::invalid_argument("pi1_upper_bound: invalid regime, eta < psi");
  if (nu <= 0.0) return 0.0;
  return std::max(0.0, (nu - (eta - psi)) / (2.0 * nu));
}

ClusterStats ClusterStats::from(const Cluster& cluster) {
  ClusterStats stats;
  stats.size = cluster.size();
  stats.rows = cluster.rows();
  stats.degrees = cluster.pattern_degrees;
  stats.mean_degree =
      std::accumulate(stats.degrees.begin(), stats.degrees.end(), 0.0) / stats.size;
  return stats;
}

AnalyticP1 analytic_p1(const ClusterStats& stats, double upsilon, double phi, double pi1) {
  if (pi1 < 0.0 || pi1 > 1.0) throw std::invalid_argument("analytic_p1: pi1 outside [0,1]");
  const double share = stats.rows > 0 ? std::clamp(stats.mean_degree / stats.rows, 0.0, 1.0) : 0.0;

  // q1 averaged over e ~ Bin(b_c, 1/2), b_c ~ Bin(b, 1-pi1), b ~ Bin(d, share).
  auto q1_of_degree = [&](int d) {
    double q = 0.0;
    const auto wb = binomial_weights(d, share);
    for (int b = 0; b <= d; ++b) {
      if (wb[b] == 0.0) continue;
      const auto wbc = binomial_weights(b, 1.0 - pi1);
      double inner_b = 0.0;
      for (int bc = 0; bc <= b; ++bc) {
        if (wbc[bc] == 0.0) continue;
        const auto we = binomial_weights(bc, 0.5);
        double inner_e = 0.0;
        for (int e = 0; e <= bc; ++e)
          inner_e += we[e] * q1_given(2.0 * e - bc, d, upsilon, phi);
        inner_b += wbc[bc] * inner_e;
      }
      q += wb[b] * inner_b;
    }
    return q;
  };

  // q2 averaged over j ~ Bin(d1, pi1) silent constraints.
  auto q2_of_degree = [&](int d1) {
    const auto wj = binomial_weights(d1, pi1);
    double q = 0.0;
    for (int j = 0; j <= d1; ++j)
      if (wj[j] > 0.0) q += wj[j] * q2_given(j, d1, upsilon, phi);
    return q;
  };

  AnalyticP1 out;
  for (int d : stats.degrees) {
    out.q1bar += q1_of_degree(d);
    out.q2bar += q2_of_degree(d);
  }
  out.q1bar /= stats.size;
  out.q2bar /= stats.size;
  double n = stats.size;
  out.p1 = out.q2bar / n + (n - 1.0) / n * out.q1bar;
  out.pc1 = std::pow(1.0 - out.p1, n);
  return out;
}

PciRow estimate_pci(const NetworkModel& model, const PatternBasis& basis, int errors,
                    const NoiseSpec& noise, const Thresholds& thresholds,
                    int trials_per_cluster, int t_max, Rng& rng) {
  if (trials_per_cluster < 1) throw std::invalid_argument("estimate_pci: trials must be >= 1");
  if (errors < 1) throw std::invalid_argument("estimate_pci: errors must be >= 1");
  long successes = 0;
  long total = 0;
  std::vector<int> state;
  std::vector<int> picks;
  for (const auto& cluster : model.clusters) {
    if (errors > cluster.size())
      throw std::invalid_argument("estimate_pci: more errors than cluster members");
    for (int t = 0; t < trials_per_cluster; ++t) {
      state = basis.sample(rng);
      picks.resize(cluster.size());
      std::iota(picks.begin(), picks.end(), 0);
      // partial Fisher-Yates: first `errors` entries are the corrupted members
      for (int e = 0; e < errors; ++e) {
        int j = e + rng.below_int(cluster.size() - e);
        std::swap(picks[e], picks[j]);
      }
      std::vector<int> original(state);
      for (int e = 0; e < errors; ++e) {
        int id = cluster.member_ids[picks[e]];
        int sign = rng.coin() ? 1 : -1;
        // keep the error alive at the alphabet boundary
        if (state[id] == 0) sign = 1;
        if (state[id] == model.q - 1) sign = -1;
        state[id] += sign;
      }
      intra_cluster_correct(cluster, state, thresholds, noise, model.q, t_max, rng);
      bool ok = true;
      for (int id : cluster.member_ids)
        if (state[id] != original[id]) {
          ok = false;
          break;
        }
      successes += ok ? 1 : 0;
      ++total;
    }
  }
  PciRow row;
  row.upsilon = noise.upsilon;
  row.nu = noise.nu;
  row.errors = errors;
  row.trials = total;
  row.p_ci = static_cast<double>(successes) / total;
  row.ci_halfwidth = 1.96 * std::sqrt(row.p_ci * (1.0 - row.p_ci) / total);
  return row;
}

std::string PciTable::to_csv() const {
  std::ostringstream out;
  out << "upsilon,nu,i,trials,p_ci,ci_halfwidth\n";
  for (const auto& r : rows)
    out << format_double(r.upsilon) << ',' << format_double(r.nu) << ',' << r.errors << ','
        << r.trials << ',' << format_double(r.p_ci) << ',' << format_double(r.ci_halfwidth)
        << '\n';
  return out.str();
}

double de_recursion_step(double z, double epsilon, const DegreeDistribution& lambda,
                         const DegreeDistribution& rho, std::span<const double> pc) {
  double corrected = 0.0;
  double z_power = 1.0;      // z^(i-1)
  double factorial = 1.0;    // (i-1)!
  for (size_t idx = 0; idx < pc.size(); ++idx) {
    int i = static_cast<int>(idx) + 1;
    if (i > 1) {
      z_power *= z;
      factorial *= static_cast<double>(i - 1);
    }
    if (pc[idx] == 0.0) continue;
    corrected += pc[idx] * z_power / factorial * rho.derivative(i - 1, 1.0 - z);
  }
  double pi = std::clamp(1.0 - corrected, 0.0, 1.0);
  return epsilon * lambda.eval(pi);
}

DeResult de_trajectory(double epsilon, const DegreeDistribution& lambda,
                       const DegreeDistribution& rho, std::span<const double> pc,
                       double tol, int max_iterations) {
  if (lambda.empty() || rho.empty())
    throw std::invalid_argument("de_trajectory: degenerate degree distribution");
  DeResult result;
  result.epsilon = epsilon;
  double z = epsilon;
  result.trajectory.push_back(z);
  bool decreased = false;
  for (int t = 0; t < max_iterations && z >= tol; ++t) {
    double next = de_recursion_step(z, epsilon, lambda, rho, pc);
    result.trajectory.push_back(next);
    if (next >= z - 1e-15) {  // fixed point / stall
      if (decreased && next > z + 1e-12)
        throw std::logic_error("de_trajectory: trajectory not monotone");
      z = next;
      break;
    }
    decreased = true;
    z = next;
  }
  result.final_value = z;
  result.success = z < tol;
  return result;
}

double de_threshold(const DegreeDistribution& lambda, const DegreeDistribution& rho,
                    std::span<const double> pc, double tol, int grid_size) {
  if (lambda.empty() || rho.empty())
    throw std::invalid_argument("de_threshold: degenerate degree distribution");
  auto condition_holds = [&](double epsilon) {
    if (epsilon <= 0.0) return true;
    for (int g = 0; g < grid_size; ++g) {
      double z = tol + (epsilon - tol) * g / (grid_size - 1.0);
      if (z <= 0.0) continue;
      if (de_recursion_step(z, epsilon, lambda, rho, pc) >= z) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 1.0;
  if (condition_holds(1.0)) return 1.0;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (condition_holds(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

std::string DeResult::to_csv() const {
  std::ostringstream out;
  out << "epsilon,t,z_t\n";
  for (size_t t = 0; t < trajectory.size(); ++t)
    out << format_double(epsilon) << ',' << t << ',' << format_double(trajectory[t]) << '\n';
  return out.str();
}

PhiCurve optimize_threshold_phi(double upsilon, double pi1, const ClusterStats& stats,
                                std::span<const double> phi_grid) {
  PhiCurve curve;
  bool first = true;
  for (double phi : phi_grid) {
    double pe1 = 1.0 - analytic_p1(stats, upsilon, phi, pi1).pc1;
    curve.phi.push_back(phi);
    curve.pe1.push_back(pe1);
    bool better = pe1 < curve.best_pe1 || (pe1 == curve.best_pe1 && phi > curve.best_phi);
    if (first || better) {
      curve.best_pe1 = pe1;
      curve.best_phi = phi;
      first = false;
    }
  }
  return curve;
}

}  // namespace nam
