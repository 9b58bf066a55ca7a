#include "nam/degree_distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace nam {

DegreeDistribution::DegreeDistribution(std::map<int, double> coeffs)
    : coeffs_(std::move(coeffs)) {
  double total = 0.0;
  for (const auto& [degree, fraction] : coeffs_) {
    if (degree < 1) throw std::invalid_argument("degree distribution: degree < 1");
    if (fraction < 0.0) throw std::invalid_argument("degree distribution: negative coefficient");
    total += fraction;
  }
  if (!coeffs_.empty() && std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("degree distribution: coefficients must sum to 1");
}

DegreeDistribution DegreeDistribution::from_node_degrees(const std::vector<int>& degrees) {
  std::map<int, double> counts;
  double edges = 0.0;
  for (int d : degrees) {
    if (d < 1) throw std::invalid_argument("degree distribution: node of degree < 1");
    counts[d] += d;
    edges += d;
  }
  for (auto& [degree, mass] : counts) mass /= edges;
  return DegreeDistribution(std::move(counts));
}

double DegreeDistribution::eval(double z) const {
  double sum = 0.0;
  for (const auto& [degree, fraction] : coeffs_) sum += fraction * std::pow(z, degree - 1);
  return sum;
}

double DegreeDistribution::derivative(int order, double x) const {
  if (order == 0) return eval(x);
  double sum = 0.0;
  for (const auto& [degree, fraction] : coeffs_) {
    int power = degree - 1;
    if (power < order) continue;
    double falling = 1.0;
    for (int t = 0; t < order; ++t) falling *= static_cast<double>(power - t);
    sum += fraction * falling * std::pow(x, power - order);
  }
  return sum;
}

int DegreeDistribution::max_degree() const {
  return coeffs_.empty() ? 0 : coeffs_.rbegin()->first;
}

}  // namespace nam
