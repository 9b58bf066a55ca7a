#pragma once

#include <map>
#include <vector>

namespace nam {

// Edge-perspective degree distribution: coeff(j) is the fraction of edges
// incident to nodes of degree j, and the associated polynomial is
//   f(z) = sum_j coeff(j) * z^(j-1).
class DegreeDistribution {
 public:
  DegreeDistribution() = default;
  explicit DegreeDistribution(std::map<int, double> coeffs);

  // Builds the edge-perspective coefficients from a node degree multiset.
  static DegreeDistribution from_node_degrees(const std::vector<int>& degrees);

  double eval(double z) const;

  // k-th derivative of the polynomial at x. Vanishes identically once
  // k >= max degree.
  double derivative(int order, double x) const;

  int max_degree() const;
  const std::map<int, double>& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }

 private:
  std::map<int, double> coeffs_;
};

}  // namespace nam
