#include <cmath>

#include "doctest.h"
#include "nam/degree_distribution.hpp"
#include "nam/rng.hpp"

using nam::DegreeDistribution;

TEST_CASE("coefficients validate and sum to one") {
  CHECK_THROWS(DegreeDistribution({{2, 0.5}, {3, 0.6}}));
  CHECK_THROWS(DegreeDistribution({{2, -0.1}, {3, 1.1}}));
  DegreeDistribution d({{2, 0.5}, {3, 0.5}});
  CHECK(d.eval(1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("evaluation matches direct polynomial summation") {
  nam::Rng rng(42);
  DegreeDistribution d({{1, 0.1}, {3, 0.25}, {5, 0.4}, {8, 0.25}});
  for (int trial = 0; trial < 100; ++trial) {
    double z = rng.uniform();
    double direct = 0.1 * std::pow(z, 0) + 0.25 * std::pow(z, 2) + 0.4 * std::pow(z, 4) +
                    0.25 * std::pow(z, 7);
    CHECK(std::abs(d.eval(z) - direct) < 1e-12);
  }
}

TEST_CASE("derivatives vanish beyond the maximum degree") {
  DegreeDistribution d({{2, 0.5}, {3, 0.5}});  // polynomial 0.5 z + 0.5 z^2
  CHECK(d.max_degree() == 3);
  for (double x : {0.0, 0.3, 0.9}) {
    CHECK(d.derivative(1, x) == doctest::Approx(0.5 + x).epsilon(1e-14));
    CHECK(d.derivative(2, x) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.derivative(3, x) == 0.0);
    CHECK(d.derivative(7, x) == 0.0);
  }
}

TEST_CASE("edge perspective from node degrees") {
  // half the edges attach to degree-2 nodes, half to degree-3 nodes
  std::vector<int> degrees;
  for (int i = 0; i < 30; ++i) degrees.push_back(2);
  for (int i = 0; i < 20; ++i) degrees.push_back(3);
  auto d = DegreeDistribution::from_node_degrees(degrees);
  CHECK(d.coeffs().at(2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d.coeffs().at(3) == doctest::Approx(0.5).epsilon(1e-14));
  // lambda(z) = 0.5 z + 0.5 z^2
  CHECK(d.eval(0.4) == doctest::Approx(0.5 * 0.4 + 0.5 * 0.16).epsilon(1e-14));
}

TEST_CASE("single-degree graph is a pure power") {
  auto d = DegreeDistribution::from_node_degrees({6, 6, 6, 6});
  CHECK(d.coeffs().size() == 1);
  CHECK(d.eval(0.5) == doctest::Approx(std::pow(0.5, 5)).epsilon(1e-14));
}
