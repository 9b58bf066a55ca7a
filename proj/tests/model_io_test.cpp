#include <sstream>

#include "doctest.h"
#include "nam/errors.hpp"
#include "nam/generator.hpp"
#include "nam/model.hpp"

using namespace nam;

namespace {

NetworkModel tiny_model() {
  NetworkModel model;
  model.n = 4;
  model.q = 8;
  model.magnitude = 1;
  model.eta = 0.5;
  Cluster cluster;
  cluster.index = 0;
  cluster.member_ids = {0, 1, 2, 3};
  cluster.w = {{1.0, 0.5, -1.0, -0.5}, {1.0, -1.0, 1.0, -1.0}, {0.5, -1.0, -0.5, 1.0}};
  cluster.finalize();
  model.clusters.push_back(cluster);
  return model;
}

}  // namespace

TEST_CASE("model round-trips through the text format with identical fields") {
  NetworkModel model = tiny_model();
  std::ostringstream out;
  save_model(model, out);
  std::istringstream in(out.str());
  NetworkModel loaded = load_model(in);
  CHECK(loaded.n == model.n);
  CHECK(loaded.q == model.q);
  CHECK(loaded.magnitude == model.magnitude);
  CHECK(loaded.eta == model.eta);
  REQUIRE(loaded.cluster_count() == 1);
  CHECK(loaded.clusters[0].member_ids == model.clusters[0].member_ids);
  CHECK(loaded.clusters[0].w == model.clusters[0].w);
  CHECK(loaded.clusters[0].pattern_degrees == model.clusters[0].pattern_degrees);

  // and a second pass produces identical bytes
  std::ostringstream again;
  save_model(loaded, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("generated model round-trips bit-identically") {
  GeneratorSpec spec;
  spec.n = 64;
  spec.clusters = 8;
  spec.mean_cluster_size = 16;
  spec.mean_constraints = 8;
  spec.seed = 5;
  auto [model, basis] = construct_subspace_model(spec);
  std::ostringstream out;
  save_model(model, out);
  std::istringstream in(out.str());
  NetworkModel loaded = load_model(in);
  loaded.eta = model.eta;  // loaded from header
  std::ostringstream again;
  save_model(loaded, again);
  CHECK(again.str() == out.str());
  loaded.validate();
}

TEST_CASE("validate rejects structural violations") {
  NetworkModel model = tiny_model();
  model.validate();

  SUBCASE("all-zero row") {
    model.clusters[0].w[1] = {0, 0, 0, 0};
    model.clusters[0].finalize();
    CHECK_THROWS(model.validate());
  }
  SUBCASE("uncovered neuron") {
    model.n = 5;
    CHECK_THROWS(model.validate());
  }
  SUBCASE("stale degrees") {
    model.clusters[0].pattern_degrees[0] = 7;
    CHECK_THROWS(model.validate());
  }
  SUBCASE("wrong eta") {
    model.eta = 0.25;
    CHECK_THROWS(model.validate());
  }
  SUBCASE("disconnected member") {
    for (auto& row : model.clusters[0].w) row[2] = 0.0;
    model.clusters[0].finalize();
    CHECK_THROWS(model.validate());
  }
}

TEST_CASE("load rejects malformed files") {
  std::istringstream bad_header("4 x");
  CHECK_THROWS_AS(load_model(bad_header), IoError);
  std::istringstream truncated("4 1 8 1 0.5\n3 4\n0 1 2 3\n1 0.5");
  CHECK_THROWS_AS(load_model(truncated), IoError);
}

TEST_CASE("doubles are written round-trippable") {
  for (double v : {0.5, -0.5, 1.0, 0.1, 1e-9, 123456.789, 0.0}) {
    std::istringstream in(format_double(v));
    double back;
    in >> back;
    CHECK(back == v);
  }
}
