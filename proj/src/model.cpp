#include "nam/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nam/errors.hpp"

namespace nam {

void Cluster::finalize() {
  const int m = rows();
  const int nl = size();
  pattern_degrees.assign(nl, 0);
  row_support.assign(m, {});
  col_support.assign(nl, {});
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(w[i].size()) != nl)
      throw std::runtime_error("cluster: ragged weight row");
    for (int j = 0; j < nl; ++j) {
      if (w[i][j] == 0.0) continue;
      row_support[i].push_back({member_ids[j], w[i][j]});
      col_support[j].push_back({i, w[i][j]});
      ++pattern_degrees[j];
    }
  }
}

void NoiseSpec::validate() const {
  if (upsilon < 0.0 || upsilon >= 1.0) throw ConfigError("noise: upsilon must be in [0,1)");
  if (nu < 0.0 || nu >= 1.0) throw ConfigError("noise: nu must be in [0,1)");
  if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("noise: epsilon must be in [0,1]");
  if (magnitude < 1) throw ConfigError("noise: magnitude must be >= 1");
}

void NetworkModel::validate() const {
  if (n <= 0) throw std::runtime_error("model: n must be positive");
  if (q < 2) throw std::runtime_error("model: alphabet must have at least two states");
  std::vector<int> coverage(n, 0);
  double min_weight = std::numeric_limits<double>::infinity();
  for (const auto& cluster : clusters) {
    if (cluster.rows() < 1 || cluster.size() < 1)
      throw std::runtime_error("model: empty cluster");
    for (int id : cluster.member_ids) {
      if (id < 0 || id >= n) throw std::runtime_error("model: member id out of range");
      ++coverage[id];
    }
    std::vector<int> degrees(cluster.size(), 0);
    for (int i = 0; i < cluster.rows(); ++i) {
      bool any = false;
      for (int j = 0; j < cluster.size(); ++j) {
        double v = cluster.w[i][j];
        if (v == 0.0) continue;
        any = true;
        ++degrees[j];
        min_weight = std::min(min_weight, std::abs(v));
      }
      if (!any) throw std::runtime_error("model: all-zero constraint row");
    }
    for (int j = 0; j < cluster.size(); ++j) {
      if (degrees[j] < 1) throw std::runtime_error("model: disconnected pattern neuron");
      if (cluster.pattern_degrees.empty()) continue;
      if (degrees[j] != cluster.pattern_degrees[j])
        throw std::runtime_error("model: stale pattern degrees");
    }
  }
  for (int id = 0; id < n; ++id)
    if (coverage[id] == 0) throw std::runtime_error("model: uncovered pattern neuron");
  if (!clusters.empty() && std::abs(min_weight - eta) > 1e-12)
    throw std::runtime_error("model: recorded eta does not match weights");
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void save_model(const NetworkModel& model, std::ostream& out) {
  out << model.n << ' ' << model.cluster_count() << ' ' << model.q << ' '
      << model.magnitude << ' ' << format_double(model.eta) << '\n';
  for (const auto& cluster : model.clusters) {
    out << cluster.rows() << ' ' << cluster.size() << '\n';
    for (int j = 0; j < cluster.size(); ++j)
      out << cluster.member_ids[j] << (j + 1 == cluster.size() ? '\n' : ' ');
    for (int i = 0; i < cluster.rows(); ++i)
      for (int j = 0; j < cluster.size(); ++j)
        out << format_double(cluster.w[i][j]) << (j + 1 == cluster.size() ? '\n' : ' ');
  }
}

void save_model_file(const NetworkModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  save_model(model, out);
  if (!out) throw IoError("failed writing model file: " + path);
}

NetworkModel load_model(std::istream& in) {
  NetworkModel model;
  int cluster_count = 0;
  if (!(in >> model.n >> cluster_count >> model.q >> model.magnitude >> model.eta))
    throw IoError("model file: bad header");
  model.clusters.resize(cluster_count);
  for (int l = 0; l < cluster_count; ++l) {
    Cluster& cluster = model.clusters[l];
    cluster.index = l;
    int m = 0, nl = 0;
    if (!(in >> m >> nl) || m < 1 || nl < 1) throw IoError("model file: bad cluster header");
    cluster.member_ids.resize(nl);
    for (int j = 0; j < nl; ++j)
      if (!(in >> cluster.member_ids[j])) throw IoError("model file: bad member list");
    cluster.w.assign(m, std::vector<double>(nl));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < nl; ++j)
        if (!(in >> cluster.w[i][j])) throw IoError("model file: bad weight row");
    cluster.finalize();
  }
  return model;
}

NetworkModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace nam
