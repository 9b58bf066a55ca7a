#include "nam/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "nam/errors.hpp"

namespace fs = std::filesystem;

namespace nam {

namespace {

constexpr const char* kArtifactVersion = "nam-0.1.0";

// Stream classes keep rng derivations from colliding across uses.
constexpr uint64_t kSweepStream = 1;
constexpr uint64_t kPciStream = 2;
constexpr uint64_t kStopBuildStream = 3;
constexpr uint64_t kStopRunStream = 4;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, const std::string& key) {
  char* end = nullptr;
  double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0')
    throw ConfigError("config: bad number for " + key + ": '" + raw + "'");
  return v;
}

long long parse_int(const std::string& raw, const std::string& key) {
  char* end = nullptr;
  long long v = std::strtoll(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0')
    throw ConfigError("config: bad integer for " + key + ": '" + raw + "'");
  return v;
}

std::vector<double> parse_grid(const std::string& raw, const std::string& key) {
  std::string s = trim(raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw ConfigError("config: expected [..] list for " + key);
  s = s.substr(1, s.size() - 2);
  std::vector<double> values;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    values.push_back(parse_double(item, key));
  }
  if (values.empty()) throw ConfigError("config: empty list for " + key);
  return values;
}

std::string grid_to_string(const std::vector<double>& grid) {
  std::string out = "[";
  for (size_t i = 0; i < grid.size(); ++i) {
    if (i) out += ", ";
    out += format_double(grid[i]);
  }
  return out + "]";
}

class KeyReader {
 public:
  explicit KeyReader(std::map<std::string, std::string> raw) : raw_(std::move(raw)) {}

  bool has(const std::string& key) {
    touch(key);
    return raw_.count(key) > 0;
  }
  std::string str(const std::string& key, const std::string& dflt) {
    touch(key);
    auto it = raw_.find(key);
    return it == raw_.end() ? dflt : it->second;
  }
  double real(const std::string& key, double dflt) {
    touch(key);
    auto it = raw_.find(key);
    return it == raw_.end() ? dflt : parse_double(it->second, key);
  }
  long long integer(const std::string& key, long long dflt) {
    touch(key);
    auto it = raw_.find(key);
    return it == raw_.end() ? dflt : parse_int(it->second, key);
  }
  std::vector<double> grid(const std::string& key, std::vector<double> dflt) {
    touch(key);
    auto it = raw_.find(key);
    return it == raw_.end() ? dflt : parse_grid(it->second, key);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : raw_) {
      if (seen_.count(key)) continue;
      if (key.rfind("model.", 0) == 0 || key.rfind("artifact.", 0) == 0) continue;
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

 private:
  void touch(const std::string& key) { seen_.insert(key); }
  std::map<std::string, std::string> raw_;
  std::set<std::string> seen_;
};

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(line_no));
    out[key] = value;
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("failed writing: " + path.string());
}

// Bounded pool over an indexed task list; partial results live in
// preallocated slots, so scheduling never affects the merged output.
void run_tasks(int workers, size_t count, const std::function<void(size_t)>& fn) {
  if (count == 0) return;
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers == 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w)
    threads.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : threads) t.join();
}

struct GridPoint {
  double epsilon, upsilon, nu;
};

std::vector<GridPoint> make_points(const ExperimentConfig& cfg) {
  std::vector<GridPoint> points;
  for (double eps : cfg.epsilon_grid)
    for (double ups : cfg.upsilon_grid)
      for (double nu : cfg.nu_grid) points.push_back({eps, ups, nu});
  return points;
}

struct SweepAcc {
  long symbol_errors = 0;
  long pattern_errors = 0;
  long iterations = 0;
  long failures = 0;
  long trials = 0;
  void add(const RecallOutcome& outcome) {
    symbol_errors += outcome.symbol_errors;
    pattern_errors += outcome.pattern_error ? 1 : 0;
    iterations += outcome.outer_iterations;
    failures += outcome.declared_failure ? 1 : 0;
    ++trials;
  }
  void merge(const SweepAcc& other) {
    symbol_errors += other.symbol_errors;
    pattern_errors += other.pattern_errors;
    iterations += other.iterations;
    failures += other.failures;
    trials += other.trials;
  }
};

struct SweepContext {
  const ExperimentConfig& cfg;
  const NetworkModel& model;
  const PatternBasis& basis;
  Thresholds thresholds;
};

void run_sweep_trial(const SweepContext& ctx, const GridPoint& pt, size_t point_idx,
                     long trial_idx, SweepAcc& acc) {
  Rng rng = Rng::derive(ctx.cfg.seed, point_idx, static_cast<uint64_t>(trial_idx), kSweepStream);
  std::vector<int> pattern = ctx.basis.sample(rng);
  std::vector<int> state(pattern);
  const int q = ctx.model.q;
  if (ctx.cfg.kind == ExperimentKind::NoExternalNoise) {
    // internal disturbances take the place of external errors here
    for (int j = 0; j < ctx.model.n; ++j)
      if (rng.uniform() < pt.upsilon) {
        state[j] += rng.coin() ? 1 : -1;
        state[j] = std::clamp(state[j], 0, q - 1);
      }
  } else {
    NoiseSpec external;
    external.epsilon = pt.epsilon;
    external.magnitude = ctx.cfg.error_magnitude;
    std::vector<int> z = sample_external_error(ctx.model.n, external, rng);
    for (int j = 0; j < ctx.model.n; ++j) state[j] = std::clamp(pattern[j] + z[j], 0, q - 1);
  }
  NoiseSpec internal;
  internal.upsilon = pt.upsilon;
  internal.nu = pt.nu;
  internal.epsilon = pt.epsilon;
  internal.magnitude = ctx.cfg.error_magnitude;
  RecallOutcome outcome = sequential_peeling(ctx.model, std::move(state), pattern,
                                             ctx.thresholds, internal, ctx.cfg.limits, rng);
  acc.add(outcome);
}

std::string run_sweep_csv(const SweepContext& ctx) {
  const auto points = make_points(ctx.cfg);
  const long trials = ctx.cfg.trials;
  const long chunk = 256;
  struct Task {
    size_t point;
    long begin, end;
  };
  std::vector<Task> tasks;
  for (size_t p = 0; p < points.size(); ++p)
    for (long b = 0; b < trials; b += chunk) tasks.push_back({p, b, std::min(trials, b + chunk)});
  std::vector<SweepAcc> partial(tasks.size());
  run_tasks(ctx.cfg.workers, tasks.size(), [&](size_t t) {
    const Task& task = tasks[t];
    for (long trial = task.begin; trial < task.end; ++trial)
      run_sweep_trial(ctx, points[task.point], task.point, trial, partial[t]);
  });
  std::vector<SweepAcc> acc(points.size());
  for (size_t t = 0; t < tasks.size(); ++t) acc[tasks[t].point].merge(partial[t]);

  std::ostringstream out;
  out << "epsilon,upsilon,nu,trials,ser_mean,per_mean,mean_iterations,failure_rate\n";
  for (size_t p = 0; p < points.size(); ++p) {
    const auto& a = acc[p];
    out << format_double(points[p].epsilon) << ',' << format_double(points[p].upsilon) << ','
        << format_double(points[p].nu) << ',' << a.trials << ','
        << format_double(static_cast<double>(a.symbol_errors) / (a.trials * ctx.model.n)) << ','
        << format_double(static_cast<double>(a.pattern_errors) / a.trials) << ','
        << format_double(static_cast<double>(a.iterations) / a.trials) << ','
        << format_double(static_cast<double>(a.failures) / a.trials) << '\n';
  }
  return out.str();
}

PciTable run_pci_table(const ExperimentConfig& cfg, const NetworkModel& model,
                       const PatternBasis& basis, const Thresholds& thresholds) {
  struct Point {
    double upsilon, nu;
    int errors;
  };
  std::vector<Point> grid;
  for (double ups : cfg.upsilon_grid)
    for (double nu : cfg.nu_grid)
      for (int i = 1; i <= cfg.pci_max_errors; ++i) grid.push_back({ups, nu, i});
  std::vector<PciRow> rows(grid.size());
  run_tasks(cfg.workers, grid.size(), [&](size_t g) {
    NoiseSpec noise;
    noise.upsilon = grid[g].upsilon;
    noise.nu = grid[g].nu;
    Rng rng = Rng::derive(cfg.seed, g, 0, kPciStream);
    rows[g] = estimate_pci(model, basis, grid[g].errors, noise, thresholds,
                           cfg.pci_trials_per_cluster, cfg.limits.inner_rounds, rng);
  });
  PciTable table;
  table.rows = std::move(rows);
  return table;
}

// Error placement whose corrupted clusters all hold at least two errors.
// Members with identical cluster membership are interchangeable for this
// purpose, so groups are drawn from those equivalence classes.
struct StoppingSet {
  std::vector<int> pattern;
  std::vector<std::pair<int, int>> placement;  // (neuron, delta)
};

StoppingSet build_stopping_set(const NetworkModel& model, const PatternBasis& basis,
                               const ExperimentConfig& cfg, const Thresholds& thresholds,
                               uint64_t set_index) {
  // membership signature -> neuron groups
  std::map<std::vector<int>, std::vector<int>> groups_by_signature;
  {
    std::vector<std::vector<int>> membership(model.n);
    for (const auto& cluster : model.clusters)
      for (int id : cluster.member_ids) membership[id].push_back(cluster.index);
    for (int j = 0; j < model.n; ++j) groups_by_signature[membership[j]].push_back(j);
  }
  std::vector<std::vector<int>> groups;
  for (auto& [sig, members] : groups_by_signature)
    if (static_cast<int>(members.size()) >= cfg.stopping_errors_per_group)
      groups.push_back(members);
  if (static_cast<int>(groups.size()) < cfg.stopping_groups)
    throw InfeasibleSpecError("stopping set: not enough interchangeable member groups");

  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng rng = Rng::derive(cfg.seed, set_index, static_cast<uint64_t>(attempt), kStopBuildStream);
    StoppingSet set;
    set.pattern = basis.sample(rng);
    std::vector<int> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int g = 0; g < cfg.stopping_groups; ++g) {
      const auto& members = groups[order[g]];
      std::vector<int> picks(members);
      rng.shuffle(picks);
      for (int e = 0; e < cfg.stopping_errors_per_group; ++e) {
        int id = picks[e];
        int sign = rng.coin() ? 1 : -1;
        if (set.pattern[id] == 0) sign = 1;
        if (set.pattern[id] == model.q - 1) sign = -1;
        set.placement.emplace_back(id, sign);
      }
    }
    std::sort(set.placement.begin(), set.placement.end());

    // The placement must trap the noiseless schedule.
    std::vector<int> state(set.pattern);
    for (auto [id, delta] : set.placement) state[id] += delta;
    NoiseSpec quiet;
    Rng noiseless_rng(0);
    RecallOutcome outcome = sequential_peeling(model, state, set.pattern, thresholds, quiet,
                                               cfg.limits, noiseless_rng);
    if (outcome.declared_failure) return set;
  }
  throw InfeasibleSpecError("stopping set: could not construct a trapping placement");
}

struct StoppingOutputs {
  std::string csv;
  std::string placements;
};

StoppingOutputs run_stopping_demo(const ExperimentConfig& cfg, const NetworkModel& model,
                                  const PatternBasis& basis, const Thresholds& thresholds) {
  struct SetResult {
    StoppingSet set;
    std::vector<long> successes;  // per noise point
  };
  std::vector<std::pair<double, double>> noise_points;
  for (double ups : cfg.upsilon_grid)
    for (double nu : cfg.nu_grid) noise_points.emplace_back(ups, nu);

  std::vector<SetResult> results(cfg.stopping_sets);
  run_tasks(cfg.workers, results.size(), [&](size_t s) {
    SetResult& result = results[s];
    result.set = build_stopping_set(model, basis, cfg, thresholds, s);
    std::vector<int> initial(result.set.pattern);
    for (auto [id, delta] : result.set.placement) initial[id] += delta;
    result.successes.assign(noise_points.size(), 0);
    for (size_t np = 0; np < noise_points.size(); ++np) {
      NoiseSpec noise;
      noise.upsilon = noise_points[np].first;
      noise.nu = noise_points[np].second;
      for (int r = 0; r < cfg.stopping_restarts; ++r) {
        Rng rng = Rng::derive(cfg.seed, s, static_cast<uint64_t>(np) * 100000 + r, kStopRunStream);
        RecallOutcome outcome = sequential_peeling(model, initial, result.set.pattern,
                                                   thresholds, noise, cfg.limits, rng);
        if (outcome.symbol_errors == 0) ++result.successes[np];
      }
    }
  });

  std::ostringstream csv;
  csv << "set,upsilon,nu,restarts,successes,success_rate\n";
  std::ostringstream placements;
  for (int s = 0; s < cfg.stopping_sets; ++s) {
    // noiseless reference row: the constructed set traps by construction
    csv << s << ",0,0,1,0,0\n";
    for (size_t np = 0; np < noise_points.size(); ++np) {
      long ok = results[s].successes[np];
      csv << s << ',' << format_double(noise_points[np].first) << ','
          << format_double(noise_points[np].second) << ',' << cfg.stopping_restarts << ',' << ok
          << ',' << format_double(static_cast<double>(ok) / cfg.stopping_restarts) << '\n';
    }
    placements << "set " << s << ":";
    for (auto [id, delta] : results[s].set.placement)
      placements << ' ' << id << ':' << (delta > 0 ? "+1" : "-1");
    placements << '\n';
  }
  return {csv.str(), placements.str()};
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SerSweep: return "ser_sweep";
    case ExperimentKind::IterationSweep: return "iteration_sweep";
    case ExperimentKind::PciGrid: return "pci_grid";
    case ExperimentKind::DeCompare: return "de_compare";
    case ExperimentKind::NoExternalNoise: return "no_external_noise";
    case ExperimentKind::StoppingSetDemo: return "stopping_set_demo";
    case ExperimentKind::LargerAlphabet: return "larger_alphabet";
  }
  return "ser_sweep";
}

ExperimentKind kind_from_name(const std::string& name) {
  for (ExperimentKind kind :
       {ExperimentKind::SerSweep, ExperimentKind::IterationSweep, ExperimentKind::PciGrid,
        ExperimentKind::DeCompare, ExperimentKind::NoExternalNoise,
        ExperimentKind::StoppingSetDemo, ExperimentKind::LargerAlphabet})
    if (kind_name(kind) == name) return kind;
  throw ConfigError("config: unknown experiment kind '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
  KeyReader reader(parse_key_values(text));
  ExperimentConfig cfg;
  cfg.kind = kind_from_name(reader.str("experiment", "ser_sweep"));
  cfg.seed = static_cast<uint64_t>(reader.integer("seed", 1));
  cfg.workers = static_cast<int>(reader.integer("workers", 1));
  cfg.out_dir = reader.str("out", "out");
  cfg.trials = static_cast<int>(reader.integer("trials", 2000));

  cfg.generator.n = static_cast<int>(reader.integer("generator.n", 400));
  cfg.generator.clusters = static_cast<int>(reader.integer("generator.clusters", 50));
  cfg.generator.mean_cluster_size = reader.real("generator.mean_cluster_size", 40.0);
  cfg.generator.mean_constraints = reader.real("generator.mean_constraints", 20.0);
  cfg.generator.subspace_ratio = reader.real("generator.subspace_ratio", 0.5);
  cfg.generator.alphabet = static_cast<int>(reader.integer("generator.alphabet", 16));
  cfg.generator.mean_overlap = reader.real("generator.mean_overlap", 0.0);
  cfg.generator.dual_weight = static_cast<int>(reader.integer("generator.dual_weight", 4));
  cfg.generator.row_span = reader.real("generator.row_span", 1.0);
  cfg.generator.seed = static_cast<uint64_t>(reader.integer("generator.seed", 77));

  cfg.psi = reader.real("thresholds.psi", 0.45);
  cfg.phi = reader.real("thresholds.phi", 0.9);

  std::vector<double> default_eps = {0};
  switch (cfg.kind) {
    case ExperimentKind::SerSweep:
    case ExperimentKind::IterationSweep:
    case ExperimentKind::DeCompare:
    case ExperimentKind::LargerAlphabet:
      default_eps.clear();
      for (int i = 1; i <= 10; ++i) default_eps.push_back(0.025 * i);
      break;
    default:
      break;
  }
  std::vector<double> default_ups = {0.0};
  if (cfg.kind == ExperimentKind::StoppingSetDemo) default_ups = {0.6};
  cfg.epsilon_grid = reader.grid("noise.epsilon_grid", default_eps);
  cfg.upsilon_grid = reader.grid("noise.upsilon_grid", default_ups);
  cfg.nu_grid = reader.grid("noise.nu_grid", {0.0});
  cfg.error_magnitude = static_cast<int>(reader.integer(
      "noise.error_magnitude", cfg.kind == ExperimentKind::LargerAlphabet ? 3 : 1));

  cfg.limits.inner_rounds = static_cast<int>(reader.integer("recall.inner_rounds", 10));
  cfg.limits.outer_rounds = static_cast<int>(reader.integer("recall.outer_rounds", 40));

  cfg.pci_max_errors = static_cast<int>(reader.integer("pci.max_errors", 4));
  cfg.pci_trials_per_cluster = static_cast<int>(reader.integer("pci.trials_per_cluster", 40));

  cfg.stopping_sets = static_cast<int>(reader.integer("stopping.sets", 20));
  cfg.stopping_restarts = static_cast<int>(reader.integer("stopping.restarts", 50));
  cfg.stopping_groups = static_cast<int>(reader.integer("stopping.groups", 4));
  cfg.stopping_errors_per_group =
      static_cast<int>(reader.integer("stopping.errors_per_group", 2));

  reader.reject_unknown();
  cfg.validate();
  return cfg;
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> m;
  m["experiment"] = kind_name(kind);
  m["seed"] = std::to_string(seed);
  m["workers"] = std::to_string(workers);
  m["out"] = out_dir;
  m["trials"] = std::to_string(trials);
  m["generator.n"] = std::to_string(generator.n);
  m["generator.clusters"] = std::to_string(generator.clusters);
  m["generator.mean_cluster_size"] = format_double(generator.mean_cluster_size);
  m["generator.mean_constraints"] = format_double(generator.mean_constraints);
  m["generator.subspace_ratio"] = format_double(generator.subspace_ratio);
  m["generator.alphabet"] = std::to_string(generator.alphabet);
  m["generator.mean_overlap"] = format_double(generator.mean_overlap);
  m["generator.dual_weight"] = std::to_string(generator.dual_weight);
  m["generator.row_span"] = format_double(generator.row_span);
  m["generator.seed"] = std::to_string(generator.seed);
  m["thresholds.psi"] = format_double(psi);
  m["thresholds.phi"] = format_double(phi);
  m["noise.epsilon_grid"] = grid_to_string(epsilon_grid);
  m["noise.upsilon_grid"] = grid_to_string(upsilon_grid);
  m["noise.nu_grid"] = grid_to_string(nu_grid);
  m["noise.error_magnitude"] = std::to_string(error_magnitude);
  m["recall.inner_rounds"] = std::to_string(limits.inner_rounds);
  m["recall.outer_rounds"] = std::to_string(limits.outer_rounds);
  m["pci.max_errors"] = std::to_string(pci_max_errors);
  m["pci.trials_per_cluster"] = std::to_string(pci_trials_per_cluster);
  m["stopping.sets"] = std::to_string(stopping_sets);
  m["stopping.restarts"] = std::to_string(stopping_restarts);
  m["stopping.groups"] = std::to_string(stopping_groups);
  m["stopping.errors_per_group"] = std::to_string(stopping_errors_per_group);
  return m;
}

void ExperimentConfig::validate() const {
  generator.validate();
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (psi <= 0.0 || phi <= 0.0) throw ConfigError("config: thresholds must be positive");
  if (limits.inner_rounds < 1 || limits.outer_rounds < 1)
    throw ConfigError("config: recall round limits must be >= 1");
  if (error_magnitude < 1) throw ConfigError("config: error magnitude must be >= 1");
  auto check_grid = [](const std::vector<double>& grid, const std::string& name, double lo,
                       double hi, bool open_hi) {
    if (grid.empty()) throw ConfigError("config: empty grid " + name);
    for (double v : grid) {
      bool bad = v < lo || (open_hi ? v >= hi : v > hi);
      if (bad) throw ConfigError("config: " + name + " value out of range");
    }
    if (!std::is_sorted(grid.begin(), grid.end()))
      throw ConfigError("config: " + name + " must be ascending");
  };
  check_grid(epsilon_grid, "epsilon_grid", 0.0, 1.0, false);
  check_grid(upsilon_grid, "upsilon_grid", 0.0, 1.0, true);
  check_grid(nu_grid, "nu_grid", 0.0, 1.0, true);
  if (pci_max_errors < 1) throw ConfigError("config: pci.max_errors must be >= 1");
  if (pci_trials_per_cluster < 1) throw ConfigError("config: pci trials must be >= 1");
  if (stopping_sets < 1 || stopping_restarts < 1 || stopping_groups < 1 ||
      stopping_errors_per_group < 2)
    throw ConfigError("config: stopping parameters invalid (errors per group must be >= 2)");
}

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);

  auto [model, basis] = construct_subspace_model(cfg.generator);
  Thresholds thresholds{cfg.psi, cfg.phi, model.eta};
  NoiseSpec worst;
  worst.nu = cfg.nu_grid.back();
  if (!satisfaction_check_reliable(thresholds, worst))
    std::cerr << "warning: psi <= max nu on the grid; satisfaction checks are unreliable\n";

  std::ostringstream model_text;
  save_model(model, model_text);
  RunResult result;
  result.out_dir = cfg.out_dir;
  result.model_hash = fnv1a_hex(model_text.str());

  auto manifest_map = cfg.to_map();
  manifest_map["model.hash"] = result.model_hash;
  manifest_map["artifact.version"] = kArtifactVersion;
  std::ostringstream manifest;
  for (const auto& [key, value] : manifest_map) manifest << key << " = " << value << '\n';

  auto emit = [&](const std::string& name, const std::string& content) {
    fs::path path = fs::path(cfg.out_dir) / name;
    write_file(path, content);
    result.files.push_back(path.string());
  };
  emit("manifest.txt", manifest.str());
  emit("model.txt", model_text.str());

  SweepContext ctx{cfg, model, basis, thresholds};
  switch (cfg.kind) {
    case ExperimentKind::SerSweep:
    case ExperimentKind::IterationSweep:
    case ExperimentKind::LargerAlphabet:
    case ExperimentKind::NoExternalNoise:
      emit("sweep.csv", run_sweep_csv(ctx));
      break;
    case ExperimentKind::PciGrid:
      emit("pci.csv", run_pci_table(cfg, model, basis, thresholds).to_csv());
      break;
    case ExperimentKind::DeCompare: {
      PciTable table = run_pci_table(cfg, model, basis, thresholds);
      emit("pci.csv", table.to_csv());
      ContractedGraph graph = contract_and_degree_distributions(model);
      std::ostringstream index;
      index << "index,upsilon,nu,epsilon_star\n";
      int point = 0;
      for (double ups : cfg.upsilon_grid) {
        for (double nu : cfg.nu_grid) {
          std::vector<double> pc;
          for (int i = 1; i <= cfg.pci_max_errors; ++i)
            for (const auto& row : table.rows)
              if (row.errors == i && row.upsilon == ups && row.nu == nu)
                pc.push_back(row.p_ci);
          double star = de_threshold(graph.lambda, graph.rho, pc);
          index << point << ',' << format_double(ups) << ',' << format_double(nu) << ','
                << format_double(star) << '\n';
          std::ostringstream de;
          de << "epsilon,t,z_t\n";
          for (double eps : cfg.epsilon_grid) {
            DeResult traj = de_trajectory(eps, graph.lambda, graph.rho, pc);
            for (size_t t = 0; t < traj.trajectory.size(); ++t)
              de << format_double(eps) << ',' << t << ','
                 << format_double(traj.trajectory[t]) << '\n';
          }
          emit("de_" + std::to_string(point) + ".csv", de.str());
          ++point;
        }
      }
      emit("de_index.csv", index.str());
      emit("sweep.csv", run_sweep_csv(ctx));
      break;
    }
    case ExperimentKind::StoppingSetDemo: {
      StoppingOutputs outputs = run_stopping_demo(cfg, model, basis, thresholds);
      emit("stopping.csv", outputs.csv);
      emit("stopping_sets.txt", outputs.placements);
      break;
    }
  }
  return result;
}

}  // namespace nam
