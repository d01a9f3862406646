#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "e2oal/dataset.hpp"
#include "e2oal/io.hpp"
#include "e2oal/strategy.hpp"
#include "e2oal/synthetic.hpp"

namespace e2oal {

// Where an experiment's samples come from: a synthetic spec regenerated
// with each cell's seed, or fixed feature/label files (the initial labeled
// pool is still drawn per seed).
struct DataSource {
  std::optional<SyntheticSpec> synthetic;
  std::string features_path;
  std::string labels_path;
  int known_classes = 0;  // file mode only; the synthetic spec carries its own
};

struct ExperimentConfig {
  DataSource data;
  std::vector<Strategy> strategies;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  RoundConfig round;  // seed field is overwritten per cell
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> keys,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys)
      if (it.key() == k) ok = true;
    if (!ok) throw std::runtime_error("unknown config field: " + where + it.key());
  }
}

inline SyntheticSpec synthetic_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j,
                      {"known_classes", "unknown_classes", "dim", "samples_per_class",
                       "cluster_separation", "test_fraction"},
                      "data.synthetic.");
  SyntheticSpec s;
  if (j.contains("known_classes")) s.known_classes = j.at("known_classes").get<int>();
  if (j.contains("unknown_classes")) s.unknown_classes = j.at("unknown_classes").get<int>();
  if (j.contains("dim")) s.dim = j.at("dim").get<int>();
  if (j.contains("samples_per_class"))
    s.samples_per_class = j.at("samples_per_class").get<int>();
  if (j.contains("cluster_separation"))
    s.cluster_separation = j.at("cluster_separation").get<double>();
  if (j.contains("test_fraction")) s.test_fraction = j.at("test_fraction").get<double>();
  s.validate();
  return s;
}

}  // namespace detail

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("config root must be an object");
  ExperimentConfig cfg;

  nlohmann::json round_part = j;
  for (const char* key : {"data", "strategies", "seeds", "output_dir"})
    round_part.erase(key);
  cfg.round = round_config_from_json(round_part);

  if (!j.contains("data")) throw std::runtime_error("missing config field: data");
  const nlohmann::json& d = j.at("data");
  if (d.contains("synthetic")) {
    detail::reject_unknown_keys(d, {"synthetic"}, "data.");
    cfg.data.synthetic = detail::synthetic_from_json(d.at("synthetic"));
  } else {
    detail::reject_unknown_keys(d, {"features", "labels", "known_classes"}, "data.");
    for (const char* key : {"features", "labels", "known_classes"})
      if (!d.contains(key))
        throw std::runtime_error(std::string("missing config field: data.") + key);
    cfg.data.features_path = d.at("features").get<std::string>();
    cfg.data.labels_path = d.at("labels").get<std::string>();
    cfg.data.known_classes = d.at("known_classes").get<int>();
    if (cfg.data.known_classes < 2)
      throw std::runtime_error("data.known_classes must be >= 2");
  }

  if (!j.contains("strategies")) throw std::runtime_error("missing config field: strategies");
  for (const auto& s : j.at("strategies"))
    cfg.strategies.push_back(parse_strategy(s.get<std::string>()));
  if (cfg.strategies.empty()) throw std::runtime_error("strategies must be non-empty");

  if (!j.contains("seeds")) throw std::runtime_error("missing config field: seeds");
  for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
  if (cfg.seeds.empty()) throw std::runtime_error("seeds must be non-empty");

  if (!j.contains("output_dir")) throw std::runtime_error("missing config field: output_dir");
  cfg.output_dir = j.at("output_dir").get<std::string>();
  return cfg;
}

// Feature rows and CSV labels are joined on sample_id; every feature row
// must be covered exactly once.
inline DataSet load_file_dataset(const DataSource& src) {
  DataSet data;
  data.features = read_features(src.features_path);
  std::vector<SampleLabel> labels = read_labels(src.labels_path);

  std::unordered_map<std::int64_t, const SampleLabel*> by_id;
  for (const auto& l : labels) {
    if (!by_id.emplace(l.sample_id, &l).second)
      throw std::runtime_error(src.labels_path + ": duplicate sample_id " +
                               std::to_string(l.sample_id));
  }
  data.labels.k = src.known_classes;
  int max_class = -1;
  data.true_class.resize(data.features.size());
  for (std::size_t r = 0; r < data.features.size(); ++r) {
    auto it = by_id.find(data.features.sample_ids[r]);
    if (it == by_id.end())
      throw std::runtime_error(src.labels_path + ": no label for sample_id " +
                               std::to_string(data.features.sample_ids[r]));
    const SampleLabel& l = *it->second;
    data.true_class[r] = l.true_class;
    max_class = std::max(max_class, l.true_class);
    if (l.split == Split::test) {
      data.test_rows.push_back(r);
      data.test_labels.push_back(l.true_class);
    }
  }
  if (max_class >= data.labels.k) data.labels.u_true = max_class - data.labels.k + 1;
  data.validate();
  return data;
}

inline std::pair<DataSet, PoolState> materialize_cell(const DataSource& src,
                                                      const RoundConfig& round,
                                                      std::uint64_t seed) {
  if (src.synthetic) {
    SyntheticSpec spec = *src.synthetic;
    spec.seed = seed;
    SyntheticBench bench = generate_synthetic(spec, round.initial_fraction);
    return {std::move(bench.data), std::move(bench.initial_state)};
  }
  DataSet data = load_file_dataset(src);
  PoolState state = make_initial_pool(data, round.initial_fraction, seed);
  return {std::move(data), std::move(state)};
}

struct CellResult {
  Strategy strategy = Strategy::e2oal;
  std::uint64_t seed = 0;
  std::vector<RoundMetrics> metrics;
};

inline std::vector<CellResult> run_experiment_cells(const ExperimentConfig& cfg) {
  std::vector<CellResult> cells;
  for (Strategy strategy : cfg.strategies) {
    for (std::uint64_t seed : cfg.seeds) {
      RoundConfig rc = cfg.round;
      rc.seed = seed;
      auto [data, state] = materialize_cell(cfg.data, rc, seed);
      CellResult cell;
      cell.strategy = strategy;
      cell.seed = seed;
      cell.metrics = run_strategy(strategy, data, std::move(state), rc);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

namespace detail {

// Aggregates are computed from CSV-rounded values so the summary equals
// what anyone recomputes from the metrics files.
inline double csv_round(double v) { return std::stod(format_metric(v)); }

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

inline nlohmann::json summarize_cells(const std::vector<CellResult>& cells) {
  nlohmann::json strategies = nlohmann::json::object();
  for (const CellResult& cell : cells) {
    if (cell.metrics.empty()) continue;
    nlohmann::json& s = strategies[strategy_name(cell.strategy)];
    s["seeds"].push_back(cell.seed);
    s["final_accuracy"]["per_seed"].push_back(
        detail::csv_round(cell.metrics.back().test_accuracy));
    double mp = 0.0;
    for (const RoundMetrics& m : cell.metrics)
      mp += detail::csv_round(m.observed_precision);
    s["mean_precision"]["per_seed"].push_back(mp /
                                              static_cast<double>(cell.metrics.size()));
  }
  for (auto& [name, s] : strategies.items()) {
    for (const char* metric : {"final_accuracy", "mean_precision"}) {
      std::vector<double> vals = s[metric]["per_seed"].get<std::vector<double>>();
      auto [mean, sd] = detail::mean_std(vals);
      s[metric]["mean"] = mean;
      s[metric]["std"] = sd;
    }
  }
  return nlohmann::json{{"strategies", strategies}};
}

// Full fan-out: one metrics CSV per (strategy, seed) cell plus summary.json,
// all under cfg.output_dir.
inline std::vector<CellResult> run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  std::vector<CellResult> cells = run_experiment_cells(cfg);
  for (const CellResult& cell : cells) {
    std::string name = std::string(strategy_name(cell.strategy)) + "_seed" +
                       std::to_string(cell.seed) + ".csv";
    write_metrics((std::filesystem::path(cfg.output_dir) / name).string(), cell.metrics);
  }
  nlohmann::json summary = summarize_cells(cells);
  std::ofstream os(std::filesystem::path(cfg.output_dir) / "summary.json");
  if (!os) throw std::runtime_error("cannot open summary.json for writing");
  os << summary.dump(2) << '\n';
  return cells;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return experiment_from_json(j);
}

}  // namespace e2oal
