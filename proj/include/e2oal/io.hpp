#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "e2oal/types.hpp"

#include <json.hpp>

namespace e2oal {

inline constexpr char kFeatureMagic[4] = {'E', '2', 'F', 'M'};

namespace detail {

inline void put_u32_le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32_le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f32_le(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32_le(os, bits);
}

inline float get_f32_le(std::istream& is) {
  std::uint32_t bits = get_u32_le(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace detail

// Binary layout: "E2FM", u32 n_samples, u32 dim (little-endian), then
// n_samples*dim float32 little-endian, row-major. Row index doubles as the
// sample id.
inline void write_features(const std::string& path, const FeatureSet& fs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open feature file for writing: " + path);
  os.write(kFeatureMagic, 4);
  detail::put_u32_le(os, static_cast<std::uint32_t>(fs.size()));
  detail::put_u32_le(os, static_cast<std::uint32_t>(fs.dim()));
  for (std::size_t r = 0; r < fs.size(); ++r)
    for (double v : fs.matrix.row(r)) detail::put_f32_le(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline FeatureSet read_features(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open feature file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw std::runtime_error("bad magic in " + path + ": expected \"E2FM\"");
  std::uint32_t n = detail::get_u32_le(is);
  std::uint32_t dim = detail::get_u32_le(is);
  if (!is || n == 0 || dim == 0)
    throw std::runtime_error("bad header in " + path);
  FeatureSet fs;
  fs.matrix = Matrix(n, dim);
  fs.sample_ids.resize(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    fs.sample_ids[r] = r;
    for (std::uint32_t c = 0; c < dim; ++c)
      fs.matrix(r, c) = static_cast<double>(detail::get_f32_le(is));
  }
  if (!is) throw std::runtime_error("truncated feature file: " + path);
  fs.validate();
  return fs;
}

enum class Split { pool, test };

struct SampleLabel {
  std::int64_t sample_id = 0;
  int true_class = 0;
  Split split = Split::pool;
};

inline void write_labels(const std::string& path, const std::vector<SampleLabel>& labels) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open label file for writing: " + path);
  os << "sample_id,true_class,split\n";
  for (const auto& l : labels)
    os << l.sample_id << ',' << l.true_class << ','
       << (l.split == Split::pool ? "pool" : "test") << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::vector<SampleLabel> read_labels(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open label file: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "sample_id,true_class,split")
    throw std::runtime_error("bad label header in " + path +
                             ": expected \"sample_id,true_class,split\"");
  std::vector<SampleLabel> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id_s, cls_s, split_s;
    if (!std::getline(ss, id_s, ',') || !std::getline(ss, cls_s, ',') ||
        !std::getline(ss, split_s))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
    SampleLabel l;
    try {
      l.sample_id = std::stoll(id_s);
      l.true_class = std::stoi(cls_s);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    if (split_s == "pool")
      l.split = Split::pool;
    else if (split_s == "test")
      l.split = Split::test;
    else
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": split must be pool or test");
    out.push_back(l);
  }
  return out;
}

inline std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline void write_metrics(const std::string& path, const std::vector<RoundMetrics>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open metrics file for writing: " + path);
  os << "round,test_acc,query_precision,u_hat,pool_size,calibrated_precision\n";
  for (const auto& m : rows)
    os << m.round << ',' << format_metric(m.test_accuracy) << ','
       << format_metric(m.observed_precision) << ',' << m.u_hat << ',' << m.pool_size
       << ',' << format_metric(m.calibrated_precision) << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

// RoundConfig <-> JSON, field names 1:1. Unknown keys are rejected so typos
// in config files surface immediately.
inline RoundConfig round_config_from_json(const nlohmann::json& j) {
  RoundConfig c;
  static const char* known_keys[] = {
      "budget",        "target_precision", "u_max",         "rounds",
      "gamma",         "epochs",           "learning_rate", "batch_size",
      "weight_decay",  "momentum",         "seed",          "hidden_dim",
      "initial_fraction", "lr_decay_every", "lr_decay_factor", "logit_clamp",
      "kmeans_restarts"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known_keys)
      if (it.key() == k) ok = true;
    if (!ok) throw std::runtime_error("unknown config field: " + it.key());
  }
  if (j.contains("budget")) c.budget = j.at("budget").get<int>();
  if (j.contains("target_precision")) c.target_precision = j.at("target_precision").get<double>();
  if (j.contains("u_max")) c.u_max = j.at("u_max").get<int>();
  if (j.contains("rounds")) c.rounds = j.at("rounds").get<int>();
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
  if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("weight_decay")) c.weight_decay = j.at("weight_decay").get<double>();
  if (j.contains("momentum")) c.momentum = j.at("momentum").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("hidden_dim")) c.hidden_dim = j.at("hidden_dim").get<int>();
  if (j.contains("initial_fraction")) c.initial_fraction = j.at("initial_fraction").get<double>();
  if (j.contains("lr_decay_every")) c.lr_decay_every = j.at("lr_decay_every").get<int>();
  if (j.contains("lr_decay_factor")) c.lr_decay_factor = j.at("lr_decay_factor").get<double>();
  if (j.contains("logit_clamp")) c.logit_clamp = j.at("logit_clamp").get<double>();
  if (j.contains("kmeans_restarts")) c.kmeans_restarts = j.at("kmeans_restarts").get<int>();
  return c;
}

inline nlohmann::json round_config_to_json(const RoundConfig& c) {
  return nlohmann::json{{"budget", c.budget},
                        {"target_precision", c.target_precision},
                        {"u_max", c.u_max},
                        {"rounds", c.rounds},
                        {"gamma", c.gamma},
                        {"epochs", c.epochs},
                        {"learning_rate", c.learning_rate},
                        {"batch_size", c.batch_size},
                        {"weight_decay", c.weight_decay},
                        {"momentum", c.momentum},
                        {"seed", c.seed},
                        {"hidden_dim", c.hidden_dim},
                        {"initial_fraction", c.initial_fraction},
                        {"lr_decay_every", c.lr_decay_every},
                        {"lr_decay_factor", c.lr_decay_factor},
                        {"logit_clamp", c.logit_clamp},
                        {"kmeans_restarts", c.kmeans_restarts}};
}

}  // namespace e2oal
