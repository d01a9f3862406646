#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace e2oal {

// Dense row-major matrix of doubles. All feature math in the library runs
// on this; files store float32, converted on load.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Embedding coordinates for a pool of samples, one row per sample.
struct FeatureSet {
  Matrix matrix;
  std::vector<std::int64_t> sample_ids;

  std::size_t size() const { return matrix.rows(); }
  std::size_t dim() const { return matrix.cols(); }

  void validate() const {
    if (matrix.rows() < 1 || matrix.cols() < 1)
      throw std::invalid_argument("feature set must have n_samples >= 1 and dim >= 1");
    if (sample_ids.size() != matrix.rows())
      throw std::invalid_argument("sample_ids length must match row count");
    for (std::size_t r = 0; r < matrix.rows(); ++r)
      for (double v : matrix.row(r))
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
    std::unordered_set<std::int64_t> seen(sample_ids.begin(), sample_ids.end());
    if (seen.size() != sample_ids.size())
      throw std::invalid_argument("duplicate sample_ids");
  }
};

// Known classes occupy ids [0,k); unknown classes, when simulated, occupy
// ids [k, k+u_true) so the ranges never overlap.
struct LabelSpace {
  int k = 0;
  std::optional<int> u_true;

  void validate() const {
    if (k < 2) throw std::invalid_argument("need at least 2 known classes");
    if (u_true && *u_true < 1) throw std::invalid_argument("u_true must be >= 1");
  }
};

// What the annotator returns for one queried sample. The true unknown-class
// id is never exposed here; unknowns collapse to a single label.
struct OracleLabel {
  bool known = false;
  int class_id = -1;  // in [0,k) when known
};

// Index partition of the pool. labeled_known and known_labels are parallel.
struct PoolState {
  std::vector<std::size_t> labeled_known;
  std::vector<int> known_labels;
  std::vector<std::size_t> labeled_unknown;
  std::vector<std::size_t> unlabeled;
  int round = 0;
};

// p_bar = |B_kno| / |B|
inline double observed_precision(const std::vector<bool>& batch_known) {
  if (batch_known.empty()) throw std::invalid_argument("empty query batch");
  std::size_t n_known = 0;
  for (bool b : batch_known)
    if (b) ++n_known;
  return static_cast<double>(n_known) / static_cast<double>(batch_known.size());
}

// Moves queried indices out of the unlabeled pool according to the oracle's
// answers and advances the round counter. Relative order of the remaining
// unlabeled indices is preserved.
inline void apply_query_result(PoolState& state, const std::vector<std::size_t>& queried,
                               const std::vector<OracleLabel>& labels) {
  if (queried.size() != labels.size())
    throw std::invalid_argument("queried/labels size mismatch");
  std::unordered_set<std::size_t> unlabeled(state.unlabeled.begin(), state.unlabeled.end());
  for (std::size_t idx : queried)
    if (!unlabeled.count(idx)) throw std::invalid_argument("index not queryable");

  std::unordered_set<std::size_t> taken(queried.begin(), queried.end());
  if (taken.size() != queried.size())
    throw std::invalid_argument("index not queryable");  // duplicate query
  std::vector<std::size_t> remaining;
  remaining.reserve(state.unlabeled.size() - queried.size());
  for (std::size_t idx : state.unlabeled)
    if (!taken.count(idx)) remaining.push_back(idx);
  state.unlabeled = std::move(remaining);

  for (std::size_t i = 0; i < queried.size(); ++i) {
    if (labels[i].known) {
      state.labeled_known.push_back(queried[i]);
      state.known_labels.push_back(labels[i].class_id);
    } else {
      state.labeled_unknown.push_back(queried[i]);
    }
  }
  ++state.round;
}

// Simulation / training knobs shared by every strategy cell.
struct RoundConfig {
  int budget = 150;
  double target_precision = 0.6;
  int u_max = 60;
  int rounds = 10;
  double gamma = 1.0;
  int epochs = 80;
  double learning_rate = 0.05;
  int batch_size = 64;
  double weight_decay = 5e-4;
  double momentum = 0.9;
  std::uint64_t seed = 1;

  int hidden_dim = 64;
  double initial_fraction = 0.05;
  int lr_decay_every = 60;
  double lr_decay_factor = 0.1;
  double logit_clamp = 30.0;  // logits clipped to [-c, c] before exp
  int kmeans_restarts = 1;

  void validate(int k) const {
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (!(target_precision > 0.0 && target_precision <= 1.0))
      throw std::invalid_argument("target_precision must be in (0,1]");
    if (u_max <= k) throw std::invalid_argument("u_max must exceed k");
    if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
    if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (epochs < 1 || batch_size < 1 || hidden_dim < 1)
      throw std::invalid_argument("invalid training hyperparameters");
    if (!(initial_fraction > 0.0 && initial_fraction < 1.0))
      throw std::invalid_argument("initial_fraction must be in (0,1)");
  }
};

struct RoundMetrics {
  int round = 0;
  double test_accuracy = 0.0;
  double observed_precision = 0.0;
  int u_hat = 0;
  std::size_t pool_size = 0;
  double calibrated_precision = 0.0;
};

}  // namespace e2oal
