#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "e2oal/class_estimation.hpp"
#include "e2oal/dataset.hpp"
#include "e2oal/gmm.hpp"
#include "e2oal/model.hpp"
#include "e2oal/rng.hpp"
#include "e2oal/scoring.hpp"
#include "e2oal/types.hpp"

namespace e2oal {

// Running precision-control state. `calibrated` starts at the target and
// each round absorbs the shortfall between target and observed batch
// precision, clamped to [0,1].
struct PrecisionController {
  double target = 0.6;
  double calibrated = 0.6;
  std::optional<double> last_observed;
};

inline PrecisionController make_precision_controller(double target) {
  if (!(target >= 0.0 && target <= 1.0))
    throw std::invalid_argument("target precision out of range");
  return {target, target, std::nullopt};
}

inline PrecisionController update_calibrated_precision(const PrecisionController& ctrl,
                                                       double observed) {
  if (!(observed >= 0.0 && observed <= 1.0))
    throw std::invalid_argument("observed precision out of range");
  PrecisionController next = ctrl;
  next.calibrated = std::clamp(ctrl.calibrated + (ctrl.target - observed), 0.0, 1.0);
  next.last_observed = observed;
  return next;
}

// High-purity slice of the unlabeled pool, ordered by descending posterior
// (ties by ascending row id). Grown past the budget until the mean
// posterior of its weakest budget-sized tail stops exceeding p_hat; the
// loop appends before re-testing, so the first violating sample stays.
struct CandidatePool {
  std::vector<std::size_t> indices;
  std::vector<double> posteriors;
};

inline CandidatePool build_candidate_pool(const std::vector<std::size_t>& unlabeled,
                                          const std::vector<double>& posteriors,
                                          std::size_t budget, double p_hat) {
  if (unlabeled.size() != posteriors.size())
    throw std::invalid_argument("posteriors/pool size mismatch");
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (unlabeled.size() < budget)
    throw std::invalid_argument("budget exceeds unlabeled pool");

  const std::size_t n = unlabeled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (posteriors[a] != posteriors[b]) return posteriors[a] > posteriors[b];
    return unlabeled[a] < unlabeled[b];
  });

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + posteriors[order[i]];
  std::size_t s = budget;
  while (s < n &&
         (prefix[s] - prefix[s - budget]) / static_cast<double>(budget) > p_hat)
    ++s;

  CandidatePool pool;
  pool.indices.reserve(s);
  pool.posteriors.reserve(s);
  for (std::size_t i = 0; i < s; ++i) {
    pool.indices.push_back(unlabeled[order[i]]);
    pool.posteriors.push_back(posteriors[order[i]]);
  }
  return pool;
}

// Top-|B| of the pool by informativeness; ties broken by higher posterior,
// then lower row id.
inline std::vector<std::size_t> select_queries(const CandidatePool& pool,
                                               const std::vector<double>& info,
                                               std::size_t budget) {
  if (info.size() != pool.indices.size())
    throw std::invalid_argument("informativeness/pool size mismatch");
  if (pool.indices.size() < budget)
    throw std::invalid_argument("pool smaller than budget");
  std::vector<std::size_t> order(pool.indices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (info[a] != info[b]) return info[a] > info[b];
    if (pool.posteriors[a] != pool.posteriors[b])
      return pool.posteriors[a] > pool.posteriors[b];
    return pool.indices[a] < pool.indices[b];
  });
  std::vector<std::size_t> out(budget);
  for (std::size_t i = 0; i < budget; ++i) out[i] = pool.indices[order[i]];
  return out;
}

// two_stage is the full pipeline: purity pool, then informativeness.
// purity_top and info_top rank the whole unlabeled pool by one score and
// take the top of it; they exist as ablations of the two-stage design.
enum class SelectionRule { two_stage, purity_top, info_top };

struct RoundOptions {
  SelectionRule selection = SelectionRule::two_stage;
  bool expand_classes = true;  // false collapses labeled unknowns into one proxy class
};

struct RoundResult {
  RoundMetrics metrics;
  std::vector<std::size_t> queried;
};

// One full query round: (after round 1) re-estimate the unknown-class
// count, retrain the dual-head model from scratch, score and select a
// batch, label it through the oracle, and update the controller.
inline RoundResult run_round(const DataSet& data, PoolState& state,
                             const RoundConfig& cfg, PrecisionController& ctrl,
                             const RoundOptions& options = {}) {
  if (state.unlabeled.empty()) throw std::runtime_error("unlabeled pool exhausted");
  const int k = data.labels.k;
  const int t = state.round + 1;  // rounds are 1-based
  const std::size_t dim = data.features.dim();

  int u_hat = 0;
  std::vector<int> proxy;  // parallel to state.labeled_unknown
  if (t > 1 && !state.labeled_unknown.empty()) {
    if (options.expand_classes) {
      const std::size_t n_l = state.labeled_known.size() + state.labeled_unknown.size();
      Matrix feats(n_l, dim);
      std::vector<int> lab(n_l);
      std::size_t r = 0;
      for (std::size_t i = 0; i < state.labeled_known.size(); ++i, ++r) {
        auto src = data.features.matrix.row(state.labeled_known[i]);
        std::copy(src.begin(), src.end(), feats.row(r).begin());
        lab[r] = state.known_labels[i];
      }
      for (std::size_t idx : state.labeled_unknown) {
        auto src = data.features.matrix.row(idx);
        std::copy(src.begin(), src.end(), feats.row(r).begin());
        lab[r] = k;
        ++r;
      }
      // Estimation clustering is seeded by (seed, m) only, so the same
      // candidate m reuses the same K-Means draws across rounds.
      EstimationResult est =
          estimate_unknown_classes(feats, lab, k, cfg.u_max,
                                   derive_seed(cfg.seed, 0, "class-est"),
                                   cfg.kmeans_restarts);
      u_hat = est.u_hat;
      proxy = std::move(est.proxy_labels);
    } else {
      u_hat = 1;
      proxy.assign(state.labeled_unknown.size(), k);
    }
  }
  const int aux = k + u_hat;

  std::vector<TrainSample> samples;
  samples.reserve(state.labeled_known.size() + proxy.size());
  for (std::size_t i = 0; i < state.labeled_known.size(); ++i)
    samples.push_back({state.labeled_known[i], true, state.known_labels[i]});
  for (std::size_t i = 0; i < proxy.size(); ++i)
    samples.push_back({state.labeled_unknown[i], false, proxy[i]});

  DualHeadModel model = train_model(data.features.matrix, samples,
                                    static_cast<int>(dim), k, aux, cfg, t,
                                    TrainMode::dual);

  // Purity over all of D_L and D_U; the labeled rows anchor the mixture's
  // high and low components even though only D_U is ranked.
  const int purity_round = aux > k ? 2 : 1;
  auto purity_of = [&](std::size_t row) {
    std::vector<double> o = model.aux_logits(data.features.matrix.row(row));
    return purity_score(o, k, purity_round);
  };
  std::vector<double> all_scores;
  all_scores.reserve(state.labeled_known.size() + state.labeled_unknown.size() +
                     state.unlabeled.size());
  for (std::size_t row : state.labeled_known) all_scores.push_back(purity_of(row));
  for (std::size_t row : state.labeled_unknown) all_scores.push_back(purity_of(row));
  std::vector<double> pool_scores;
  pool_scores.reserve(state.unlabeled.size());
  for (std::size_t row : state.unlabeled) {
    double s = purity_of(row);
    pool_scores.push_back(s);
    all_scores.push_back(s);
  }

  const std::size_t budget =
      std::min(static_cast<std::size_t>(cfg.budget), state.unlabeled.size());
  auto info_of = [&](std::size_t row) {
    std::vector<double> p = softmax(model.primary_logits(data.features.matrix.row(row)));
    return informativeness(p);
  };

  std::vector<std::size_t> queried;
  std::size_t pool_size = 0;
  if (options.selection == SelectionRule::two_stage) {
    Gmm1d gmm = fit_gmm_1d(
        all_scores, derive_seed(cfg.seed, static_cast<std::uint64_t>(t), "gmm-init"));
    std::vector<double> posteriors(pool_scores.size());
    for (std::size_t i = 0; i < pool_scores.size(); ++i)
      posteriors[i] = high_posterior(gmm, pool_scores[i]);
    CandidatePool pool =
        build_candidate_pool(state.unlabeled, posteriors, budget, ctrl.calibrated);
    pool_size = pool.indices.size();
    std::vector<double> info(pool.indices.size());
    for (std::size_t i = 0; i < pool.indices.size(); ++i)
      info[i] = info_of(pool.indices[i]);
    queried = select_queries(pool, info, budget);
  } else {
    pool_size = state.unlabeled.size();
    std::vector<double> score(state.unlabeled.size());
    if (options.selection == SelectionRule::purity_top) {
      score = pool_scores;
    } else {
      for (std::size_t i = 0; i < state.unlabeled.size(); ++i)
        score[i] = info_of(state.unlabeled[i]);
    }
    std::vector<std::size_t> order(state.unlabeled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (score[a] != score[b]) return score[a] > score[b];
      return state.unlabeled[a] < state.unlabeled[b];
    });
    queried.resize(budget);
    for (std::size_t i = 0; i < budget; ++i) queried[i] = state.unlabeled[order[i]];
  }

  std::vector<OracleLabel> labels;
  std::vector<bool> batch_known;
  labels.reserve(queried.size());
  batch_known.reserve(queried.size());
  for (std::size_t row : queried) {
    labels.push_back(oracle_label(data, row));
    batch_known.push_back(labels.back().known);
  }

  RoundResult res;
  res.metrics.round = t;
  res.metrics.u_hat = u_hat;
  res.metrics.pool_size = pool_size;
  res.metrics.calibrated_precision = ctrl.calibrated;  // the value used this round
  res.metrics.test_accuracy =
      primary_accuracy(model, data.features.matrix, data.test_rows, data.test_labels);

  apply_query_result(state, queried, labels);
  double observed = observed_precision(batch_known);
  res.metrics.observed_precision = observed;
  ctrl = update_calibrated_precision(ctrl, observed);
  res.queried = std::move(queried);
  return res;
}

}  // namespace e2oal
