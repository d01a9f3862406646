#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "e2oal/model.hpp"
#include "e2oal/query.hpp"

namespace e2oal {

enum class Strategy { e2oal, random, uncertainty, purity_only, info_only, no_class_expansion };

inline Strategy parse_strategy(std::string_view name) {
  if (name == "e2oal") return Strategy::e2oal;
  if (name == "random") return Strategy::random;
  if (name == "uncertainty") return Strategy::uncertainty;
  if (name == "purity_only") return Strategy::purity_only;
  if (name == "info_only") return Strategy::info_only;
  if (name == "no_class_expansion") return Strategy::no_class_expansion;
  throw std::invalid_argument("unknown strategy: " + std::string(name));
}

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::e2oal: return "e2oal";
    case Strategy::random: return "random";
    case Strategy::uncertainty: return "uncertainty";
    case Strategy::purity_only: return "purity_only";
    case Strategy::info_only: return "info_only";
    case Strategy::no_class_expansion: return "no_class_expansion";
  }
  throw std::logic_error("unhandled strategy");
}

namespace detail {

// random and uncertainty ignore purity entirely: plain cross-entropy
// training on the labeled knowns, then either a uniform draw or a
// least-confidence ranking over the unlabeled pool.
inline RoundMetrics baseline_round(Strategy strategy, const DataSet& data,
                                   PoolState& state, const RoundConfig& cfg,
                                   PrecisionController& ctrl) {
  const int t = state.round + 1;
  const int k = data.labels.k;
  std::vector<TrainSample> samples;
  samples.reserve(state.labeled_known.size());
  for (std::size_t i = 0; i < state.labeled_known.size(); ++i)
    samples.push_back({state.labeled_known[i], true, state.known_labels[i]});
  DualHeadModel model =
      train_model(data.features.matrix, samples, static_cast<int>(data.features.dim()),
                  k, k, cfg, t, TrainMode::ce_only);

  const std::size_t budget =
      std::min(static_cast<std::size_t>(cfg.budget), state.unlabeled.size());
  std::vector<std::size_t> queried;
  if (strategy == Strategy::random) {
    std::vector<std::size_t> pool = state.unlabeled;
    RngStream rng = derive_stream(cfg.seed, static_cast<std::uint64_t>(t), "random-query");
    rng.shuffle(pool);
    queried.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(budget));
  } else {
    std::vector<double> conf(state.unlabeled.size());
    for (std::size_t i = 0; i < state.unlabeled.size(); ++i) {
      std::vector<double> p =
          softmax(model.primary_logits(data.features.matrix.row(state.unlabeled[i])));
      conf[i] = *std::max_element(p.begin(), p.end());
    }
    std::vector<std::size_t> order(state.unlabeled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (conf[a] != conf[b]) return conf[a] < conf[b];
      return state.unlabeled[a] < state.unlabeled[b];
    });
    queried.resize(budget);
    for (std::size_t i = 0; i < budget; ++i) queried[i] = state.unlabeled[order[i]];
  }

  std::vector<OracleLabel> labels;
  std::vector<bool> batch_known;
  for (std::size_t row : queried) {
    labels.push_back(oracle_label(data, row));
    batch_known.push_back(labels.back().known);
  }

  RoundMetrics m;
  m.round = t;
  m.u_hat = 0;
  m.pool_size = state.unlabeled.size();
  m.calibrated_precision = ctrl.calibrated;
  m.test_accuracy =
      primary_accuracy(model, data.features.matrix, data.test_rows, data.test_labels);
  apply_query_result(state, queried, labels);
  m.observed_precision = observed_precision(batch_known);
  ctrl = update_calibrated_precision(ctrl, m.observed_precision);
  return m;
}

}  // namespace detail

// Plays out every round of one (strategy, seed) cell. The precision
// controller is carried for all strategies so the metrics column is always
// populated; only the two-stage strategies feed it back into selection.
inline std::vector<RoundMetrics> run_strategy(Strategy strategy, const DataSet& data,
                                              PoolState state, const RoundConfig& cfg) {
  data.validate();
  cfg.validate(data.labels.k);
  PrecisionController ctrl = make_precision_controller(cfg.target_precision);
  std::vector<RoundMetrics> table;
  table.reserve(static_cast<std::size_t>(cfg.rounds));

  for (int t = 1; t <= cfg.rounds && !state.unlabeled.empty(); ++t) {
    switch (strategy) {
      case Strategy::random:
      case Strategy::uncertainty:
        table.push_back(detail::baseline_round(strategy, data, state, cfg, ctrl));
        break;
      case Strategy::e2oal:
      case Strategy::purity_only:
      case Strategy::info_only:
      case Strategy::no_class_expansion: {
        RoundOptions opt;
        opt.selection = strategy == Strategy::purity_only ? SelectionRule::purity_top
                        : strategy == Strategy::info_only ? SelectionRule::info_top
                                                          : SelectionRule::two_stage;
        opt.expand_classes = strategy != Strategy::no_class_expansion;
        table.push_back(run_round(data, state, cfg, ctrl, opt).metrics);
        break;
      }
    }
  }
  return table;
}

}  // namespace e2oal
