// Command-line front end: synthetic benchmark generation, experiment runs,
// and standalone unknown-class estimation on feature/label files.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "e2oal/class_estimation.hpp"
#include "e2oal/experiment.hpp"
#include "e2oal/io.hpp"
#include "e2oal/synthetic.hpp"
#include "json.hpp"

namespace {

bool verbose() { return std::getenv("E2OAL_VERBOSE") != nullptr; }

void cmd_gen(const std::string& out_dir, const e2oal::SyntheticSpec& spec) {
  std::filesystem::create_directories(out_dir);
  e2oal::DataSet data = e2oal::make_dataset(spec);
  std::vector<char> is_test(data.features.size(), 0);
  for (std::size_t r : data.test_rows) is_test[r] = 1;
  std::vector<e2oal::SampleLabel> labels(data.features.size());
  for (std::size_t r = 0; r < data.features.size(); ++r) {
    labels[r].sample_id = static_cast<std::int64_t>(r);
    labels[r].true_class = data.true_class[r];
    labels[r].split = is_test[r] ? e2oal::Split::test : e2oal::Split::pool;
  }
  const std::string feat_path = out_dir + "/features.e2fm";
  const std::string label_path = out_dir + "/labels.csv";
  e2oal::write_features(feat_path, data.features);
  e2oal::write_labels(label_path, labels);
  if (verbose())
    std::fprintf(stderr, "wrote %s (%zu x %zu) and %s\n", feat_path.c_str(),
                 data.features.size(), data.features.dim(), label_path.c_str());
}

void cmd_run(const std::string& config_path) {
  e2oal::ExperimentConfig cfg = e2oal::load_experiment_config(config_path);
  std::vector<e2oal::CellResult> cells = e2oal::run_experiment(cfg);
  if (verbose())
    for (const auto& cell : cells)
      std::fprintf(stderr, "%s seed %llu: final accuracy %.4f\n",
                   e2oal::strategy_name(cell.strategy),
                   static_cast<unsigned long long>(cell.seed),
                   cell.metrics.back().test_accuracy);
}

void cmd_estimate(const std::string& features_path, const std::string& labels_path,
                  int k, int u_max, unsigned seed) {
  e2oal::FeatureSet fs = e2oal::read_features(features_path);
  std::vector<e2oal::SampleLabel> labels = e2oal::read_labels(labels_path);
  if (k < 2) throw std::runtime_error("k must be at least 2");

  // The labeled pool is every pool-split row; classes >= k collapse to the
  // single unknown annotation the oracle would have produced.
  std::vector<std::size_t> rows;
  std::vector<int> pool_labels;
  for (const auto& l : labels) {
    if (l.split != e2oal::Split::pool) continue;
    auto it = std::find(fs.sample_ids.begin(), fs.sample_ids.end(), l.sample_id);
    if (it == fs.sample_ids.end())
      throw std::runtime_error("sample_id not in feature file: " +
                               std::to_string(l.sample_id));
    rows.push_back(static_cast<std::size_t>(it - fs.sample_ids.begin()));
    pool_labels.push_back(l.true_class < k ? l.true_class : k);
  }
  e2oal::Matrix pool(rows.size(), fs.matrix.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < fs.matrix.cols(); ++c)
      pool(i, c) = fs.matrix(rows[i], c);

  e2oal::EstimationResult res =
      e2oal::estimate_unknown_classes(pool, pool_labels, k, u_max, seed,
                                      /*restarts=*/4);
  nlohmann::json out{{"u_hat", res.u_hat}, {"f1_product", res.score}};
  std::printf("%s\n", out.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"open-set active learning query engine"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a synthetic benchmark");
  std::string out_dir;
  e2oal::SyntheticSpec spec;
  unsigned gen_seed = 1;
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--known", spec.known_classes, "known class count")->required();
  gen->add_option("--unknown", spec.unknown_classes, "unknown class count")->required();
  gen->add_option("--dim", spec.dim, "feature dimension")->required();
  gen->add_option("--per-class", spec.samples_per_class, "samples per class")->required();
  gen->add_option("--sep", spec.cluster_separation, "mean centroid separation")->required();
  gen->add_option("--seed", gen_seed, "generation seed")->required();

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path;
  run->add_option("--config", config_path, "experiment config JSON")->required();

  auto* est = app.add_subcommand("estimate", "estimate the unknown class count");
  std::string features_path, labels_path;
  int est_k = 0, est_umax = 0;
  unsigned est_seed = 1;
  est->add_option("--features", features_path, "feature file")->required();
  est->add_option("--labels", labels_path, "label CSV")->required();
  est->add_option("--k", est_k, "known class count")->required();
  est->add_option("--umax", est_umax, "upper bound on unknown classes")->required();
  est->add_option("--seed", est_seed, "clustering seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  try {
    if (gen->parsed()) {
      spec.seed = gen_seed;
      cmd_gen(out_dir, spec);
    } else if (run->parsed()) {
      cmd_run(config_path);
    } else {
      cmd_estimate(features_path, labels_path, est_k, est_umax, est_seed);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
