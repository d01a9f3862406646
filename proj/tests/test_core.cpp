#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "e2oal/io.hpp"
#include "e2oal/rng.hpp"
#include "e2oal/types.hpp"

using namespace e2oal;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("rng streams are deterministic per seed") {
  RngStream a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    std::uint64_t x = a.next_u64();
    if (x != b.next_u64()) all_equal = false;
    if (x != c.next_u64()) any_diff = true;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform and below stay in range") {
  RngStream rng(7);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 50000; ++i) {
    std::size_t v = rng.below(10);
    REQUIRE(v < 10);
    ++counts[v];
  }
  for (int c : counts) CHECK(std::abs(c - 5000) < 500);
}

TEST_CASE("gaussian has unit moments") {
  RngStream rng(11);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("shuffle permutes without loss") {
  RngStream rng(5);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  std::vector<int> orig = v;
  rng.shuffle(v);
  CHECK(v != orig);  // 1/100! chance of a false alarm
  std::sort(v.begin(), v.end());
  CHECK(v == orig);
}

TEST_CASE("derived seeds separate by round and tag") {
  std::uint64_t a = derive_seed(1, 0, "alpha");
  CHECK(a == derive_seed(1, 0, "alpha"));
  CHECK(a != derive_seed(1, 1, "alpha"));
  CHECK(a != derive_seed(1, 0, "beta"));
  CHECK(a != derive_seed(2, 0, "alpha"));
}

TEST_CASE("matrix is row major") {
  Matrix m(2, 3);
  m(0, 0) = 1;
  m(0, 2) = 3;
  m(1, 1) = 5;
  CHECK(m.data()[0] == 1);
  CHECK(m.data()[2] == 3);
  CHECK(m.data()[4] == 5);
  CHECK(m.row(1)[1] == 5);
  CHECK(squared_distance(m.row(0), m.row(1)) == 1 + 25 + 9);
}

TEST_CASE("feature set validation") {
  FeatureSet fs;
  fs.matrix = Matrix(2, 2, 1.0);
  fs.sample_ids = {0, 1};
  REQUIRE_NOTHROW(fs.validate());

  FeatureSet bad = fs;
  bad.sample_ids = {0};
  CHECK_THROWS_WITH(bad.validate(), "sample_ids length must match row count");

  bad = fs;
  bad.matrix(1, 0) = std::nan("");
  CHECK_THROWS_WITH(bad.validate(), "non-finite feature value");

  bad = fs;
  bad.sample_ids = {3, 3};
  CHECK_THROWS_WITH(bad.validate(), "duplicate sample_ids");

  bad = fs;
  bad.matrix = Matrix(0, 0);
  bad.sample_ids.clear();
  CHECK_THROWS(bad.validate());
}

TEST_CASE("label space validation") {
  LabelSpace ls;
  ls.k = 2;
  REQUIRE_NOTHROW(ls.validate());
  ls.k = 1;
  CHECK_THROWS_WITH(ls.validate(), "need at least 2 known classes");
  ls.k = 5;
  ls.u_true = 0;
  CHECK_THROWS_WITH(ls.validate(), "u_true must be >= 1");
}

TEST_CASE("observed precision counts known fraction") {
  CHECK(observed_precision({true, true, false}) == Catch::Approx(2.0 / 3.0));
  CHECK(observed_precision({false}) == 0.0);
  CHECK(observed_precision({true, true}) == 1.0);
  CHECK_THROWS_WITH(observed_precision({}), "empty query batch");
}

TEST_CASE("apply query result moves indices and keeps order") {
  PoolState st;
  st.unlabeled = {10, 11, 12, 13, 14};
  apply_query_result(st, {13, 11}, {{true, 2}, {false, -1}});
  CHECK(st.unlabeled == std::vector<std::size_t>{10, 12, 14});
  CHECK(st.labeled_known == std::vector<std::size_t>{13});
  CHECK(st.known_labels == std::vector<int>{2});
  CHECK(st.labeled_unknown == std::vector<std::size_t>{11});
  CHECK(st.round == 1);

  CHECK_THROWS_WITH(apply_query_result(st, {10}, {}), "queried/labels size mismatch");
  CHECK_THROWS_WITH(apply_query_result(st, {11}, {{true, 0}}), "index not queryable");
  CHECK_THROWS_WITH(apply_query_result(st, {10, 10}, {{true, 0}, {true, 0}}),
                    "index not queryable");
}

TEST_CASE("round config validation") {
  RoundConfig c;
  REQUIRE_NOTHROW(c.validate(20));
  CHECK_THROWS_WITH(c.validate(60), "u_max must exceed k");
  RoundConfig bad = c;
  bad.budget = 0;
  CHECK_THROWS_WITH(bad.validate(5), "budget must be >= 1");
  bad = c;
  bad.target_precision = 0.0;
  CHECK_THROWS(bad.validate(5));
  bad = c;
  bad.initial_fraction = 1.0;
  CHECK_THROWS(bad.validate(5));
}

TEST_CASE("feature file round trip") {
  FeatureSet fs;
  fs.matrix = Matrix(3, 2);
  double vals[] = {0.5, -1.25, 2.0, 3.5, -0.125, 7.0};  // exact in float32
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) fs.matrix(r, c) = vals[r * 2 + c];
  fs.sample_ids = {0, 1, 2};  // ids are implicit row indices in the file
  std::string path = temp_path("e2oal_test_features.e2fm");
  write_features(path, fs);
  FeatureSet back = read_features(path);
  REQUIRE(back.size() == 3);
  REQUIRE(back.dim() == 2);
  CHECK(back.sample_ids == fs.sample_ids);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) CHECK(back.matrix(r, c) == fs.matrix(r, c));
  std::filesystem::remove(path);
}

TEST_CASE("feature file magic is checked") {
  std::string path = temp_path("e2oal_test_badmagic.e2fm");
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE" << std::string(16, '\0');
  }
  CHECK_THROWS_WITH(read_features(path),
                    "bad magic in " + path + ": expected \"E2FM\"");
  std::filesystem::remove(path);
  CHECK_THROWS(read_features(temp_path("e2oal_does_not_exist.e2fm")));
}

TEST_CASE("label csv round trip and errors") {
  std::vector<SampleLabel> labels = {
      {0, 3, Split::pool}, {1, 0, Split::test}, {7, 12, Split::pool}};
  std::string path = temp_path("e2oal_test_labels.csv");
  write_labels(path, labels);
  auto back = read_labels(path);
  REQUIRE(back.size() == 3);
  CHECK(back[2].sample_id == 7);
  CHECK(back[2].true_class == 12);
  CHECK(back[1].split == Split::test);

  {
    std::ofstream os(path);
    os << "sample_id,true_class\n";
  }
  CHECK_THROWS_WITH(read_labels(path),
                    "bad label header in " + path +
                        ": expected \"sample_id,true_class,split\"");
  {
    std::ofstream os(path);
    os << "sample_id,true_class,split\n1,2,naughty\n";
  }
  CHECK_THROWS_WITH(read_labels(path), path + ":2: split must be pool or test");
  {
    std::ofstream os(path);
    os << "sample_id,true_class,split\nxyz,2,pool\n";
  }
  CHECK_THROWS_WITH(read_labels(path), path + ":2: malformed row");
  std::filesystem::remove(path);
}

TEST_CASE("metrics csv layout is pinned") {
  RoundMetrics m;
  m.round = 1;
  m.test_accuracy = 0.5;
  m.observed_precision = 0.25;
  m.u_hat = 7;
  m.pool_size = 1234;
  m.calibrated_precision = 0.625;
  std::string path = temp_path("e2oal_test_metrics.csv");
  write_metrics(path, {m});
  CHECK(slurp(path) ==
        "round,test_acc,query_precision,u_hat,pool_size,calibrated_precision\n"
        "1,0.500000,0.250000,7,1234,0.625000\n");
  std::filesystem::remove(path);
}

TEST_CASE("round config json round trip") {
  RoundConfig c;
  c.budget = 99;
  c.u_max = 33;
  c.gamma = 2.5;
  c.kmeans_restarts = 4;
  nlohmann::json j = round_config_to_json(c);
  RoundConfig back = round_config_from_json(j);
  CHECK(back.budget == 99);
  CHECK(back.u_max == 33);
  CHECK(back.gamma == 2.5);
  CHECK(back.kmeans_restarts == 4);
  CHECK(back.rounds == c.rounds);

  CHECK(round_config_from_json(nlohmann::json::object()).budget == 150);
  CHECK_THROWS_WITH(round_config_from_json({{"bidget", 3}}),
                    "unknown config field: bidget");
}
