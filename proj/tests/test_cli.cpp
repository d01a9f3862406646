#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* cli_path() {
  const char* p = std::getenv("E2OAL_CLI");
  REQUIRE(p != nullptr);
  return p;
}

// Runs the binary through the shell, capturing both streams.
CmdResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  fs::path out = fs::temp_directory_path() / "e2oal_cli_stdout.txt";
  fs::path err = fs::temp_directory_path() / "e2oal_cli_stderr.txt";
  std::string cmd = env_prefix + "\"" + std::string(cli_path()) + "\" " + args + " > \"" +
                    out.string() + "\" 2> \"" + err.string() + "\"";
  int status = std::system(cmd.c_str());
  CmdResult res;
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  res.out = slurp(out);
  res.err = slurp(err);
  return res;
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("e2oal_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

std::string gen_args(const fs::path& out, unsigned seed) {
  return "gen --out \"" + out.string() +
         "\" --known 3 --unknown 2 --dim 6 --per-class 20 --sep 6 --seed " +
         std::to_string(seed);
}

}  // namespace

TEST_CASE("gen writes a deterministic benchmark") {
  fs::path a = fresh_dir("gen_a");
  fs::path b = fresh_dir("gen_b");
  fs::path c = fresh_dir("gen_c");

  CmdResult r = run_cli(gen_args(a, 5));
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  REQUIRE(fs::exists(a / "features.e2fm"));
  REQUIRE(fs::exists(a / "labels.csv"));

  CHECK(run_cli(gen_args(b, 5)).code == 0);
  CHECK(slurp(a / "features.e2fm") == slurp(b / "features.e2fm"));
  CHECK(slurp(a / "labels.csv") == slurp(b / "labels.csv"));

  CHECK(run_cli(gen_args(c, 6)).code == 0);
  CHECK(slurp(a / "features.e2fm") != slurp(c / "features.e2fm"));

  std::string labels = slurp(a / "labels.csv");
  CHECK(labels.rfind("sample_id,true_class,split\n", 0) == 0);
  CHECK(count_lines(labels) == 101);  // header + 5 classes x 20 samples
  std::size_t tests = 0;
  std::istringstream is(labels);
  std::string line;
  while (std::getline(is, line))
    if (line.size() >= 5 && line.substr(line.size() - 5) == ",test") ++tests;
  CHECK(tests == 9);  // 3 known classes x round(0.15 * 20)
}

TEST_CASE("gen rejects bad arguments on one line") {
  CmdResult r = run_cli("gen --known 3");
  CHECK(r.code == 1);
  CHECK(r.err == "error: --out is required\n");

  fs::path out = fresh_dir("gen_bad");
  r = run_cli("gen --out \"" + out.string() +
              "\" --known 3 --unknown 2 --dim 6 --per-class 0 --sep 6 --seed 1");
  CHECK(r.code == 1);
  CHECK(r.err == "error: samples_per_class must be >= 1\n");
  CHECK(count_lines(r.err) == 1);
}

TEST_CASE("estimate prints a json verdict") {
  fs::path dir = fresh_dir("estimate");
  REQUIRE(run_cli("gen --out \"" + dir.string() +
                  "\" --known 3 --unknown 5 --dim 8 --per-class 30 --sep 7 --seed 3")
              .code == 0);
  std::string est_cmd = "estimate --features \"" + (dir / "features.e2fm").string() +
                        "\" --labels \"" + (dir / "labels.csv").string() +
                        "\" --k 3 --umax 10 --seed 1";
  CmdResult r = run_cli(est_cmd);
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 1);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j.at("u_hat").get<int>() == 5);  // the generator planted 5 unknown classes
  CHECK(j.at("f1_product").get<double>() > 0.9);
  CHECK(j.at("f1_product").get<double>() <= 1.0);
  CHECK(run_cli(est_cmd).out == r.out);
}

TEST_CASE("estimate propagates io errors") {
  CmdResult r = run_cli("estimate --features /nonexistent/f.e2fm --labels /nonexistent/l.csv"
                        " --k 3 --umax 8 --seed 1");
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("error: "));
  CHECK(count_lines(r.err) == 1);
}

TEST_CASE("run executes a config and reruns byte identically") {
  fs::path dir = fresh_dir("run");
  fs::path out1 = dir / "out1";
  fs::path out2 = dir / "out2";
  nlohmann::json cfg = {
      {"data",
       {{"synthetic",
         {{"known_classes", 3},
          {"unknown_classes", 2},
          {"dim", 6},
          {"samples_per_class", 24},
          {"cluster_separation", 6.0}}}}},
      {"strategies", {"random"}},
      {"seeds", {1, 2}},
      {"output_dir", out1.string()},
      {"budget", 10},
      {"rounds", 2},
      {"u_max", 8},
      {"epochs", 20},
  };
  std::ofstream(dir / "config.json") << cfg.dump(2);
  CmdResult r = run_cli("run --config \"" + (dir / "config.json").string() + "\"");
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  REQUIRE(fs::exists(out1 / "random_seed1.csv"));
  REQUIRE(fs::exists(out1 / "random_seed2.csv"));
  REQUIRE(fs::exists(out1 / "summary.json"));

  cfg["output_dir"] = out2.string();
  std::ofstream(dir / "config2.json") << cfg.dump(2);
  // The verbosity switch only adds stderr chatter; outputs stay identical.
  r = run_cli("run --config \"" + (dir / "config2.json").string() + "\"",
              "E2OAL_VERBOSE=1 ");
  CHECK(r.code == 0);
  CHECK_THAT(r.err, ContainsSubstring("final accuracy"));
  CHECK(slurp(out1 / "random_seed1.csv") == slurp(out2 / "random_seed1.csv"));
  CHECK(slurp(out1 / "random_seed2.csv") == slurp(out2 / "random_seed2.csv"));
  CHECK(slurp(out1 / "summary.json") == slurp(out2 / "summary.json"));
}

TEST_CASE("run reports config errors on one line") {
  CmdResult r = run_cli("run --config /nonexistent/config.json");
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("error: cannot open config file"));
  CHECK(count_lines(r.err) == 1);

  fs::path dir = fresh_dir("run_bad");
  std::ofstream(dir / "broken.json") << "{ not json";
  r = run_cli("run --config \"" + (dir / "broken.json").string() + "\"");
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("error: "));
  CHECK_THAT(r.err, ContainsSubstring("broken.json"));
  CHECK(count_lines(r.err) == 1);

  std::ofstream(dir / "bad.e2fm") << "XXXX not a feature file";
  nlohmann::json cfg = {
      {"data",
       {{"features", (dir / "bad.e2fm").string()},
        {"labels", (dir / "labels.csv").string()},
        {"known_classes", 3}}},
      {"strategies", {"random"}},
      {"seeds", {1}},
      {"output_dir", (dir / "out").string()},
  };
  std::ofstream(dir / "badfeat.json") << cfg.dump(2);
  r = run_cli("run --config \"" + (dir / "badfeat.json").string() + "\"");
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("E2FM"));
  CHECK_THAT(r.err, ContainsSubstring("bad.e2fm"));
  CHECK(count_lines(r.err) == 1);
}

TEST_CASE("a subcommand is required") {
  CmdResult r = run_cli("");
  CHECK(r.code == 1);
  CHECK(r.err == "error: A subcommand is required\n");
}
