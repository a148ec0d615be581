// End-to-end tests that drive the built CLI binary. The binary path arrives
// as argv[1] from ctest.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "frailwatch/sha256.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_binary;
fs::path g_work;

int run(const std::string& args) {
  std::string cmd = g_binary + " " + args + " >> " + (g_work / "cli.log").string() +
                    " 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const fs::path& p) {
  std::string s = slurp(p);
  return std::count(s.begin(), s.end(), '\n');
}

// Hash of every artifact under a directory, path-keyed, for byte-identity
// comparisons across reruns.
std::string tree_digest(const fs::path& root) {
  std::vector<std::string> entries;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    entries.push_back(fs::relative(entry.path(), root).string() + ":" +
                      frailwatch::Sha256::of_file(entry.path().string()));
  }
  std::sort(entries.begin(), entries.end());
  std::string all;
  for (const auto& e : entries) all += e + "\n";
  return frailwatch::Sha256::of_string(all);
}

}  // namespace

TEST_CASE("full pipeline runs and reruns byte-identically") {
  // Identical config (including paths) and seeds must reproduce every output
  // byte: run once, wipe, run again in the same location.
  fs::path root = g_work / "run";
  auto pipeline = [&]() {
    fs::create_directories(root);
    std::string base = root.string() + "/";
    REQUIRE(run("synth --seed 7 --out " + base + "d --participants 2 --days 6 "
                "--duration-scale 0.08") == 0);
    REQUIRE(run("extract --in " + base + "d --window 300") == 0);
    std::string feats = base + "d/features_w300.csv";
    REQUIRE(run("train --features " + feats + " --out " + base + "m") == 0);
    REQUIRE(run("classify --features " + feats + " --model " + base +
                "m/model.json --out " + base + "c") == 0);
    REQUIRE(run("select --features " + feats + " --out " + base +
                "s --seed 3 --max-features 5") == 0);
    REQUIRE(run("sweep-windows --in " + base + "d --out " + base +
                "sw --seed 5 --windows 120,300") == 0);
    REQUIRE(run("rank-features --features " + feats + " --out " + base +
                "rf --seed 5 --no-classifier-methods") == 0);
    REQUIRE(run("anomaly --features " + feats + " --out " + base +
                "an --seed 5") == 0);
    REQUIRE(run("report --in " + base + " --out " + base + "report") == 0);
    return tree_digest(root);
  };
  std::string first = pipeline();
  fs::remove_all(root);
  std::string second = pipeline();
  CHECK(first == second);
}

TEST_CASE("extract emits the 66(+19) feature columns") {
  fs::path root = g_work / "columns";
  fs::create_directories(root);
  std::string base = root.string() + "/";
  REQUIRE(run("synth --seed 11 --out " + base + "d --participants 1 --days 2 "
              "--duration-scale 0.05") == 0);
  REQUIRE(run("extract --in " + base + "d --window 300") == 0);
  std::ifstream in(base + "d/features_w300.csv");
  std::string header;
  REQUIRE(std::getline(in, header));
  std::size_t columns = std::count(header.begin(), header.end(), ',') + 1;
  CHECK(columns == 7 + 85);  // meta/labels + F1..F66 with F4 expanded
  CHECK(header.find("F4_01") != std::string::npos);
  CHECK(header.find("F66") != std::string::npos);
}

TEST_CASE("sweep CSV covers every window size at three levels") {
  fs::path root = g_work / "sweep6";
  fs::create_directories(root);
  std::string base = root.string() + "/";
  REQUIRE(run("synth --seed 13 --out " + base + "d --participants 1 --days 6 "
              "--duration-scale 0.08") == 0);
  REQUIRE(run("sweep-windows --in " + base + "d --out " + base +
              "sw --seed 5 --windows 30,60,120,300,600,1200") == 0);
  // Header + 6 windows x 3 levels for the single participant.
  CHECK(count_lines(base + "sw/sweep.csv") == 1 + 6 * 3);
}

TEST_CASE("usage errors exit 1, data errors exit 2") {
  CHECK(run("definitely-not-a-command") == 1);
  CHECK(run("synth --out missing-seed") == 1);  // --seed is required
  fs::path root = g_work / "errs";
  fs::create_directories(root);
  std::string base = root.string() + "/";
  CHECK(run("extract --in " + base + "nonexistent --window 300 --out " + base +
            "x") == 2);
  // Malformed feature CSV.
  std::ofstream bad(base + "bad.csv");
  bad << "not,a,feature,csv\n1,2,3,4\n";
  bad.close();
  CHECK(run("train --features " + base + "bad.csv --out " + base + "m") == 2);
}

TEST_CASE("outputs carry a manifest with content hashes") {
  fs::path root = g_work / "hashes";
  fs::create_directories(root);
  std::string base = root.string() + "/";
  REQUIRE(run("synth --seed 3 --out " + base + "d --participants 1 --days 2 "
              "--duration-scale 0.05") == 0);
  std::string manifest = slurp(base + "d/manifest.json");
  CHECK(manifest.find("sha256") != std::string::npos);
  CHECK(manifest.find("records_P1.jsonl") != std::string::npos);
  std::string provenance = slurp(base + "d/provenance.json");
  CHECK(provenance.find("\"seed\": 3") != std::string::npos);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <frailwatch-binary> [doctest args]\n");
    return 1;
  }
  g_binary = argv[1];
  g_work = fs::temp_directory_path() / "frailwatch_cli_test";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  doctest::Context context;
  context.applyCommandLine(argc - 1, argv + 1);
  int rc = context.run();
  fs::remove_all(g_work);
  return rc;
}
