#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWorkDir = fs::temp_directory_path() / "mgdlrc_cli_tests";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MGDLRC_CLI_PATH) + " " + args + " >" +
                          (kWorkDir / "stdout.txt").string() + " 2>" +
                          (kWorkDir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string in_dir(const std::string& name) { return (kWorkDir / name).string(); }

struct DirSetup {
  DirSetup() {
    fs::remove_all(kWorkDir);
    fs::create_directories(kWorkDir);
  }
} const dir_setup;

}  // namespace

TEST_CASE("generate") {
  SUBCASE("preset writes a valid game file") {
    CHECK(run_cli("generate --preset paper --seed 3 -o " + in_dir("game3.json")) == 0);
    const nlohmann::json game = nlohmann::json::parse(slurp(kWorkDir / "game3.json"));
    CHECK(game.at("num_players") == 2);
    CHECK(game.at("horizon") == 2);
    CHECK(game.at("num_states") == 2);
    CHECK(game.at("action_counts") == nlohmann::json::array({2, 2}));
    CHECK(game.at("transitions").at(0).at(0).at(0).at(0).get<double>() == 0.8);
  }
  SUBCASE("explicit dimensions") {
    CHECK(run_cli("generate -N 3 -S 4 -A 3 -H 4 --seed 1 -o " + in_dir("big.json")) == 0);
    const nlohmann::json game = nlohmann::json::parse(slurp(kWorkDir / "big.json"));
    CHECK(game.at("num_players") == 3);
    CHECK(game.at("rewards").size() == 3);
  }
  SUBCASE("missing output path is a usage error") {
    CHECK(run_cli("generate --preset paper --seed 3") == 1);
  }
  SUBCASE("bad flag value is a usage error") {
    CHECK(run_cli("generate --preset nope --seed 3 -o " + in_dir("x.json")) == 1);
  }
}

TEST_CASE("train") {
  SUBCASE("preset run emits the CSV schema") {
    CHECK(run_cli("train --preset paper --seed 0 -T 50 -o " + in_dir("run0.csv")) == 0);
    const std::string csv = slurp(kWorkDir / "run0.csv");
    CHECK(csv.rfind("# mg-metrics v1 horizon=2", 0) == 0);
    CHECK(csv.find("round,gap_raw,gap_clamped,delta_h1,delta_h2,max_reg,lambda_min,lambda_mean,"
                   "lambda_max,path_len_mean") != std::string::npos);
  }
  SUBCASE("single round gives a single data row") {
    CHECK(run_cli("train --preset paper --seed 0 -T 1 -o " + in_dir("tiny.csv")) == 0);
    const std::string csv = slurp(kWorkDir / "tiny.csv");
    int rows = 0;
    for (char c : csv)
      if (c == '\n') ++rows;
    CHECK(rows == 3);  // comment + header + one data row
  }
  SUBCASE("identical invocations produce byte-identical CSVs") {
    CHECK(run_cli("train --preset paper --seed 4 -T 120 -o " + in_dir("det_a.csv")) == 0);
    CHECK(run_cli("train --preset paper --seed 4 -T 120 -o " + in_dir("det_b.csv")) == 0);
    CHECK(slurp(kWorkDir / "det_a.csv") == slurp(kWorkDir / "det_b.csv"));
  }
  SUBCASE("eta settings change the run") {
    CHECK(run_cli("train --preset paper --seed 2 -T 80 --eta theoretical -o " +
                  in_dir("eta_t.csv")) == 0);
    CHECK(run_cli("train --preset paper --seed 2 -T 80 --eta 0.5 -o " + in_dir("eta_f.csv")) == 0);
    CHECK(slurp(kWorkDir / "eta_t.csv") != slurp(kWorkDir / "eta_f.csv"));
  }
  SUBCASE("training from a game file") {
    REQUIRE(run_cli("generate --preset paper --seed 9 -o " + in_dir("game9.json")) == 0);
    CHECK(run_cli("train --game " + in_dir("game9.json") + " -T 30 -o " + in_dir("file_run.csv")) ==
          0);
    // Same game via the generator path gives the same stream.
    CHECK(run_cli("train --preset paper --seed 9 -T 30 -o " + in_dir("gen_run.csv")) == 0);
    CHECK(slurp(kWorkDir / "file_run.csv") == slurp(kWorkDir / "gen_run.csv"));
  }
  SUBCASE("invalid game file exits with the validation code") {
    std::ofstream bad(kWorkDir / "bad_game.json");
    bad << "{\"num_players\": 2}";
    bad.close();
    CHECK(run_cli("train --game " + in_dir("bad_game.json") + " -T 5 -o " + in_dir("bad.csv")) ==
          2);
  }
  SUBCASE("checkpoint and resume reproduce the straight run") {
    CHECK(run_cli("train --preset paper --seed 5 -T 100 -o " + in_dir("straight.csv")) == 0);
    CHECK(run_cli("train --preset paper --seed 5 -T 100 --checkpoint-at 50 --checkpoint-out " +
                  in_dir("ck.json") + " -o " + in_dir("with_ck.csv")) == 0);
    CHECK(slurp(kWorkDir / "straight.csv") == slurp(kWorkDir / "with_ck.csv"));
    CHECK(run_cli("train --resume " + in_dir("ck.json") + " -o " + in_dir("resumed.csv")) == 0);
    CHECK(slurp(kWorkDir / "resumed.csv") == slurp(kWorkDir / "straight.csv"));
  }
  SUBCASE("config file supplies defaults, flags override") {
    std::ofstream cfg(kWorkDir / "train_cfg.json");
    cfg << R"({"preset": "paper", "seed": 4, "rounds": 120})";
    cfg.close();
    CHECK(run_cli("train --config " + in_dir("train_cfg.json") + " -o " + in_dir("cfg_run.csv")) ==
          0);
    CHECK(slurp(kWorkDir / "cfg_run.csv") == slurp(kWorkDir / "det_a.csv"));
    // Flag wins over the file value.
    CHECK(run_cli("train --config " + in_dir("train_cfg.json") + " -T 1 -o " +
                  in_dir("cfg_run2.csv")) == 0);
    int rows = 0;
    for (char c : slurp(kWorkDir / "cfg_run2.csv"))
      if (c == '\n') ++rows;
    CHECK(rows == 3);
  }
}

TEST_CASE("verify and rollout") {
  REQUIRE(run_cli("train --preset paper --seed 6 -T 120 --history-out " + in_dir("hist.json") +
                  " -o " + in_dir("hist_run.csv")) == 0);
  SUBCASE("verify writes a passing report") {
    CHECK(run_cli("verify --history " + in_dir("hist.json") + " -o " + in_dir("report.json")) ==
          0);
    const nlohmann::json report = nlohmann::json::parse(slurp(kWorkDir / "report.json"));
    CHECK(report.at("pass").get<bool>());
    CHECK(report.at("checks").size() >= 8);
  }
  SUBCASE("a tampered history fails verification with exit 3") {
    nlohmann::json hist = nlohmann::json::parse(slurp(kWorkDir / "hist.json"));
    hist["records"][40]["lambda"][0] = 0.25;  // inconsistent with the recorded policy
    std::ofstream out(kWorkDir / "tampered.json");
    out << hist.dump();
    out.close();
    CHECK(run_cli("verify --history " + in_dir("tampered.json") + " -o " +
                  in_dir("tampered_report.json")) == 3);
  }
  SUBCASE("rollout summary is consistent with the recorded values") {
    CHECK(run_cli("rollout --history " + in_dir("hist.json") + " --episodes 20000 --seed 1 -o " +
                  in_dir("roll.json")) == 0);
    const nlohmann::json summary = nlohmann::json::parse(slurp(kWorkDir / "roll.json"));
    CHECK(summary.at("consistent").get<bool>());
    CHECK(summary.at("per_player").size() == 2);
  }
  SUBCASE("zero episodes is a usage error") {
    CHECK(run_cli("rollout --history " + in_dir("hist.json") + " --episodes 0 -o " +
                  in_dir("roll0.json")) == 1);
  }
  SUBCASE("missing history file is an input error") {
    CHECK(run_cli("rollout --history " + in_dir("no_such.json") + " -o " + in_dir("r.json")) == 2);
  }
}

TEST_CASE("plot") {
  for (int s = 0; s < 3; ++s) {
    REQUIRE(run_cli("train --preset paper --seed " + std::to_string(s) + " -T 60 -o " +
                    in_dir("plot" + std::to_string(s) + ".csv")) == 0);
  }
  SUBCASE("multiple runs render a band, deterministically") {
    const std::string csvs =
        in_dir("plot0.csv") + " " + in_dir("plot1.csv") + " " + in_dir("plot2.csv");
    CHECK(run_cli("plot " + csvs + " -o " + in_dir("band.svg")) == 0);
    const std::string svg = slurp(kWorkDir / "band.svg");
    CHECK(svg.find("<polygon") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(run_cli("plot " + csvs + " -o " + in_dir("band2.svg")) == 0);
    CHECK(slurp(kWorkDir / "band2.svg") == svg);
  }
  SUBCASE("single run renders the line only") {
    CHECK(run_cli("plot " + in_dir("plot0.csv") + " -o " + in_dir("line.svg")) == 0);
    const std::string svg = slurp(kWorkDir / "line.svg");
    CHECK(svg.find("<polygon") == std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
  }
  SUBCASE("linear axis flag") {
    CHECK(run_cli("plot --linear " + in_dir("plot0.csv") + " -o " + in_dir("lin.svg")) == 0);
    CHECK(slurp(kWorkDir / "lin.svg") != slurp(kWorkDir / "line.svg"));
  }
  SUBCASE("empty csv is rejected with the line named") {
    std::ofstream empty(kWorkDir / "empty.csv");
    empty << "";
    empty.close();
    CHECK(run_cli("plot " + in_dir("empty.csv") + " -o " + in_dir("none.svg")) == 2);
    std::ofstream malformed(kWorkDir / "malformed.csv");
    malformed << "round,gap_raw\n1,0.5\n2,not_a_number\n";
    malformed.close();
    CHECK(run_cli("plot " + in_dir("malformed.csv") + " -o " + in_dir("none.svg")) == 2);
    const std::string err = slurp(kWorkDir / "stderr.txt");
    CHECK(err.find(":3:") != std::string::npos);  // offending line number
  }
}

TEST_CASE("output directory env var") {
  const fs::path outdir = kWorkDir / "envout";
  fs::create_directories(outdir);
  setenv("MGDLRC_OUT_DIR", outdir.string().c_str(), 1);
  CHECK(run_cli("generate --preset paper --seed 0 -o env_game.json") == 0);
  unsetenv("MGDLRC_OUT_DIR");
  CHECK(fs::exists(outdir / "env_game.json"));
}
