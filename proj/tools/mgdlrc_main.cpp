// Command-line front end: game generation, self-play training, diagnostics,
// rollout evaluation and plot emission.
//
// Exit codes: 0 success, 1 usage, 2 validation/input failure, 3 check failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "mgdlrc/diagnostics.hpp"
#include "mgdlrc/evaluator.hpp"
#include "mgdlrc/plot.hpp"
#include "mgdlrc/trainer.hpp"

namespace {

using nlohmann::json;

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative output paths land in $MGDLRC_OUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
  const char* dir = std::getenv("MGDLRC_OUT_DIR");
  if (dir == nullptr || *dir == '\0' || path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

// "flags override file": after parsing, fill every option the user did not
// pass from the JSON config.
class ConfigOverlay {
 public:
  ConfigOverlay(CLI::App* cmd, const std::string& path) : cmd_(cmd) {
    if (!path.empty()) config_ = load_json_file(path);
  }

  template <typename T>
  void apply(const std::string& key, T& var) const {
    if (config_.is_null() || !config_.contains(key)) return;
    if (cmd_->count("--" + key) > 0) return;
    var = config_.at(key).get<T>();
  }

 private:
  CLI::App* cmd_;
  json config_ = nullptr;
};

struct GameFlags {
  std::string preset;
  std::string game_file;
  int players = 2, states = 2, actions = 2, horizon = 2;
  double stay_prob = 0.8;
  std::uint64_t seed = 0;
};

void add_generator_flags(CLI::App* cmd, GameFlags& flags, bool with_game_file) {
  cmd->add_option("--preset", flags.preset, "named setup (paper: 2 players, 2 states, 2 actions, horizon 2, sticky 0.8)")
      ->check(CLI::IsMember({"paper"}));
  if (with_game_file) cmd->add_option("--game", flags.game_file, "game JSON file");
  cmd->add_option("-N,--players", flags.players, "number of players")->check(CLI::PositiveNumber);
  cmd->add_option("-S,--states", flags.states, "number of states")->check(CLI::PositiveNumber);
  cmd->add_option("-A,--actions", flags.actions, "actions per player")->check(CLI::PositiveNumber);
  cmd->add_option("-H,--horizon", flags.horizon, "episode length")->check(CLI::PositiveNumber);
  cmd->add_option("--stay-prob", flags.stay_prob, "probability of staying in the current state")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", flags.seed, "generator seed");
}

mgdlrc::GeneratorConfig generator_from_flags(const GameFlags& flags) {
  if (flags.preset == "paper") return mgdlrc::benchmark_preset();
  return {flags.players, flags.states, flags.actions, flags.horizon, flags.stay_prob};
}

double parse_eta(const std::string& text) {
  if (text == "theoretical") return 0.0;  // resolved from the game dimensions
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !(value > 0.0)) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw CLI::ValidationError("--eta", "expected a positive number or 'theoretical'");
  }
}

int cmd_generate(const GameFlags& flags, const std::string& out_path) {
  const mgdlrc::GeneratorConfig gen = generator_from_flags(flags);
  const mgdlrc::MarkovGame game = mgdlrc::generate_random_game(
      flags.seed, gen.players, gen.states, gen.actions, gen.horizon, gen.stay_prob);
  const mgdlrc::ValidationReport report = mgdlrc::validate_game(game);
  if (!report.ok) throw std::runtime_error("generated game failed validation: " + report.message);
  game.save(resolve_out(out_path));
  return 0;
}

struct TrainFlags {
  GameFlags game;
  int rounds = 1000;
  std::string eta = "theoretical";
  double beta = 70.0;
  std::string baseline = "expected_value";
  std::string lambda_rule = "argmax";
  int stride = 1;
  bool record_history = false;
  bool track_q = false;
  std::string out;
  std::string history_out;
  std::string checkpoint_out;
  int checkpoint_at = 0;
  std::string resume;
};

int cmd_train(const TrainFlags& flags) {
  std::optional<mgdlrc::Trainer> trainer;
  if (!flags.resume.empty()) {
    trainer.emplace(mgdlrc::Trainer::restore(load_json_file(flags.resume)));
  } else {
    mgdlrc::RunConfig config;
    config.game_file = flags.game.game_file;
    config.generator = generator_from_flags(flags.game);
    config.seed = flags.game.seed;
    config.rounds = flags.rounds;
    config.params.base_eta = parse_eta(flags.eta);
    config.params.beta = flags.beta;
    config.params.baseline = flags.baseline == "v_value" ? mgdlrc::BaselineMode::v_value
                                                         : mgdlrc::BaselineMode::expected_value;
    config.params.lambda_rule = flags.lambda_rule == "two_case" ? mgdlrc::LambdaRule::two_case
                                                                : mgdlrc::LambdaRule::argmax;
    config.record_history = flags.record_history || !flags.history_out.empty();
    config.track_q_tables = flags.track_q;
    config.metric_stride = flags.stride;
    trainer.emplace(mgdlrc::make_game(config), config);
  }

  if (!flags.checkpoint_out.empty() && flags.checkpoint_at > trainer->completed()) {
    trainer->run_to(flags.checkpoint_at);
    write_file(resolve_out(flags.checkpoint_out), trainer->checkpoint().dump());
  }
  trainer->run_all();
  if (!flags.checkpoint_out.empty() && flags.checkpoint_at == 0)
    write_file(resolve_out(flags.checkpoint_out), trainer->checkpoint().dump());

  const mgdlrc::RunResult& result = trainer->result();
  if (result.lambda_floor_hits > 0)
    std::cerr << "warning: learning-rate search hit the floor " << result.lambda_floor_hits
              << " time(s); signals look pathological\n";
  write_file(resolve_out(flags.out), result.csv());
  if (!flags.history_out.empty()) {
    if (!result.history) throw std::runtime_error("history requested but not recorded");
    result.history->save(resolve_out(flags.history_out));
  }
  return 0;
}

int cmd_verify(const std::string& history_path, const std::string& out_path, std::uint64_t seed) {
  const mgdlrc::RunHistory history = mgdlrc::RunHistory::load(history_path);
  const std::vector<mgdlrc::CheckResult> checks = mgdlrc::run_verification(history, seed);
  const json report = mgdlrc::verification_report(checks);
  const std::string text = report.dump(1) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(resolve_out(out_path), text);
  }
  if (!report.at("pass").get<bool>()) throw CheckFailure("verification failed");
  return 0;
}

int cmd_rollout(const std::string& history_path, long episodes, std::uint64_t seed,
                const std::string& out_path) {
  const mgdlrc::RunHistory history = mgdlrc::RunHistory::load(history_path);
  const mgdlrc::RolloutSummary summary = mgdlrc::rollout_summary(history, episodes, seed);
  json j;
  j["format"] = "mg-rollout-v1";
  j["episodes"] = summary.episodes;
  json players = json::array();
  for (std::size_t i = 0; i < summary.mean.size(); ++i) {
    players.push_back({{"mean", summary.mean[i]},
                       {"std_error", summary.std_error[i]},
                       {"v_reference", summary.v_reference[i]}});
  }
  j["per_player"] = std::move(players);
  j["consistent"] = summary.consistent;
  const std::string text = j.dump(1) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(resolve_out(out_path), text);
  }
  return 0;
}

int cmd_plot(const std::vector<std::string>& csv_paths, const std::string& out_path, bool linear) {
  std::vector<mgdlrc::MetricsCsv> runs;
  runs.reserve(csv_paths.size());
  for (const std::string& path : csv_paths) runs.push_back(mgdlrc::read_metrics_csv(path));
  write_file(resolve_out(out_path), mgdlrc::render_gap_svg(runs, !linear));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-play equilibrium learning in tabular Markov games"};
  app.require_subcommand(1);

  // generate -------------------------------------------------------------
  auto* generate = app.add_subcommand("generate", "write a random game JSON");
  GameFlags gen_flags;
  std::string gen_out, gen_config;
  add_generator_flags(generate, gen_flags, false);
  generate->add_option("-o,--output", gen_out, "output game file")->required();
  generate->add_option("--config", gen_config, "JSON config file (flags override)");

  // train ----------------------------------------------------------------
  auto* train = app.add_subcommand("train", "run self-play and write metrics CSV");
  TrainFlags train_flags;
  std::string train_config;
  add_generator_flags(train, train_flags.game, true);
  train->add_option("-T,--rounds", train_flags.rounds, "number of rounds")
      ->check(CLI::PositiveNumber);
  train->add_option("--eta", train_flags.eta, "base learning rate, or 'theoretical'");
  train->add_option("--beta", train_flags.beta, "regularizer weight (>= 70 for the guarantees)");
  train->add_option("--baseline", train_flags.baseline, "utility baseline")
      ->check(CLI::IsMember({"expected_value", "v_value"}));
  train->add_option("--lambda-rule", train_flags.lambda_rule, "learning-rate selection rule")
      ->check(CLI::IsMember({"argmax", "two_case"}));
  train->add_option("--metric-stride", train_flags.stride, "record metrics every k rounds")
      ->check(CLI::PositiveNumber);
  train->add_flag("--record-history", train_flags.record_history, "keep the full round history");
  train->add_flag("--track-q", train_flags.track_q, "maintain joint-action Q tables alongside");
  train->add_option("-o,--output", train_flags.out, "metrics CSV path")->required();
  train->add_option("--history-out", train_flags.history_out, "write the history archive here");
  train->add_option("--checkpoint-out", train_flags.checkpoint_out, "checkpoint file");
  train->add_option("--checkpoint-at", train_flags.checkpoint_at,
                    "round at which to snapshot (default: end of run)");
  train->add_option("--resume", train_flags.resume, "resume from a checkpoint file");
  train->add_option("--config", train_config, "JSON config file (flags override)");

  // verify ---------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "run the diagnostics suite on a recorded run");
  std::string verify_history, verify_out;
  std::uint64_t verify_seed = 0;
  verify->add_option("--history", verify_history, "history archive")->required();
  verify->add_option("-o,--output", verify_out, "report path (default: stdout)");
  verify->add_option("--seed", verify_seed, "seed for sampled checks");

  // rollout --------------------------------------------------------------
  auto* rollout = app.add_subcommand("rollout", "Monte-Carlo evaluation of a recorded run");
  std::string rollout_history, rollout_out;
  long rollout_episodes = 100000;
  std::uint64_t rollout_seed = 0;
  rollout->add_option("--history", rollout_history, "history archive")->required();
  rollout->add_option("--episodes", rollout_episodes, "number of episodes")
      ->check(CLI::PositiveNumber);
  rollout->add_option("--seed", rollout_seed, "episode sampling seed");
  rollout->add_option("-o,--output", rollout_out, "summary path (default: stdout)");

  // plot -----------------------------------------------------------------
  auto* plot = app.add_subcommand("plot", "render the gap trajectory as SVG");
  std::vector<std::string> plot_csvs;
  std::string plot_out;
  bool plot_linear = false;
  plot->add_option("csv", plot_csvs, "metrics CSV files")->required()->expected(-1);
  plot->add_option("-o,--output", plot_out, "SVG path")->required();
  plot->add_flag("--linear", plot_linear, "linear x axis (default: logarithmic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) {
      const ConfigOverlay overlay(generate, gen_config);
      overlay.apply("preset", gen_flags.preset);
      overlay.apply("players", gen_flags.players);
      overlay.apply("states", gen_flags.states);
      overlay.apply("actions", gen_flags.actions);
      overlay.apply("horizon", gen_flags.horizon);
      overlay.apply("stay-prob", gen_flags.stay_prob);
      overlay.apply("seed", gen_flags.seed);
      return cmd_generate(gen_flags, gen_out);
    }
    if (train->parsed()) {
      const ConfigOverlay overlay(train, train_config);
      overlay.apply("preset", train_flags.game.preset);
      overlay.apply("game", train_flags.game.game_file);
      overlay.apply("players", train_flags.game.players);
      overlay.apply("states", train_flags.game.states);
      overlay.apply("actions", train_flags.game.actions);
      overlay.apply("horizon", train_flags.game.horizon);
      overlay.apply("stay-prob", train_flags.game.stay_prob);
      overlay.apply("seed", train_flags.game.seed);
      overlay.apply("rounds", train_flags.rounds);
      overlay.apply("eta", train_flags.eta);
      overlay.apply("beta", train_flags.beta);
      overlay.apply("baseline", train_flags.baseline);
      overlay.apply("lambda-rule", train_flags.lambda_rule);
      overlay.apply("metric-stride", train_flags.stride);
      overlay.apply("record-history", train_flags.record_history);
      overlay.apply("track-q", train_flags.track_q);
      overlay.apply("history-out", train_flags.history_out);
      overlay.apply("checkpoint-out", train_flags.checkpoint_out);
      overlay.apply("checkpoint-at", train_flags.checkpoint_at);
      overlay.apply("resume", train_flags.resume);
      return cmd_train(train_flags);
    }
    if (verify->parsed()) return cmd_verify(verify_history, verify_out, verify_seed);
    if (rollout->parsed())
      return cmd_rollout(rollout_history, rollout_episodes, rollout_seed, rollout_out);
    if (plot->parsed()) return cmd_plot(plot_csvs, plot_out, plot_linear);
  } catch (const CheckFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
