#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mgdlrc/evaluator.hpp"
#include "mgdlrc/history.hpp"
#include "mgdlrc/learner.hpp"
#include "mgdlrc/values.hpp"
#include "mgdlrc/weights.hpp"

namespace mgdlrc {

struct GeneratorConfig {
  int players = 2;
  int states = 2;
  int actions = 2;
  int horizon = 2;
  double stay_prob = 0.8;
};

// The built-in 2-player / 2-state / 2-action, horizon-2 benchmark setup with
// sticky dynamics; the CLI exposes it as --preset paper.
GeneratorConfig benchmark_preset();

struct RunConfig {
  std::string game_file;      // load from file when nonempty
  GeneratorConfig generator;  // otherwise generate with `seed`
  std::uint64_t seed = 0;
  int rounds = 1000;
  HyperParams params;  // base_eta == 0 resolves to the theoretical rate,
                       // alpha_tilde == 0 to the default for the game's A_max
  bool record_history = false;
  bool track_q_tables = false;
  int metric_stride = 1;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

struct MetricRow {
  int round = 0;
  double gap_raw = 0.0;
  double gap_clamped = 0.0;
  std::vector<double> delta;  // per stage
  double max_reg = 0.0;
  double lambda_min = 0.0;
  double lambda_mean = 0.0;
  double lambda_max = 0.0;
  double path_len_mean = 0.0;
  double wall_seconds = 0.0;  // informational; never serialized into the CSV
};

struct RunResult {
  int horizon = 0;
  std::vector<MetricRow> rows;
  double qv_residual_max = 0.0;
  long lambda_floor_hits = 0;
  Eigen::ArrayXd v_final, v_dag_final, reg_final;
  std::optional<RunHistory> history;

  // Deterministic text: schema comment, header, one row per recorded round.
  std::string csv() const;
};

// Builds the configured game (file or generator) and validates it.
MarkovGame make_game(const RunConfig& config);

// Round loop with fixed phase order: (A) policy updates for every cell,
// (B) backward value pass, (C) feedback commits + evaluator updates +
// metrics.  Deterministic given config; single-owner, no internal RNG.
class Trainer {
 public:
  Trainer(MarkovGame game, RunConfig config);

  const MarkovGame& game() const { return game_; }
  const RunConfig& config() const { return config_; }
  const HyperParams& params() const { return config_.params; }
  int completed() const { return completed_; }

  // Advance to round `target` (clamped to config.rounds).
  void run_to(int target);
  void run_all() { run_to(config_.rounds); }

  // Finalizes v/v_dag/regret snapshots (and the history when recording);
  // callable repeatedly.
  const RunResult& result();

  nlohmann::json checkpoint() const;
  static Trainer restore(const nlohmann::json& j);

 private:
  void step();

  MarkovGame game_;
  RunConfig config_;
  WeightSchedule schedule_;
  std::vector<LearnerState> learners_;
  PolicyTable policies_;
  ValueTables values_;
  QTables q_;
  BestResponseState br_;
  RegretState regret_;
  RunResult result_;
  std::vector<RoundRecord> records_;
  int completed_ = 0;
  double wall_spent_ = 0.0;  // informational; restarts at zero on restore
};

// Convenience wrapper: build, run, finalize.
RunResult run_self_play(const RunConfig& config);

}  // namespace mgdlrc
