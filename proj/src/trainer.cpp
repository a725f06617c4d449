#include "mgdlrc/trainer.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mgdlrc {

GeneratorConfig benchmark_preset() { return {2, 2, 2, 2, 0.8}; }

nlohmann::json RunConfig::to_json() const {
  return {{"game_file", game_file},
          {"generator",
           {{"players", generator.players},
            {"states", generator.states},
            {"actions", generator.actions},
            {"horizon", generator.horizon},
            {"stay_prob", generator.stay_prob}}},
          {"seed", seed},
          {"rounds", rounds},
          {"params", hyperparams_to_json(params)},
          {"record_history", record_history},
          {"track_q_tables", track_q_tables},
          {"metric_stride", metric_stride}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  c.game_file = j.at("game_file").get<std::string>();
  const auto& g = j.at("generator");
  c.generator = {g.at("players").get<int>(), g.at("states").get<int>(), g.at("actions").get<int>(),
                 g.at("horizon").get<int>(), g.at("stay_prob").get<double>()};
  c.seed = j.at("seed").get<std::uint64_t>();
  c.rounds = j.at("rounds").get<int>();
  c.params = hyperparams_from_json(j.at("params"));
  c.record_history = j.at("record_history").get<bool>();
  c.track_q_tables = j.at("track_q_tables").get<bool>();
  c.metric_stride = j.at("metric_stride").get<int>();
  return c;
}

MarkovGame make_game(const RunConfig& config) {
  MarkovGame game = config.game_file.empty()
                        ? generate_random_game(config.seed, config.generator.players,
                                               config.generator.states, config.generator.actions,
                                               config.generator.horizon, config.generator.stay_prob)
                        : MarkovGame::load(config.game_file);
  const ValidationReport report = validate_game(game);
  if (!report.ok) throw std::runtime_error("invalid game: " + report.message);
  return game;
}

namespace {

HyperParams resolve_params(HyperParams p, const MarkovGame& game) {
  if (p.base_eta == 0.0)
    p.base_eta = WeightSchedule::theoretical_eta(game.horizon(), game.num_players());
  if (p.alpha_tilde == 0.0)
    p.alpha_tilde = HyperParams::default_alpha_tilde(p.beta, game.max_actions());
  return p;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw std::runtime_error("metric formatting failed");
  out.append(buf, ptr);
}

}  // namespace

Trainer::Trainer(MarkovGame game, RunConfig config)
    : game_(std::move(game)),
      config_(std::move(config)),
      schedule_(game_.horizon(), 1.0),
      policies_(game_),
      values_(game_),
      br_(game_),
      regret_(game_) {
  if (config_.rounds < 1) throw std::invalid_argument("Trainer: rounds must be >= 1");
  if (config_.metric_stride < 1) throw std::invalid_argument("Trainer: metric_stride must be >= 1");
  config_.params = resolve_params(config_.params, game_);
  schedule_ = WeightSchedule(game_.horizon(), config_.params.base_eta);
  const CellGrid grid = game_.cells();
  learners_.reserve(grid.size());
  for (int cell = 0; cell < grid.size(); ++cell)
    learners_.emplace_back(game_.num_actions(grid.player_of(cell)));
  if (config_.track_q_tables) q_ = QTables(game_);
  result_.horizon = game_.horizon();
}

void Trainer::step() {
  const int t = completed_ + 1;
  const double alpha_t = schedule_.alpha(t);
  const CellGrid grid = game_.cells();
  const double t0 = now_seconds();

  // Phase A: policy updates for all cells.
  for (int cell = 0; cell < grid.size(); ++cell) {
    policy_update(learners_[cell], config_.params);
    if (learners_[cell].lambda_at_floor) ++result_.lambda_floor_hits;
    policies_.x[cell] = learners_[cell].policy;
  }

  // Phase B: backward value pass (plus the optional Q-form pass).
  values_.advance(game_, policies_, alpha_t);
  if (config_.track_q_tables) {
    q_.advance(game_, policies_, alpha_t);
    result_.qv_residual_max =
        std::max(result_.qv_residual_max, qv_identity_residual(game_, q_, values_));
  }

  // Phase C: feedback commits, evaluator updates, metrics.
  const std::vector<Vec> utilities = round_utilities(game_, values_, policies_);
  for (int cell = 0; cell < grid.size(); ++cell) {
    const double baseline = values_.curr[cell];
    commit_feedback(learners_[cell], utilities[cell], baseline, config_.params.baseline, schedule_);
    if (!learners_[cell].dual_avg.allFinite()) {
      std::ostringstream msg;
      msg << "accumulator overflow at round " << t << ", cell (player=" << grid.player_of(cell)
          << ", h=" << grid.stage_of(cell) << ", s=" << grid.state_of(cell) << ")";
      throw std::runtime_error(msg.str());
    }
  }
  br_round_update(game_, policies_, br_, alpha_t);
  regret_round_update(utilities, policies_, regret_, alpha_t);
  completed_ = t;
  wall_spent_ += now_seconds() - t0;

  const GapReport gap = cce_gap(br_, values_, game_);

  if (config_.record_history) {
    RoundRecord rec;
    rec.policy = policies_.x;
    rec.utility = utilities;
    rec.lambda = Vec(grid.size());
    rec.signal.reserve(grid.size());
    for (int cell = 0; cell < grid.size(); ++cell) {
      rec.signal.push_back(learners_[cell].signal);
      rec.lambda[cell] = learners_[cell].lambda;
    }
    rec.delta = gap_stage_profile(br_, values_);
    rec.reg_stage = regret_stage_profile(regret_);
    rec.gap_raw = gap.raw;
    records_.push_back(std::move(rec));
  }

  if (t % config_.metric_stride == 0 || t == config_.rounds) {
    MetricRow row;
    row.round = t;
    row.gap_raw = gap.raw;
    row.gap_clamped = gap.clamped;
    const Vec delta = gap_stage_profile(br_, values_);
    row.delta.assign(delta.data(), delta.data() + delta.size());
    row.max_reg = regret_.reg.maxCoeff();
    double lam_min = learners_[0].lambda, lam_max = learners_[0].lambda, lam_sum = 0.0;
    double path_sum = 0.0;
    for (const LearnerState& learner : learners_) {
      lam_min = std::min(lam_min, learner.lambda);
      lam_max = std::max(lam_max, learner.lambda);
      lam_sum += learner.lambda;
      path_sum += (learner.policy - learner.policy_prev).abs().sum();
    }
    row.lambda_min = lam_min;
    row.lambda_mean = lam_sum / grid.size();
    row.lambda_max = lam_max;
    row.path_len_mean = path_sum / grid.size();
    row.wall_seconds = wall_spent_;
    result_.rows.push_back(std::move(row));
  }
}

void Trainer::run_to(int target) {
  target = std::min(target, config_.rounds);
  while (completed_ < target) step();
}

const RunResult& Trainer::result() {
  result_.v_final = values_.curr;
  result_.v_dag_final = br_.v_dag;
  result_.reg_final = regret_.reg;
  if (config_.record_history) {
    RunHistory history(game_);
    history.params = config_.params;
    history.records = records_;
    history.v_final = values_.curr;
    history.v_dag_final = br_.v_dag;
    history.reg_final = regret_.reg;
    result_.history = std::move(history);
  }
  return result_;
}

std::string RunResult::csv() const {
  std::string out = "# mg-metrics v1 horizon=" + std::to_string(horizon) + "\n";
  out += "round,gap_raw,gap_clamped";
  for (int h = 1; h <= horizon; ++h) out += ",delta_h" + std::to_string(h);
  out += ",max_reg,lambda_min,lambda_mean,lambda_max,path_len_mean\n";
  for (const MetricRow& row : rows) {
    out += std::to_string(row.round);
    out += ',';
    append_double(out, row.gap_raw);
    out += ',';
    append_double(out, row.gap_clamped);
    for (double d : row.delta) {
      out += ',';
      append_double(out, d);
    }
    out += ',';
    append_double(out, row.max_reg);
    out += ',';
    append_double(out, row.lambda_min);
    out += ',';
    append_double(out, row.lambda_mean);
    out += ',';
    append_double(out, row.lambda_max);
    out += ',';
    append_double(out, row.path_len_mean);
    out += '\n';
  }
  return out;
}

nlohmann::json Trainer::checkpoint() const {
  nlohmann::json j;
  j["format"] = "mg-checkpoint-v1";
  j["config"] = config_.to_json();
  j["game"] = game_.to_json();
  j["completed"] = completed_;
  nlohmann::json learners = nlohmann::json::array();
  for (const LearnerState& st : learners_) {
    learners.push_back({{"dual_avg", vec_to_json(st.dual_avg)},
                        {"correction_prev", vec_to_json(st.correction_prev)},
                        {"signal", vec_to_json(st.signal)},
                        {"policy", vec_to_json(st.policy)},
                        {"policy_prev", vec_to_json(st.policy_prev)},
                        {"lambda", st.lambda},
                        {"round", st.round}});
  }
  j["learners"] = std::move(learners);
  j["v_curr"] = vec_to_json(values_.curr);
  if (config_.track_q_tables) j["q_curr"] = vec_to_json(q_.curr);
  nlohmann::json br_m = nlohmann::json::array();
  for (const Vec& acc : br_.m) br_m.push_back(vec_to_json(acc));
  j["br_m"] = std::move(br_m);
  j["v_dag"] = vec_to_json(br_.v_dag);
  nlohmann::json reg_g = nlohmann::json::array();
  for (const Vec& acc : regret_.g) reg_g.push_back(vec_to_json(acc));
  j["regret_g"] = std::move(reg_g);
  j["reg"] = vec_to_json(regret_.reg);
  nlohmann::json rows = nlohmann::json::array();
  for (const MetricRow& row : result_.rows) {
    rows.push_back({{"round", row.round},
                    {"gap_raw", row.gap_raw},
                    {"gap_clamped", row.gap_clamped},
                    {"delta", row.delta},
                    {"max_reg", row.max_reg},
                    {"lambda_min", row.lambda_min},
                    {"lambda_mean", row.lambda_mean},
                    {"lambda_max", row.lambda_max},
                    {"path_len_mean", row.path_len_mean},
                    {"wall_seconds", row.wall_seconds}});
  }
  j["metrics"] = std::move(rows);
  j["qv_residual_max"] = result_.qv_residual_max;
  j["lambda_floor_hits"] = result_.lambda_floor_hits;
  if (config_.record_history) {
    nlohmann::json recs = nlohmann::json::array();
    for (const RoundRecord& rec : records_) {
      nlohmann::json r;
      nlohmann::json policy = nlohmann::json::array();
      for (const Vec& v : rec.policy) policy.push_back(vec_to_json(v));
      nlohmann::json utility = nlohmann::json::array();
      for (const Vec& v : rec.utility) utility.push_back(vec_to_json(v));
      nlohmann::json signal = nlohmann::json::array();
      for (const Vec& v : rec.signal) signal.push_back(vec_to_json(v));
      r["policy"] = std::move(policy);
      r["utility"] = std::move(utility);
      r["signal"] = std::move(signal);
      r["lambda"] = vec_to_json(rec.lambda);
      r["delta"] = vec_to_json(rec.delta);
      r["reg_stage"] = vec_to_json(rec.reg_stage);
      r["gap_raw"] = rec.gap_raw;
      recs.push_back(std::move(r));
    }
    j["records"] = std::move(recs);
  }
  return j;
}

Trainer Trainer::restore(const nlohmann::json& j) {
  if (j.value("format", "") != std::string("mg-checkpoint-v1"))
    throw std::runtime_error("checkpoint: unsupported format/version");
  RunConfig config = RunConfig::from_json(j.at("config"));
  MarkovGame game = MarkovGame::from_json(j.at("game"));
  Trainer trainer(std::move(game), std::move(config));
  trainer.completed_ = j.at("completed").get<int>();
  const auto& learners = j.at("learners");
  if (learners.size() != trainer.learners_.size())
    throw std::runtime_error("checkpoint: learner table shape mismatch");
  for (std::size_t cell = 0; cell < trainer.learners_.size(); ++cell) {
    LearnerState& st = trainer.learners_[cell];
    const auto& lj = learners.at(cell);
    st.dual_avg = vec_from_json(lj.at("dual_avg"));
    st.correction_prev = vec_from_json(lj.at("correction_prev"));
    st.signal = vec_from_json(lj.at("signal"));
    st.policy = vec_from_json(lj.at("policy"));
    st.policy_prev = vec_from_json(lj.at("policy_prev"));
    st.lambda = lj.at("lambda").get<double>();
    st.round = lj.at("round").get<int>();
    trainer.policies_.x[cell] = st.policy;
  }
  trainer.values_.curr = vec_from_json(j.at("v_curr"));
  if (trainer.config_.track_q_tables) trainer.q_.curr = vec_from_json(j.at("q_curr"));
  const auto& br_m = j.at("br_m");
  for (std::size_t cell = 0; cell < trainer.br_.m.size(); ++cell)
    trainer.br_.m[cell] = vec_from_json(br_m.at(cell));
  trainer.br_.v_dag = vec_from_json(j.at("v_dag"));
  const auto& reg_g = j.at("regret_g");
  for (std::size_t cell = 0; cell < trainer.regret_.g.size(); ++cell)
    trainer.regret_.g[cell] = vec_from_json(reg_g.at(cell));
  trainer.regret_.reg = vec_from_json(j.at("reg"));
  for (const auto& rj : j.at("metrics")) {
    MetricRow row;
    row.round = rj.at("round").get<int>();
    row.gap_raw = rj.at("gap_raw").get<double>();
    row.gap_clamped = rj.at("gap_clamped").get<double>();
    row.delta = rj.at("delta").get<std::vector<double>>();
    row.max_reg = rj.at("max_reg").get<double>();
    row.lambda_min = rj.at("lambda_min").get<double>();
    row.lambda_mean = rj.at("lambda_mean").get<double>();
    row.lambda_max = rj.at("lambda_max").get<double>();
    row.path_len_mean = rj.at("path_len_mean").get<double>();
    row.wall_seconds = rj.at("wall_seconds").get<double>();
    trainer.result_.rows.push_back(std::move(row));
  }
  trainer.result_.qv_residual_max = j.at("qv_residual_max").get<double>();
  trainer.result_.lambda_floor_hits = j.at("lambda_floor_hits").get<long>();
  if (trainer.config_.record_history) {
    for (const auto& r : j.at("records")) {
      RoundRecord rec;
      for (const auto& v : r.at("policy")) rec.policy.push_back(vec_from_json(v));
      for (const auto& v : r.at("utility")) rec.utility.push_back(vec_from_json(v));
      for (const auto& v : r.at("signal")) rec.signal.push_back(vec_from_json(v));
      rec.lambda = vec_from_json(r.at("lambda"));
      rec.delta = vec_from_json(r.at("delta"));
      rec.reg_stage = vec_from_json(r.at("reg_stage"));
      rec.gap_raw = r.at("gap_raw").get<double>();
      trainer.records_.push_back(std::move(rec));
    }
  }
  return trainer;
}

RunResult run_self_play(const RunConfig& config) {
  Trainer trainer(make_game(config), config);
  trainer.run_all();
  return trainer.result();
}

}  // namespace mgdlrc
