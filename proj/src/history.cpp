#include "mgdlrc/history.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace mgdlrc {

namespace {

nlohmann::json vec_list_to_json(const std::vector<Vec>& vs) {
  nlohmann::json out = nlohmann::json::array();
  for (const Vec& v : vs) out.push_back(vec_to_json(v));
  return out;
}

std::vector<Vec> vec_list_from_json(const nlohmann::json& j) {
  std::vector<Vec> out;
  out.reserve(j.size());
  for (const auto& item : j) out.push_back(vec_from_json(item));
  return out;
}

std::string baseline_name(BaselineMode mode) {
  return mode == BaselineMode::expected_value ? "expected_value" : "v_value";
}

BaselineMode baseline_from_name(const std::string& name) {
  if (name == "expected_value") return BaselineMode::expected_value;
  if (name == "v_value") return BaselineMode::v_value;
  throw std::invalid_argument("unknown baseline mode: " + name);
}

std::string rule_name(LambdaRule rule) {
  return rule == LambdaRule::argmax ? "argmax" : "two_case";
}

LambdaRule rule_from_name(const std::string& name) {
  if (name == "argmax") return LambdaRule::argmax;
  if (name == "two_case") return LambdaRule::two_case;
  throw std::invalid_argument("unknown lambda rule: " + name);
}

}  // namespace

nlohmann::json vec_to_json(const Eigen::ArrayXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::ArrayXd vec_from_json(const nlohmann::json& j) {
  Eigen::ArrayXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& item : j) v[i++] = item.get<double>();
  return v;
}

nlohmann::json hyperparams_to_json(const HyperParams& p) {
  return {{"beta", p.beta},
          {"alpha_tilde", p.alpha_tilde},
          {"base_eta", p.base_eta},
          {"lambda_floor", p.lambda_floor},
          {"lambda_cap", p.lambda_cap},
          {"baseline", baseline_name(p.baseline)},
          {"lambda_rule", rule_name(p.lambda_rule)},
          {"solver_grid", p.solver_grid},
          {"refine_tol", p.refine_tol}};
}

HyperParams hyperparams_from_json(const nlohmann::json& j) {
  HyperParams p;
  p.beta = j.at("beta").get<double>();
  p.alpha_tilde = j.at("alpha_tilde").get<double>();
  p.base_eta = j.at("base_eta").get<double>();
  p.lambda_floor = j.at("lambda_floor").get<double>();
  p.lambda_cap = j.at("lambda_cap").get<double>();
  p.baseline = baseline_from_name(j.at("baseline").get<std::string>());
  p.lambda_rule = rule_from_name(j.at("lambda_rule").get<std::string>());
  p.solver_grid = j.at("solver_grid").get<int>();
  p.refine_tol = j.at("refine_tol").get<double>();
  return p;
}

std::vector<PolicyTable> RunHistory::policy_tables() const {
  std::vector<PolicyTable> tables;
  tables.reserve(records.size());
  for (const RoundRecord& rec : records) {
    PolicyTable table(game);
    table.x = rec.policy;
    tables.push_back(std::move(table));
  }
  return tables;
}

nlohmann::json RunHistory::to_json() const {
  nlohmann::json j;
  j["format"] = "mg-history-v1";
  j["game"] = game.to_json();
  j["params"] = hyperparams_to_json(params);
  nlohmann::json rounds = nlohmann::json::array();
  for (const RoundRecord& rec : records) {
    nlohmann::json r;
    r["policy"] = vec_list_to_json(rec.policy);
    r["utility"] = vec_list_to_json(rec.utility);
    r["signal"] = vec_list_to_json(rec.signal);
    r["lambda"] = vec_to_json(rec.lambda);
    r["delta"] = vec_to_json(rec.delta);
    r["reg_stage"] = vec_to_json(rec.reg_stage);
    r["gap_raw"] = rec.gap_raw;
    rounds.push_back(std::move(r));
  }
  j["records"] = std::move(rounds);
  j["v_final"] = vec_to_json(v_final);
  j["v_dag_final"] = vec_to_json(v_dag_final);
  j["reg_final"] = vec_to_json(reg_final);
  return j;
}

RunHistory RunHistory::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != std::string("mg-history-v1"))
    throw std::runtime_error("RunHistory: unsupported format");
  RunHistory history(MarkovGame::from_json(j.at("game")));
  history.params = hyperparams_from_json(j.at("params"));
  for (const auto& r : j.at("records")) {
    RoundRecord rec;
    rec.policy = vec_list_from_json(r.at("policy"));
    rec.utility = vec_list_from_json(r.at("utility"));
    rec.signal = vec_list_from_json(r.at("signal"));
    rec.lambda = vec_from_json(r.at("lambda"));
    rec.delta = vec_from_json(r.at("delta"));
    rec.reg_stage = vec_from_json(r.at("reg_stage"));
    rec.gap_raw = r.at("gap_raw").get<double>();
    history.records.push_back(std::move(rec));
  }
  history.v_final = vec_from_json(j.at("v_final"));
  history.v_dag_final = vec_from_json(j.at("v_dag_final"));
  history.reg_final = vec_from_json(j.at("reg_final"));
  return history;
}

void RunHistory::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RunHistory::save: cannot open " + path);
  out << to_json().dump() << "\n";
  if (!out) throw std::runtime_error("RunHistory::save: write failed for " + path);
}

RunHistory RunHistory::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("RunHistory::load: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

}  // namespace mgdlrc
