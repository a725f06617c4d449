#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mgdlrc/game.hpp"
#include "mgdlrc/learner.hpp"
#include "mgdlrc/values.hpp"

namespace mgdlrc {

// One recorded round: everything the diagnostics and rollout need to replay
// the run without re-deriving learner internals.
struct RoundRecord {
  std::vector<Vec> policy;   // x_t per cell
  std::vector<Vec> utility;  // nu_t per cell
  std::vector<Vec> signal;   // R_t per cell
  Vec lambda;                // per cell
  Vec delta;                 // per-stage max best-response gap
  Vec reg_stage;             // per-stage max weighted regret
  double gap_raw = 0.0;      // initial-state gap this round
};

struct RunHistory {
  MarkovGame game;
  HyperParams params;
  std::vector<RoundRecord> records;
  Eigen::ArrayXd v_final;      // [i][h][s]
  Eigen::ArrayXd v_dag_final;  // [i][h][s]
  Eigen::ArrayXd reg_final;    // [i][h][s]

  explicit RunHistory(MarkovGame g) : game(std::move(g)) {}

  int rounds() const { return static_cast<int>(records.size()); }
  CellGrid grid() const { return game.cells(); }

  // Policy tables per round, for rollout sampling.
  std::vector<PolicyTable> policy_tables() const;

  nlohmann::json to_json() const;
  static RunHistory from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static RunHistory load(const std::string& path);
};

// JSON helpers shared by history and checkpoint serialization.
nlohmann::json vec_to_json(const Eigen::ArrayXd& v);
Eigen::ArrayXd vec_from_json(const nlohmann::json& j);
nlohmann::json hyperparams_to_json(const HyperParams& p);
HyperParams hyperparams_from_json(const nlohmann::json& j);

}  // namespace mgdlrc
