#include "mgdlrc/game.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mgdlrc {

JointActionSpace::JointActionSpace(std::vector<int> action_counts)
    : counts_(std::move(action_counts)) {
  if (counts_.empty()) throw std::invalid_argument("JointActionSpace: no players");
  for (int c : counts_) {
    if (c < 1) throw std::invalid_argument("JointActionSpace: action count must be >= 1");
    if (num_joint_ > (1 << 24) / c)
      throw std::invalid_argument("JointActionSpace: joint action space too large");
    num_joint_ *= c;
    max_count_ = std::max(max_count_, c);
  }
  decoded_.resize(static_cast<std::size_t>(num_joint_) * counts_.size());
  for (int flat = 0; flat < num_joint_; ++flat) {
    int rest = flat;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      decoded_[static_cast<std::size_t>(flat) * counts_.size() + i] = rest % counts_[i];
      rest /= counts_[i];
    }
  }
}

int JointActionSpace::encode(const std::vector<int>& actions) const {
  if (actions.size() != counts_.size())
    throw std::invalid_argument("JointActionSpace::encode: wrong tuple length");
  int flat = 0;
  for (int i = num_players() - 1; i >= 0; --i) {
    if (actions[i] < 0 || actions[i] >= counts_[i])
      throw std::invalid_argument("JointActionSpace::encode: action out of range");
    flat = flat * counts_[i] + actions[i];
  }
  return flat;
}

std::vector<int> JointActionSpace::decode(int flat) const {
  std::vector<int> actions(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) actions[i] = action_of(flat, static_cast<int>(i));
  return actions;
}

MarkovGame::MarkovGame(int num_players, int horizon, int num_states,
                       std::vector<int> action_counts, int initial_state)
    : num_players_(num_players),
      horizon_(horizon),
      num_states_(num_states),
      initial_state_(initial_state),
      joint_(std::move(action_counts)) {
  if (num_players < 1 || horizon < 1 || num_states < 1)
    throw std::invalid_argument("MarkovGame: dimensions must be >= 1");
  if (joint_.num_players() != num_players)
    throw std::invalid_argument("MarkovGame: action_counts size != num_players");
  if (initial_state < 0 || initial_state >= num_states)
    throw std::invalid_argument("MarkovGame: initial state out of range");
  rewards_.assign(static_cast<std::size_t>(num_players) * horizon * num_states * joint_.num_joint(), 0.0);
  transitions_.assign(static_cast<std::size_t>(horizon) * num_states * joint_.num_joint() * num_states, 0.0);
  // Default dynamics: stay in place with probability 1, zero reward.
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < joint_.num_joint(); ++a)
        transitions_[transition_index(h, s, a) + s] = 1.0;
}

void MarkovGame::set_transition_row(int h, int s, int flat_joint, const Vec& row) {
  if (row.size() != num_states_)
    throw std::invalid_argument("set_transition_row: wrong row length");
  double* dst = transitions_.data() + transition_index(h, s, flat_joint);
  for (int i = 0; i < num_states_; ++i) dst[i] = row[i];
}

ValidationReport validate_game(const MarkovGame& game) {
  const int joint = game.joint().num_joint();
  for (int i = 0; i < game.num_players(); ++i)
    for (int h = 0; h < game.horizon(); ++h)
      for (int s = 0; s < game.num_states(); ++s)
        for (int a = 0; a < joint; ++a) {
          const double r = game.reward(i, h, s, a);
          if (!(r >= 0.0 && r <= 1.0)) {
            std::ostringstream msg;
            msg << "reward out of [0,1] at (player=" << i << ", h=" << h << ", s=" << s
                << ", a=" << a << "): " << r;
            return {false, msg.str()};
          }
        }
  for (int h = 0; h < game.horizon(); ++h)
    for (int s = 0; s < game.num_states(); ++s)
      for (int a = 0; a < joint; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < game.num_states(); ++s2) {
          const double p = game.transition(h, s, a, s2);
          if (!(p >= 0.0)) {
            std::ostringstream msg;
            msg << "negative transition probability at (h=" << h << ", s=" << s << ", a=" << a
                << ", s'=" << s2 << "): " << p;
            return {false, msg.str()};
          }
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
          std::ostringstream msg;
          msg << "transition row does not sum to 1 at (h=" << h << ", s=" << s << ", a=" << a
              << "): sum=" << sum;
          return {false, msg.str()};
        }
      }
  return {};
}

MarkovGame generate_random_game(std::uint64_t seed, int num_players, int num_states,
                                int actions_per_player, int horizon, double stay_prob) {
  if (num_players < 1 || num_states < 1 || actions_per_player < 1 || horizon < 1)
    throw std::invalid_argument("generate_random_game: dimensions must be >= 1");
  if (!(stay_prob >= 0.0 && stay_prob <= 1.0))
    throw std::invalid_argument("generate_random_game: stay_prob must be in [0,1]");

  MarkovGame game(num_players, horizon, num_states,
                  std::vector<int>(num_players, actions_per_player), 0);
  std::mt19937_64 rng(seed);
  const int joint = game.joint().num_joint();
  for (int i = 0; i < num_players; ++i)
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < joint; ++a) game.set_reward(i, h, s, a, uniform_unit(rng));

  // Transitions are state-only and identical across joint actions.
  Vec row(num_states);
  for (int s = 0; s < num_states; ++s) {
    if (num_states == 1) {
      row[0] = 1.0;
    } else {
      const double leave = (1.0 - stay_prob) / (num_states - 1);
      row.setConstant(leave);
      row[s] = stay_prob;
    }
    for (int h = 0; h < horizon; ++h)
      for (int a = 0; a < joint; ++a) game.set_transition_row(h, s, a, row);
  }
  return game;
}

Vec marginal_utility(const MarkovGame& game, int player, int h, int s,
                     const Vec& next_values, const std::vector<Vec>& policies) {
  const JointActionSpace& space = game.joint();
  if (static_cast<int>(policies.size()) != game.num_players())
    throw std::invalid_argument("marginal_utility: one policy per player required");
  for (int k = 0; k < game.num_players(); ++k)
    if (k != player && policies[k].size() != space.count(k))
      throw std::invalid_argument("marginal_utility: policy length mismatch");
  if (next_values.size() != game.num_states())
    throw std::invalid_argument("marginal_utility: next_values length mismatch");

  Vec utility = Vec::Zero(space.count(player));
  for (int a = 0; a < space.num_joint(); ++a) {
    double p = 1.0;
    for (int k = 0; k < game.num_players(); ++k) {
      if (k == player) continue;
      p *= policies[k][space.action_of(a, k)];
    }
    if (p == 0.0) continue;
    const double continuation = (game.transition_row(h, s, a) * next_values).sum();
    utility[space.action_of(a, player)] += p * (game.reward(player, h, s, a) + continuation);
  }
  return utility;
}

nlohmann::json MarkovGame::to_json() const {
  nlohmann::json j;
  j["num_players"] = num_players_;
  j["horizon"] = horizon_;
  j["num_states"] = num_states_;
  j["action_counts"] = joint_.counts();
  j["initial_state"] = initial_state_;
  const int joint = joint_.num_joint();
  nlohmann::json rewards = nlohmann::json::array();
  for (int i = 0; i < num_players_; ++i) {
    nlohmann::json per_stage = nlohmann::json::array();
    for (int h = 0; h < horizon_; ++h) {
      nlohmann::json per_state = nlohmann::json::array();
      for (int s = 0; s < num_states_; ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (int a = 0; a < joint; ++a) row.push_back(reward(i, h, s, a));
        per_state.push_back(std::move(row));
      }
      per_stage.push_back(std::move(per_state));
    }
    rewards.push_back(std::move(per_stage));
  }
  j["rewards"] = std::move(rewards);
  nlohmann::json transitions = nlohmann::json::array();
  for (int h = 0; h < horizon_; ++h) {
    nlohmann::json per_state = nlohmann::json::array();
    for (int s = 0; s < num_states_; ++s) {
      nlohmann::json per_action = nlohmann::json::array();
      for (int a = 0; a < joint; ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (int s2 = 0; s2 < num_states_; ++s2) row.push_back(transition(h, s, a, s2));
        per_action.push_back(std::move(row));
      }
      per_state.push_back(std::move(per_action));
    }
    transitions.push_back(std::move(per_state));
  }
  j["transitions"] = std::move(transitions);
  return j;
}

MarkovGame MarkovGame::from_json(const nlohmann::json& j) {
  MarkovGame game(j.at("num_players").get<int>(), j.at("horizon").get<int>(),
                  j.at("num_states").get<int>(), j.at("action_counts").get<std::vector<int>>(),
                  j.at("initial_state").get<int>());
  const int joint = game.joint().num_joint();
  const auto& rewards = j.at("rewards");
  for (int i = 0; i < game.num_players_; ++i)
    for (int h = 0; h < game.horizon_; ++h)
      for (int s = 0; s < game.num_states_; ++s)
        for (int a = 0; a < joint; ++a)
          game.set_reward(i, h, s, a, rewards.at(i).at(h).at(s).at(a).get<double>());
  const auto& transitions = j.at("transitions");
  for (int h = 0; h < game.horizon_; ++h)
    for (int s = 0; s < game.num_states_; ++s)
      for (int a = 0; a < joint; ++a) {
        const auto& row = transitions.at(h).at(s).at(a);
        for (int s2 = 0; s2 < game.num_states_; ++s2)
          game.transitions_[game.transition_index(h, s, a) + s2] = row.at(s2).get<double>();
      }
  return game;
}

void MarkovGame::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("MarkovGame::save: cannot open " + path);
  out << to_json().dump(1) << "\n";
  if (!out) throw std::runtime_error("MarkovGame::save: write failed for " + path);
}

MarkovGame MarkovGame::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("MarkovGame::load: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

}  // namespace mgdlrc
