#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mgdlrc/types.hpp"

namespace mgdlrc {

// Mixed-radix indexing of joint actions.  Player 0's action varies fastest:
// flat = a_0 + A_0 * (a_1 + A_1 * (...)).  Decoded tuples are precomputed so
// the exact-enumeration loops stay cache friendly.
class JointActionSpace {
 public:
  explicit JointActionSpace(std::vector<int> action_counts);

  int num_players() const { return static_cast<int>(counts_.size()); }
  int count(int player) const { return counts_[player]; }
  int max_count() const { return max_count_; }
  int num_joint() const { return num_joint_; }
  const std::vector<int>& counts() const { return counts_; }

  int encode(const std::vector<int>& actions) const;
  std::vector<int> decode(int flat) const;

  // Precomputed decode: action of `player` inside joint action `flat`.
  int action_of(int flat, int player) const {
    return decoded_[static_cast<std::size_t>(flat) * counts_.size() + player];
  }

 private:
  std::vector<int> counts_;
  std::vector<int> decoded_;
  int num_joint_ = 1;
  int max_count_ = 0;
};

// Tabular N-player episodic Markov game.  Immutable after construction in
// library usage; all tables are flat row-major with the transition row over
// successor states contiguous.
class MarkovGame {
 public:
  MarkovGame(int num_players, int horizon, int num_states,
             std::vector<int> action_counts, int initial_state);

  int num_players() const { return num_players_; }
  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int initial_state() const { return initial_state_; }
  const JointActionSpace& joint() const { return joint_; }
  int num_actions(int player) const { return joint_.count(player); }
  int max_actions() const { return joint_.max_count(); }
  CellGrid cells() const { return {num_players_, horizon_, num_states_}; }

  // stage h is 0-based throughout the code.
  double reward(int player, int h, int s, int flat_joint) const {
    return rewards_[reward_index(player, h, s, flat_joint)];
  }
  void set_reward(int player, int h, int s, int flat_joint, double v) {
    rewards_[reward_index(player, h, s, flat_joint)] = v;
  }

  double transition(int h, int s, int flat_joint, int next) const {
    return transitions_[transition_index(h, s, flat_joint) + next];
  }
  Eigen::Map<const Vec> transition_row(int h, int s, int flat_joint) const {
    return {transitions_.data() + transition_index(h, s, flat_joint),
            static_cast<Eigen::Index>(num_states_)};
  }
  void set_transition_row(int h, int s, int flat_joint, const Vec& row);

  nlohmann::json to_json() const;
  static MarkovGame from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static MarkovGame load(const std::string& path);

 private:
  std::size_t reward_index(int i, int h, int s, int a) const {
    return ((static_cast<std::size_t>(i) * horizon_ + h) * num_states_ + s) * joint_.num_joint() + a;
  }
  std::size_t transition_index(int h, int s, int a) const {
    return ((static_cast<std::size_t>(h) * num_states_ + s) * joint_.num_joint() + a) * num_states_;
  }

  int num_players_;
  int horizon_;
  int num_states_;
  int initial_state_;
  JointActionSpace joint_;
  std::vector<double> rewards_;      // [i][h][s][flat_joint]
  std::vector<double> transitions_;  // [h][s][flat_joint][s']
};

struct ValidationReport {
  bool ok = true;
  std::string message;  // first violated constraint, with indices
};

ValidationReport validate_game(const MarkovGame& game);

// Random instance with rewards iid uniform on [0,1] and state-only sticky
// transitions: stay with stay_prob, remaining mass split uniformly over the
// other S-1 states.  (S > 2 generalizes the two-state setup this mirrors;
// S = 1 is absorbing regardless of stay_prob.)  Deterministic given seed:
// draws come from mt19937_64 mapped to [0,1) via the top 53 bits, so the
// corpus is reproducible across platforms.
MarkovGame generate_random_game(std::uint64_t seed, int num_players, int num_states,
                                int actions_per_player, int horizon, double stay_prob);

// Expected utility of each own action against the other players' mixed
// policies:
//
//   nu[a_i] = sum_{a_-i} prod_{k != i} pi_k(a_k) *
//             (r_i(h, s, a) + sum_{s'} P_h(s'|s, a) * next_values[s'])
//
// by exact enumeration over joint actions.  `policies` holds one
// distribution per player at (h, s); entry `player` is ignored.
Vec marginal_utility(const MarkovGame& game, int player, int h, int s,
                     const Vec& next_values, const std::vector<Vec>& policies);

}  // namespace mgdlrc
