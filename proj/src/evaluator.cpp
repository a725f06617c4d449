#include "mgdlrc/evaluator.hpp"

#include <algorithm>
#include <cmath>

#include "mgdlrc/history.hpp"

namespace mgdlrc {

BestResponseState::BestResponseState(const MarkovGame& game) : grid(game.cells()) {
  m.reserve(grid.size());
  for (int cell = 0; cell < grid.size(); ++cell)
    m.push_back(Vec::Zero(game.num_actions(grid.player_of(cell))));
  v_dag = Eigen::ArrayXd::Zero(grid.size());
}

Vec BestResponseState::stage(int i, int h) const {
  Vec out = Vec::Zero(grid.states);
  if (h >= grid.horizon) return out;
  for (int s = 0; s < grid.states; ++s) out[s] = v_dag[grid.index(i, h, s)];
  return out;
}

void br_round_update(const MarkovGame& game, const PolicyTable& policies,
                     BestResponseState& state, double alpha_t) {
  const CellGrid& grid = state.grid;
  for (int h = grid.horizon - 1; h >= 0; --h)
    for (int s = 0; s < grid.states; ++s) {
      const std::vector<Vec> pi = policies.at_state(h, s);
      for (int i = 0; i < grid.players; ++i) {
        const Vec deviation = marginal_utility(game, i, h, s, state.stage(i, h + 1), pi);
        Vec& acc = state.m[grid.index(i, h, s)];
        acc = (1.0 - alpha_t) * acc + alpha_t * deviation;
        state.v_dag[grid.index(i, h, s)] = acc.maxCoeff();
      }
    }
}

RegretState::RegretState(const MarkovGame& game) : grid(game.cells()) {
  g.reserve(grid.size());
  for (int cell = 0; cell < grid.size(); ++cell)
    g.push_back(Vec::Zero(game.num_actions(grid.player_of(cell))));
  reg = Eigen::ArrayXd::Zero(grid.size());
}

void regret_round_update(const std::vector<Vec>& utilities, const PolicyTable& policies,
                         RegretState& state, double alpha_t) {
  if (utilities.size() != state.g.size())
    throw std::invalid_argument("regret_round_update: utility table shape mismatch");
  for (std::size_t cell = 0; cell < state.g.size(); ++cell) {
    const Vec& nu = utilities[cell];
    const double mean = (nu * policies.x[cell]).sum();
    state.g[cell] = (1.0 - alpha_t) * state.g[cell] + alpha_t * (nu - mean);
    state.reg[cell] = state.g[cell].maxCoeff();
  }
}

GapReport cce_gap(const BestResponseState& br, const ValueTables& values, const MarkovGame& game) {
  const int s1 = game.initial_state();
  double raw = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < game.num_players(); ++i)
    raw = std::max(raw, br.value(i, 0, s1) - values.value(i, 0, s1));
  return {raw, std::max(raw, 0.0)};
}

Vec gap_stage_profile(const BestResponseState& br, const ValueTables& values) {
  const CellGrid& grid = br.grid;
  Vec profile = Vec::Zero(grid.horizon);
  for (int h = 0; h < grid.horizon; ++h) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.players; ++i)
      for (int s = 0; s < grid.states; ++s)
        worst = std::max(worst, br.value(i, h, s) - values.value(i, h, s));
    profile[h] = worst;
  }
  return profile;
}

Vec regret_stage_profile(const RegretState& regret) {
  const CellGrid& grid = regret.grid;
  Vec profile = Vec::Zero(grid.horizon);
  for (int h = 0; h < grid.horizon; ++h) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.players; ++i)
      for (int s = 0; s < grid.states; ++s) worst = std::max(worst, regret.reg[grid.index(i, h, s)]);
    profile[h] = worst;
  }
  return profile;
}

RolloutSampler::RolloutSampler(const WeightSchedule& schedule, int total_rounds)
    : schedule_(schedule) {
  if (total_rounds < 1) throw std::invalid_argument("RolloutSampler: need at least one round");
  cdf_.resize(total_rounds + 1);
}

int RolloutSampler::sample_index(int bound, std::mt19937_64& rng) const {
  if (bound < 1 || bound >= static_cast<int>(cdf_.size()))
    throw std::invalid_argument("RolloutSampler::sample_index: bound out of range");
  std::vector<double>& cdf = cdf_[bound];
  if (cdf.empty()) {
    const Vec profile = schedule_.alpha_profile(bound);
    cdf.resize(bound);
    double acc = 0.0;
    for (int j = 0; j < bound; ++j) {
      acc += profile[j];
      cdf[j] = acc;
    }
    cdf[bound - 1] = 1.0;
  }
  const double u = uniform_unit(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<int>(it - cdf.begin()) + 1;
}

RolloutEpisode rollout_sample(const MarkovGame& game,
                              const std::vector<PolicyTable>& policy_history,
                              const RolloutSampler& sampler, std::mt19937_64& rng) {
  if (policy_history.empty()) throw std::invalid_argument("rollout_sample: empty policy history");
  const int n = game.num_players();
  RolloutEpisode episode;
  episode.returns.assign(n, 0.0);
  int bound = static_cast<int>(policy_history.size());
  int s = game.initial_state();
  std::vector<int> actions(n);
  for (int h = 0; h < game.horizon(); ++h) {
    const int j = sampler.sample_index(bound, rng);
    const PolicyTable& pi = policy_history[j - 1];
    for (int i = 0; i < n; ++i) {
      const Vec& dist = pi.at(i, h, s);
      const double u = uniform_unit(rng);
      double acc = 0.0;
      int choice = static_cast<int>(dist.size()) - 1;
      for (int a = 0; a < dist.size(); ++a) {
        acc += dist[a];
        if (u < acc) {
          choice = a;
          break;
        }
      }
      actions[i] = choice;
    }
    const int flat = game.joint().encode(actions);
    for (int i = 0; i < n; ++i) episode.returns[i] += game.reward(i, h, s, flat);
    const auto row = game.transition_row(h, s, flat);
    const double u = uniform_unit(rng);
    double acc = 0.0;
    int next = game.num_states() - 1;
    for (int s2 = 0; s2 < game.num_states(); ++s2) {
      acc += row[s2];
      if (u < acc) {
        next = s2;
        break;
      }
    }
    s = next;
    bound = j;
  }
  return episode;
}

RolloutSummary rollout_summary(const RunHistory& history, long episodes, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("rollout_summary: episodes must be >= 1");
  if (history.rounds() < 1) throw std::invalid_argument("rollout_summary: empty history");
  const MarkovGame& game = history.game;
  const std::vector<PolicyTable> tables = history.policy_tables();
  const WeightSchedule schedule(game.horizon(), 1.0);
  const RolloutSampler sampler(schedule, history.rounds());
  std::mt19937_64 rng(seed);

  const int n = game.num_players();
  // Welford accumulation; exact zero spread for deterministic rollouts.
  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  for (long e = 0; e < episodes; ++e) {
    const RolloutEpisode episode = rollout_sample(game, tables, sampler, rng);
    for (int i = 0; i < n; ++i) {
      const double delta = episode.returns[i] - mean[i];
      mean[i] += delta / (e + 1);
      m2[i] += delta * (episode.returns[i] - mean[i]);
    }
  }

  RolloutSummary summary;
  summary.episodes = episodes;
  summary.mean.resize(n);
  summary.std_error.resize(n);
  summary.v_reference.resize(n);
  const CellGrid grid = game.cells();
  for (int i = 0; i < n; ++i) {
    summary.mean[i] = mean[i];
    const double variance = episodes > 1 ? std::max(0.0, m2[i] / (episodes - 1)) : 0.0;
    summary.std_error[i] = std::sqrt(variance / episodes);
    summary.v_reference[i] = history.v_final[grid.index(i, 0, game.initial_state())];
    const double gap = std::abs(summary.mean[i] - summary.v_reference[i]);
    if (gap > 3.0 * summary.std_error[i] + 1e-12) summary.consistent = false;
  }
  return summary;
}

}  // namespace mgdlrc
