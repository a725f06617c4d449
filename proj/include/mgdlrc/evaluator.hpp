#pragma once

#include <random>
#include <vector>

#include "mgdlrc/values.hpp"
#include "mgdlrc/weights.hpp"

namespace mgdlrc {

// Incremental best-response dynamic program.  m holds the weighted action
// accumulators M_t[i][h][s][a_i]; v_dag the stagewise best-response values.
// Updated backward in h each round with the same (1-alpha_t)/alpha_t
// telescoping as the value update, which reproduces the alpha_t^j-weighted
// sum without replaying history.
struct BestResponseState {
  CellGrid grid;
  std::vector<Vec> m;
  Eigen::ArrayXd v_dag;

  BestResponseState() = default;
  explicit BestResponseState(const MarkovGame& game);

  double value(int i, int h, int s) const { return v_dag[grid.index(i, h, s)]; }
  Vec stage(int i, int h) const;
};

void br_round_update(const MarkovGame& game, const PolicyTable& policies,
                     BestResponseState& state, double alpha_t);

// Weighted external-regret accumulators per cell:
//   G_t = (1-alpha_t) G_{t-1} + alpha_t (nu_t - <nu_t, x_t> 1),  reg = max_a G_t.
// The raw weighted regret may be negative; only the lifted form is signed.
struct RegretState {
  CellGrid grid;
  std::vector<Vec> g;
  Eigen::ArrayXd reg;

  RegretState() = default;
  explicit RegretState(const MarkovGame& game);
};

void regret_round_update(const std::vector<Vec>& utilities, const PolicyTable& policies,
                         RegretState& state, double alpha_t);

struct GapReport {
  double raw = 0.0;
  double clamped = 0.0;
};

// max over players of V_dag[i][1](s1) - V[i][1](s1); raw value kept alongside
// the 0-clamped report (tiny negatives are float noise).
GapReport cce_gap(const BestResponseState& br, const ValueTables& values, const MarkovGame& game);

// delta_h = max_{s,i} (V_dag[i][h][s] - V[i][h][s]) for each stage.
Vec gap_stage_profile(const BestResponseState& br, const ValueTables& values);

// Per-stage worst regret: max_{i,s} reg[i][h][s].
Vec regret_stage_profile(const RegretState& regret);

// Correlated-policy rollout: at stage h sample a round index j <= bound with
// the alpha_bound profile, play that round's joint policy, then shrink the
// bound to j.  Index CDFs are cached per bound.
class RolloutSampler {
 public:
  RolloutSampler(const WeightSchedule& schedule, int total_rounds);
  int sample_index(int bound, std::mt19937_64& rng) const;  // 1-based round index

 private:
  mutable std::vector<std::vector<double>> cdf_;  // per bound, lazily built
  WeightSchedule schedule_;
};

struct RolloutEpisode {
  std::vector<double> returns;  // per player
};

// policy_history[t-1] is the round-t PolicyTable.
RolloutEpisode rollout_sample(const MarkovGame& game,
                              const std::vector<PolicyTable>& policy_history,
                              const RolloutSampler& sampler, std::mt19937_64& rng);

struct RolloutSummary {
  long episodes = 0;
  std::vector<double> mean;        // per player
  std::vector<double> std_error;   // per player
  std::vector<double> v_reference; // V[i][1](s1) of the recorded run
  bool consistent = true;          // |mean - v| <= 3 std errors per player
};

struct RunHistory;

// Monte-Carlo evaluation of the recorded correlated policy against the
// run's own final values.
RolloutSummary rollout_summary(const RunHistory& history, long episodes, std::uint64_t seed);

}  // namespace mgdlrc
