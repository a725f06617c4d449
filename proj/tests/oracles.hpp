// Test-only independent oracles.  Everything here recomputes quantities from
// first principles (direct products, full enumeration, history replay) so the
// library paths they check never feed back into the expected values.
#pragma once

#include <vector>

#include "mgdlrc/evaluator.hpp"
#include "mgdlrc/game.hpp"
#include "mgdlrc/learner.hpp"
#include "mgdlrc/values.hpp"
#include "mgdlrc/weights.hpp"

namespace oracle {

using LVec = Eigen::Array<long double, Eigen::Dynamic, 1>;

inline long double alpha_ld(int horizon, int t) {
  return static_cast<long double>(horizon + 1) / (horizon + t);
}

// alpha_t^j by the literal product definition, extended precision.
inline long double alpha_profile_ld(int horizon, int t, int j) {
  long double v = alpha_ld(horizon, j);
  for (int k = j + 1; k <= t; ++k) v *= 1.0L - alpha_ld(horizon, k);
  return v;
}

// w_t as the ratio of product-form profile entries (no binomial shortcut).
inline long double w_ld(int horizon, int t) {
  return alpha_profile_ld(horizon, t, t) / alpha_profile_ld(horizon, t, 1);
}

// Full-enumeration marginal utility, recursing over opponents one at a time
// (a different loop structure than the library's flat scan), long double.
inline mgdlrc::Vec brute_marginal(const mgdlrc::MarkovGame& game, int player, int h, int s,
                                  const mgdlrc::Vec& next_values,
                                  const std::vector<mgdlrc::Vec>& policies) {
  const int n = game.num_players();
  LVec acc = LVec::Zero(game.num_actions(player));
  std::vector<int> actions(n, 0);
  auto recurse = [&](auto&& self, int who, long double prob) -> void {
    if (who == n) {
      const int flat = game.joint().encode(actions);
      long double continuation = 0.0L;
      for (int s2 = 0; s2 < game.num_states(); ++s2)
        continuation += static_cast<long double>(game.transition(h, s, flat, s2)) * next_values[s2];
      acc[actions[player]] += prob * (game.reward(player, h, s, flat) + continuation);
      return;
    }
    if (who == player) {
      for (int a = 0; a < game.num_actions(who); ++a) {
        actions[who] = a;
        self(self, who + 1, prob);
      }
      return;
    }
    for (int a = 0; a < game.num_actions(who); ++a) {
      actions[who] = a;
      self(self, who + 1, prob * policies[who][a]);
    }
  };
  recurse(recurse, 0, 1.0L);
  return acc.cast<double>();
}

// Uniform-grid argmax of the learning-rate objective over (0, cap].
// Chunked so Eigen vectorizes the exp; the per-lambda max shift is
// lambda * max_k signal_k since lambda > 0.
inline double dense_grid_lambda(const mgdlrc::Vec& signal, double alpha_tilde, long points,
                                double cap = 1.0) {
  const double top = signal.maxCoeff();
  constexpr long kChunk = 8192;
  Eigen::ArrayXd lam(kChunk), f(kChunk), acc(kChunk);
  double best_x = cap;
  double best_f = -std::numeric_limits<double>::infinity();
  for (long start = 1; start <= points; start += kChunk) {
    const long n = std::min(kChunk, points - start + 1);
    for (long j = 0; j < n; ++j)
      lam[j] = cap * static_cast<double>(start + j) / static_cast<double>(points);
    acc.head(n).setZero();
    for (Eigen::Index k = 0; k < signal.size(); ++k)
      acc.head(n) += ((signal[k] - top) * lam.head(n)).exp();
    f.head(n) =
        (alpha_tilde - 1.0) * lam.head(n).log() + top * lam.head(n) + acc.head(n).log();
    for (long j = 0; j < n; ++j) {
      if (f[j] > best_f) {
        best_f = f[j];
        best_x = lam[j];
      }
    }
  }
  return best_x;
}

// Raw-weight optimistic-signal oracle: maintains U_t = sum_j w_j u~_j in long
// double with product-form weights and evaluates
// (eta / w_t) (U_t + (w_t / w_{t-1}) u_{t-1}).
struct RawSignalOracle {
  int horizon;
  double eta;
  LVec dual;       // U_t
  LVec last_term;  // u_{t-1} (raw, w-weighted)
  int round = 1;

  RawSignalOracle(int horizon_, double eta_, int actions)
      : horizon(horizon_), eta(eta_), dual(LVec::Zero(actions)), last_term(LVec::Zero(actions)) {}

  mgdlrc::Vec signal() const {
    const long double w_t = w_ld(horizon, round);
    const long double w_prev = round >= 2 ? w_ld(horizon, round - 1) : 1.0L;
    LVec value = (eta / w_t) * (dual + (w_t / w_prev) * last_term);
    return value.cast<double>();
  }

  void commit(const mgdlrc::Vec& centered) {
    const long double w_t = w_ld(horizon, round);
    LVec raw = w_t * centered.cast<long double>();
    dual += raw;
    last_term = raw;
    ++round;
  }
};

// alpha_t^j-weighted best-response replay from stored policies: recomputes
// the prefix best-response values for every j <= t directly from the profile
// weights (no incremental (1-alpha) update anywhere).
inline Eigen::ArrayXd replay_best_response(const mgdlrc::MarkovGame& game,
                                           const std::vector<mgdlrc::PolicyTable>& policies,
                                           const mgdlrc::WeightSchedule& schedule, int t) {
  const mgdlrc::CellGrid grid = game.cells();
  std::vector<mgdlrc::Vec> profiles;
  profiles.reserve(t);
  for (int j = 1; j <= t; ++j) profiles.push_back(schedule.alpha_profile(j));

  // vd[j-1] holds the prefix-j best-response table at the stage below.
  std::vector<Eigen::ArrayXd> vd_next(t, Eigen::ArrayXd::Zero(grid.players * grid.states));
  std::vector<Eigen::ArrayXd> vd_here(t, Eigen::ArrayXd::Zero(grid.players * grid.states));
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(grid.size());
  for (int h = grid.horizon - 1; h >= 0; --h) {
    for (int j = 1; j <= t; ++j) {
      for (int i = 0; i < grid.players; ++i)
        for (int s = 0; s < grid.states; ++s) {
          mgdlrc::Vec m = mgdlrc::Vec::Zero(game.num_actions(i));
          for (int l = 1; l <= j; ++l) {
            mgdlrc::Vec next(grid.states);
            for (int s2 = 0; s2 < grid.states; ++s2)
              next[s2] = vd_next[l - 1][i * grid.states + s2];
            m += profiles[j - 1][l - 1] *
                 marginal_utility(game, i, h, s, next, policies[l - 1].at_state(h, s));
          }
          vd_here[j - 1][i * grid.states + s] = m.maxCoeff();
        }
    }
    for (int i = 0; i < grid.players; ++i)
      for (int s = 0; s < grid.states; ++s)
        out[grid.index(i, h, s)] = vd_here[t - 1][i * grid.states + s];
    std::swap(vd_next, vd_here);
  }
  return out;
}

// Weighted-average V replay from stored policies (same structure, full joint
// expectation instead of the best-response max).
inline Eigen::ArrayXd replay_values(const mgdlrc::MarkovGame& game,
                                    const std::vector<mgdlrc::PolicyTable>& policies,
                                    const mgdlrc::WeightSchedule& schedule, int t) {
  const mgdlrc::CellGrid grid = game.cells();
  std::vector<mgdlrc::Vec> profiles;
  profiles.reserve(t);
  for (int j = 1; j <= t; ++j) profiles.push_back(schedule.alpha_profile(j));

  std::vector<Eigen::ArrayXd> v_next(t, Eigen::ArrayXd::Zero(grid.players * grid.states));
  std::vector<Eigen::ArrayXd> v_here(t, Eigen::ArrayXd::Zero(grid.players * grid.states));
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(grid.size());
  for (int h = grid.horizon - 1; h >= 0; --h) {
    for (int j = 1; j <= t; ++j) {
      for (int i = 0; i < grid.players; ++i)
        for (int s = 0; s < grid.states; ++s) {
          double value = 0.0;
          for (int l = 1; l <= j; ++l) {
            mgdlrc::Vec next(grid.states);
            for (int s2 = 0; s2 < grid.states; ++s2) next[s2] = v_next[l - 1][i * grid.states + s2];
            const mgdlrc::Vec nu =
                marginal_utility(game, i, h, s, next, policies[l - 1].at_state(h, s));
            value += profiles[j - 1][l - 1] * (nu * policies[l - 1].at(i, h, s)).sum();
          }
          v_here[j - 1][i * grid.states + s] = value;
        }
    }
    for (int i = 0; i < grid.players; ++i)
      for (int s = 0; s < grid.states; ++s)
        out[grid.index(i, h, s)] = v_here[t - 1][i * grid.states + s];
    std::swap(v_next, v_here);
  }
  return out;
}

// alpha_t^j-weighted regret replay from a recorded utility/policy stream.
inline Eigen::ArrayXd replay_regret(const mgdlrc::CellGrid& grid,
                                    const std::vector<std::vector<mgdlrc::Vec>>& utilities,
                                    const std::vector<mgdlrc::PolicyTable>& policies,
                                    const mgdlrc::WeightSchedule& schedule, int t) {
  const mgdlrc::Vec profile = schedule.alpha_profile(t);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(grid.size());
  for (int cell = 0; cell < grid.size(); ++cell) {
    LVec g = LVec::Zero(utilities[0][cell].size());
    for (int j = 1; j <= t; ++j) {
      const mgdlrc::Vec& nu = utilities[j - 1][cell];
      const mgdlrc::Vec& x = policies[j - 1].x[cell];
      const long double mean = (nu * x).sum();
      g += static_cast<long double>(profile[j - 1]) * (nu.cast<long double>() - mean);
    }
    out[cell] = static_cast<double>(g.maxCoeff());
  }
  return out;
}

}  // namespace oracle
