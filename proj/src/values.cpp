#include "mgdlrc/values.hpp"

#include <cmath>

namespace mgdlrc {

PolicyTable::PolicyTable(const MarkovGame& game) : grid(game.cells()) {
  x.reserve(grid.size());
  for (int cell = 0; cell < grid.size(); ++cell) {
    const int actions = game.num_actions(grid.player_of(cell));
    x.push_back(Vec::Constant(actions, 1.0 / actions));
  }
}

std::vector<Vec> PolicyTable::at_state(int h, int s) const {
  std::vector<Vec> per_player;
  per_player.reserve(grid.players);
  for (int i = 0; i < grid.players; ++i) per_player.push_back(at(i, h, s));
  return per_player;
}

ValueTables::ValueTables(const MarkovGame& game) : grid(game.cells()) {
  prev = Eigen::ArrayXd::Zero(grid.size());
  curr = Eigen::ArrayXd::Zero(grid.size());
}

Vec ValueTables::stage(int i, int h) const {
  Vec out = Vec::Zero(grid.states);
  if (h >= grid.horizon) return out;
  for (int s = 0; s < grid.states; ++s) out[s] = curr[grid.index(i, h, s)];
  return out;
}

void ValueTables::advance(const MarkovGame& game, const PolicyTable& policies, double alpha_t) {
  if (policies.grid.size() != grid.size())
    throw std::invalid_argument("ValueTables::advance: policy table shape mismatch");
  std::swap(prev, curr);
  const JointActionSpace& space = game.joint();
  const int n = grid.players;
  std::vector<double> expected(n);
  for (int h = grid.horizon - 1; h >= 0; --h) {
    for (int s = 0; s < grid.states; ++s) {
      const std::vector<Vec> pi = policies.at_state(h, s);
      std::fill(expected.begin(), expected.end(), 0.0);
      for (int a = 0; a < space.num_joint(); ++a) {
        double p = 1.0;
        for (int k = 0; k < n; ++k) p *= pi[k][space.action_of(a, k)];
        if (p == 0.0) continue;
        const auto row = game.transition_row(h, s, a);
        for (int i = 0; i < n; ++i) {
          double continuation = 0.0;
          if (h + 1 < grid.horizon) {
            for (int s2 = 0; s2 < grid.states; ++s2)
              continuation += row[s2] * curr[grid.index(i, h + 1, s2)];
          }
          expected[i] += p * (game.reward(i, h, s, a) + continuation);
        }
      }
      for (int i = 0; i < n; ++i) {
        const int idx = grid.index(i, h, s);
        curr[idx] = (1.0 - alpha_t) * prev[idx] + alpha_t * expected[i];
      }
    }
  }
}

QTables::QTables(const MarkovGame& game) : grid(game.cells()), num_joint(game.joint().num_joint()) {
  prev = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(grid.size()) * num_joint);
  curr = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(grid.size()) * num_joint);
}

void QTables::advance(const MarkovGame& game, const PolicyTable& policies, double alpha_t) {
  std::swap(prev, curr);
  const JointActionSpace& space = game.joint();
  const int n = grid.players;
  // W[i][s'] = <Q_t[h+1](s',.), joint pi_{h+1}(.|s')>, recomputed per stage.
  Eigen::ArrayXd w = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(n) * grid.states);
  for (int h = grid.horizon - 1; h >= 0; --h) {
    w.setZero();
    if (h + 1 < grid.horizon) {
      for (int s2 = 0; s2 < grid.states; ++s2) {
        const std::vector<Vec> pi = policies.at_state(h + 1, s2);
        for (int a = 0; a < num_joint; ++a) {
          double p = 1.0;
          for (int k = 0; k < n; ++k) p *= pi[k][space.action_of(a, k)];
          if (p == 0.0) continue;
          for (int i = 0; i < n; ++i)
            w[i * grid.states + s2] +=
                p * curr[static_cast<std::size_t>(grid.index(i, h + 1, s2)) * num_joint + a];
        }
      }
    }
    for (int s = 0; s < grid.states; ++s) {
      for (int a = 0; a < num_joint; ++a) {
        const auto row = game.transition_row(h, s, a);
        for (int i = 0; i < n; ++i) {
          double continuation = 0.0;
          for (int s2 = 0; s2 < grid.states; ++s2)
            continuation += row[s2] * w[i * grid.states + s2];
          const std::size_t idx = static_cast<std::size_t>(grid.index(i, h, s)) * num_joint + a;
          curr[idx] = (1.0 - alpha_t) * prev[idx] +
                      alpha_t * (game.reward(i, h, s, a) + continuation);
        }
      }
    }
  }
}

double qv_identity_residual(const MarkovGame& game, const QTables& q, const ValueTables& v) {
  double worst = 0.0;
  const CellGrid grid = game.cells();
  for (int i = 0; i < grid.players; ++i)
    for (int h = 0; h < grid.horizon; ++h) {
      const Vec next = v.stage(i, h + 1);
      for (int s = 0; s < grid.states; ++s)
        for (int a = 0; a < q.num_joint; ++a) {
          const double bellman =
              game.reward(i, h, s, a) + (game.transition_row(h, s, a) * next).sum();
          worst = std::max(worst, std::abs(q.q(i, h, s, a) - bellman));
        }
    }
  return worst;
}

std::vector<Vec> round_utilities(const MarkovGame& game, const ValueTables& values,
                                 const PolicyTable& policies) {
  const CellGrid grid = game.cells();
  std::vector<Vec> utilities(grid.size());
  for (int i = 0; i < grid.players; ++i)
    for (int h = 0; h < grid.horizon; ++h) {
      const Vec next = values.stage(i, h + 1);
      for (int s = 0; s < grid.states; ++s)
        utilities[grid.index(i, h, s)] =
            marginal_utility(game, i, h, s, next, policies.at_state(h, s));
    }
  return utilities;
}

}  // namespace mgdlrc
