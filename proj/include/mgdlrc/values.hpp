#pragma once

#include <vector>

#include "mgdlrc/game.hpp"
#include "mgdlrc/types.hpp"

namespace mgdlrc {

// One distribution over own actions per (player, stage, state) cell.
struct PolicyTable {
  CellGrid grid;
  std::vector<Vec> x;

  PolicyTable() = default;
  explicit PolicyTable(const MarkovGame& game);

  const Vec& at(int i, int h, int s) const { return x[grid.index(i, h, s)]; }
  Vec& at(int i, int h, int s) { return x[grid.index(i, h, s)]; }

  // Per-player distributions at a fixed (h, s), as marginal_utility expects.
  std::vector<Vec> at_state(int h, int s) const;
};

// Rotating V buffers, flat [i][h][s].  Stage H is implicit zeros; round 0 is
// the zero table.
struct ValueTables {
  CellGrid grid;
  Eigen::ArrayXd prev, curr;

  ValueTables() = default;
  explicit ValueTables(const MarkovGame& game);

  double value(int i, int h, int s) const { return curr[grid.index(i, h, s)]; }
  Vec stage(int i, int h) const;  // V over states at stage h; zeros at h == horizon

  // V_t[h](s) = (1-alpha_t) V_{t-1}[h](s)
  //           + alpha_t E_{a ~ joint pi}[ r_i(h,s,a) + P_h(.|s,a) . V_t[h+1] ],
  // backward in h, exact joint-action enumeration.
  void advance(const MarkovGame& game, const PolicyTable& policies, double alpha_t);
};

// Joint-action Q tables, flat [i][h][s][joint].  Exponential in N; exists
// for the Q-form update and its equivalence check, off by default.
struct QTables {
  CellGrid grid;
  int num_joint = 0;
  Eigen::ArrayXd prev, curr;

  QTables() = default;
  explicit QTables(const MarkovGame& game);

  double q(int i, int h, int s, int a) const {
    return curr[static_cast<std::size_t>(grid.index(i, h, s)) * num_joint + a];
  }

  // Q_t[h](s,a) = (1-alpha_t) Q_{t-1}[h](s,a)
  //             + alpha_t ( r_i(h,s,a) + P_h [Q_t[h+1] pi_{h+1}] (s,a) ).
  void advance(const MarkovGame& game, const PolicyTable& policies, double alpha_t);
};

// max over (i,h,s,a) of |Q(s,a) - r(s,a) - P_h . V[h+1]| for passes fed the
// same policy stream.
double qv_identity_residual(const MarkovGame& game, const QTables& q, const ValueTables& v);

// nu_t per cell: marginal utility against the current values' continuation.
std::vector<Vec> round_utilities(const MarkovGame& game, const ValueTables& values,
                                 const PolicyTable& policies);

}  // namespace mgdlrc
