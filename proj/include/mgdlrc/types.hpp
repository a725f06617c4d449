#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>

namespace mgdlrc {

// Dense per-action / per-state vector. Array semantics: coefficient-wise
// ops are the common case (softmax, centering, clamping).
using Vec = Eigen::ArrayXd;

template <typename Scalar>
using VecT = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

// Flat (player, stage, state) cell addressing shared by the learner bank,
// value tables and evaluators.
struct CellGrid {
  int players = 0;
  int horizon = 0;
  int states = 0;

  CellGrid() = default;
  CellGrid(int n, int h, int s) : players(n), horizon(h), states(s) {}

  int size() const { return players * horizon * states; }
  int index(int i, int h, int s) const { return (i * horizon + h) * states + s; }

  int player_of(int cell) const { return cell / (horizon * states); }
  int stage_of(int cell) const { return (cell / states) % horizon; }
  int state_of(int cell) const { return cell % states; }
};

// Portable uniform draw in [0,1): top 53 bits of a fully specified engine,
// so seeded streams are identical across standard libraries.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mgdlrc
