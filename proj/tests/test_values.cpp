#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgdlrc/trainer.hpp"
#include "mgdlrc/values.hpp"
#include "oracles.hpp"

using namespace mgdlrc;

namespace {

// Random product policies, seeded.
PolicyTable random_policies(const MarkovGame& game, std::mt19937_64& rng) {
  PolicyTable table(game);
  for (Vec& x : table.x) {
    double total = 0.0;
    for (Eigen::Index a = 0; a < x.size(); ++a) {
      x[a] = 0.05 + uniform_unit(rng);
      total += x[a];
    }
    x /= total;
  }
  return table;
}

MarkovGame random_full_game(std::mt19937_64& rng, int players, int states, int actions,
                            int horizon) {
  MarkovGame game = generate_random_game(rng(), players, states, actions, horizon, 0.8);
  Vec row(states);
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < states; ++s)
      for (int a = 0; a < game.joint().num_joint(); ++a) {
        double total = 0.0;
        for (int s2 = 0; s2 < states; ++s2) {
          row[s2] = 0.05 + uniform_unit(rng);
          total += row[s2];
        }
        game.set_transition_row(h, s, a, row / total);
      }
  return game;
}

}  // namespace

TEST_CASE("value pass basics") {
  SUBCASE("first round is a pure policy evaluation") {
    std::mt19937_64 rng(3);
    const MarkovGame game = random_full_game(rng, 2, 2, 2, 2);
    const PolicyTable policies = random_policies(game, rng);
    ValueTables values(game);
    values.advance(game, policies, 1.0);  // alpha_1 = 1
    // Independent evaluation via the marginal utilities.
    for (int i = 0; i < 2; ++i)
      for (int h = 1; h >= 0; --h)
        for (int s = 0; s < 2; ++s) {
          const Vec nu =
              marginal_utility(game, i, h, s, values.stage(i, h + 1), policies.at_state(h, s));
          const double expect = (nu * policies.at(i, h, s)).sum();
          CHECK(values.value(i, h, s) == doctest::Approx(expect).epsilon(1e-12));
        }
  }
  SUBCASE("zero rewards stay at the zero fixed point") {
    MarkovGame game(2, 3, 2, {2, 2}, 0);
    std::mt19937_64 rng(5);
    const PolicyTable policies = random_policies(game, rng);
    ValueTables values(game);
    WeightSchedule schedule(3, 1.0);
    for (int t = 1; t <= 40; ++t) {
      values.advance(game, policies, schedule.alpha(t));
      CHECK(values.curr.abs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("single-stage identity game under uniform play") {
    MarkovGame game(2, 1, 1, {2, 2}, 0);
    game.set_reward(0, 0, 0, game.joint().encode({0, 0}), 1.0);
    game.set_reward(0, 0, 0, game.joint().encode({1, 1}), 1.0);
    PolicyTable policies(game);  // uniform
    ValueTables values(game);
    WeightSchedule schedule(1, 1.0);
    double v_prev = 0.0;
    for (int t = 1; t <= 10; ++t) {
      const double alpha_t = schedule.alpha(t);
      values.advance(game, policies, alpha_t);
      // Four joint actions, two rewarding: the stage value of uniform play is 0.5.
      CHECK(values.value(0, 0, 0) ==
            doctest::Approx((1.0 - alpha_t) * v_prev + alpha_t * 0.5).epsilon(1e-13));
      v_prev = values.value(0, 0, 0);
    }
  }
}

TEST_CASE("value boundedness on random games") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const MarkovGame game = random_full_game(rng, 3, 3, 2, 3);
    ValueTables values(game);
    WeightSchedule schedule(3, 1.0);
    for (int t = 1; t <= 30; ++t) {
      const PolicyTable policies = random_policies(game, rng);
      values.advance(game, policies, schedule.alpha(t));
      for (int i = 0; i < 3; ++i)
        for (int h = 0; h < 3; ++h)
          for (int s = 0; s < 3; ++s) {
            CHECK(values.value(i, h, s) >= 0.0);
            CHECK(values.value(i, h, s) <= 3 - h + 1e-12);
          }
      const std::vector<Vec> utilities = round_utilities(game, values, policies);
      const CellGrid grid = game.cells();
      for (int cell = 0; cell < grid.size(); ++cell) {
        CHECK(utilities[cell].minCoeff() >= 0.0);
        CHECK(utilities[cell].maxCoeff() <= 3 - grid.stage_of(cell) + 1e-12);
      }
    }
  }
}

TEST_CASE("q pass basics") {
  SUBCASE("terminal stage blends straight into the rewards") {
    std::mt19937_64 rng(11);
    const MarkovGame game = random_full_game(rng, 2, 2, 2, 2);
    const PolicyTable policies = random_policies(game, rng);
    QTables q(game);
    q.advance(game, policies, 1.0);
    const int h_last = 1;
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 4; ++a)
        CHECK(q.q(0, h_last, s, a) == doctest::Approx(game.reward(0, h_last, s, a)));
    // Second round with alpha_2 = 3/4: terminal stage stays equal to the rewards.
    QTables q2(game);
    q2.advance(game, policies, 1.0);
    q2.advance(game, policies, 0.75);
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 4; ++a)
        CHECK(q2.q(0, h_last, s, a) == doctest::Approx(game.reward(0, h_last, s, a)));
  }
}

TEST_CASE("q and v passes agree through the bellman identity") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 4; ++trial) {
    const MarkovGame game = random_full_game(rng, 2 + static_cast<int>(rng() % 2), 2, 2, 3);
    ValueTables values(game);
    QTables q(game);
    WeightSchedule schedule(3, 1.0);
    for (int t = 1; t <= 100; ++t) {
      const PolicyTable policies = random_policies(game, rng);
      values.advance(game, policies, schedule.alpha(t));
      q.advance(game, policies, schedule.alpha(t));
      CHECK(qv_identity_residual(game, q, values) <= 1e-10);
    }
  }
}

TEST_CASE("incremental v matches the weighted-average form") {
  std::mt19937_64 rng(17);
  const MarkovGame game = random_full_game(rng, 2, 2, 2, 3);
  WeightSchedule schedule(3, 1.0);
  ValueTables values(game);
  std::vector<PolicyTable> history;
  for (int t = 1; t <= 100; ++t) {
    history.push_back(random_policies(game, rng));
    values.advance(game, history.back(), schedule.alpha(t));
    if (t <= 10 || t % 25 == 0) {
      const Eigen::ArrayXd replayed = oracle::replay_values(game, history, schedule, t);
      CHECK((values.curr - replayed).abs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("round utilities") {
  SUBCASE("last stage depends on rewards only") {
    std::mt19937_64 rng(19);
    const MarkovGame game = random_full_game(rng, 2, 2, 2, 2);
    const PolicyTable policies = random_policies(game, rng);
    ValueTables values(game);
    values.advance(game, policies, 1.0);
    const std::vector<Vec> utilities = round_utilities(game, values, policies);
    const CellGrid grid = game.cells();
    const int h_last = 1;
    for (int s = 0; s < 2; ++s) {
      const Vec& nu = utilities[grid.index(0, h_last, s)];
      const Vec direct =
          marginal_utility(game, 0, h_last, s, Vec::Zero(2), policies.at_state(h_last, s));
      for (int a = 0; a < 2; ++a) CHECK(nu[a] == doctest::Approx(direct[a]));
    }
  }
  SUBCASE("matches brute-force enumeration on a 3-player game") {
    std::mt19937_64 rng(23);
    const MarkovGame game = random_full_game(rng, 3, 2, 2, 2);
    const PolicyTable policies = random_policies(game, rng);
    ValueTables values(game);
    values.advance(game, policies, 1.0);
    const std::vector<Vec> utilities = round_utilities(game, values, policies);
    const CellGrid grid = game.cells();
    for (int i = 0; i < 3; ++i)
      for (int h = 0; h < 2; ++h)
        for (int s = 0; s < 2; ++s) {
          const Vec brute = oracle::brute_marginal(game, i, h, s, values.stage(i, h + 1),
                                                   policies.at_state(h, s));
          const Vec& fast = utilities[grid.index(i, h, s)];
          for (int a = 0; a < 2; ++a) CHECK(fast[a] == doctest::Approx(brute[a]).epsilon(1e-12));
        }
  }
}
