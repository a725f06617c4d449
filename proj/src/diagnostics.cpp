#include "mgdlrc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "mgdlrc/trainer.hpp"

namespace mgdlrc {

namespace {

// w_t/w_T for t = 1..T, stable for any T.
std::vector<double> weight_ratios(const WeightSchedule& schedule, int total) {
  std::vector<double> ratios(total + 1, 0.0);
  const double log_w_total = schedule.log_w(total);
  for (int t = 1; t <= total; ++t) ratios[t] = std::exp(schedule.log_w(t) - log_w_total);
  ratios[total] = 1.0;
  return ratios;
}

struct CellRegret {
  double reg_tilde = 0.0;   // max over {0} u vertices, normalized by w_T
  double reg_external = 0.0;  // max over vertices only
};

CellRegret lifted_regret(const RunHistory& history, int cell,
                         const std::vector<double>& ratios) {
  const int total = history.rounds();
  const int d = static_cast<int>(history.records.front().policy[cell].size());
  Vec vertex = Vec::Zero(d);
  double inner = 0.0;
  for (int t = 1; t <= total; ++t) {
    const RoundRecord& rec = history.records[t - 1];
    const Vec& nu = rec.utility[cell];
    const Vec& x = rec.policy[cell];
    const Vec centered = nu - (nu * x).sum();
    vertex += ratios[t] * centered;
    inner += ratios[t] * rec.lambda[cell] * (centered * x).sum();
  }
  CellRegret out;
  out.reg_external = vertex.maxCoeff() - inner;
  out.reg_tilde = std::max(-inner, out.reg_external);
  return out;
}

}  // namespace

std::vector<RvuCellLedger> rvu_ledgers(const RunHistory& history) {
  const int total = history.rounds();
  if (total < 1) throw std::invalid_argument("rvu_ledgers: empty history");
  const CellGrid grid = history.grid();
  const double eta = history.params.base_eta;
  const WeightSchedule schedule(history.game.horizon(), eta);
  const std::vector<double> ratios = weight_ratios(schedule, total);
  const double log_amax = std::log(static_cast<double>(history.game.max_actions()));
  const double term_b = (history.params.alpha_tilde * std::log(static_cast<double>(total)) +
                         2.0 * log_amax) *
                        schedule.kappa(total + 1) / eta;

  std::vector<RvuCellLedger> ledgers;
  ledgers.reserve(grid.size());
  for (int cell = 0; cell < grid.size(); ++cell) {
    RvuCellLedger ledger;
    ledger.player = grid.player_of(cell);
    ledger.stage = grid.stage_of(cell);
    ledger.state = grid.state_of(cell);
    ledger.term_b = term_b;

    const int d = static_cast<int>(history.records.front().policy[cell].size());
    Vec prev_centered = Vec::Zero(d);
    double term_c = 0.0, term_d = 0.0, a_max = 0.0, a_last = 0.0;
    for (int t = 1; t <= total; ++t) {
      const RoundRecord& rec = history.records[t - 1];
      const Vec& nu = rec.utility[cell];
      const Vec& x = rec.policy[cell];
      const Vec centered = nu - (nu * x).sum();
      const double deviation = (centered - prev_centered).abs().maxCoeff();
      term_c += eta * ratios[t] * deviation * deviation;
      const double scaled_norm = ratios[t] * centered.abs().maxCoeff();
      a_max = std::max(a_max, 2.0 * scaled_norm);
      if (t == total) a_last = 2.0 * scaled_norm;
      if (t < total) {
        const Vec& x_next = history.records[t].policy[cell];
        const double path = (x_next - x).abs().sum();
        term_d += ratios[t] * path * path / (20.0 * eta);
      }
      prev_centered = centered;
    }
    ledger.term_a_last = a_last;
    ledger.term_a_max = a_max;
    ledger.term_c = term_c;
    ledger.term_d = term_d;
    ledger.reg_tilde = lifted_regret(history, cell, ratios).reg_tilde;
    ledger.slack_last = a_last + term_b + term_c - term_d - ledger.reg_tilde;
    ledger.slack_max = a_max + term_b + term_c - term_d - ledger.reg_tilde;
    ledgers.push_back(ledger);
  }
  return ledgers;
}

CheckResult rvu_check(const RunHistory& history) {
  CheckResult result;
  result.check_name = "rvu_bound";
  const std::vector<RvuCellLedger> ledgers = rvu_ledgers(history);
  result.cells_checked = static_cast<long>(ledgers.size());
  result.worst_slack = std::numeric_limits<double>::infinity();
  for (const RvuCellLedger& ledger : ledgers)
    result.worst_slack = std::min(result.worst_slack, ledger.slack_last);
  result.pass = result.worst_slack >= -1e-6;
  return result;
}

double signal_deviation_slack(const Vec& nu_t, const Vec& nu_prev, const Vec& x_t,
                              const Vec& x_prev, int horizon, bool first_round) {
  const Vec centered_t = nu_t - (nu_t * x_t).sum();
  Vec centered_prev;
  if (first_round) {
    centered_prev = Vec::Zero(nu_t.size());
  } else {
    centered_prev = nu_prev - (nu_prev * x_prev).sum();
  }
  const double lhs_norm = (centered_t - centered_prev).abs().maxCoeff();
  const Vec nu_ref = first_round ? Vec(Vec::Zero(nu_t.size())) : nu_prev;
  const Vec x_ref = first_round ? x_t : x_prev;
  const double dnu = (nu_t - nu_ref).abs().maxCoeff();
  const double dx = (x_t - x_ref).abs().sum();
  return 6.0 * dnu * dnu + 4.0 * horizon * horizon * dx * dx - lhs_norm * lhs_norm;
}

CheckResult signal_deviation_check(const RunHistory& history) {
  CheckResult result;
  result.check_name = "signal_deviation";
  const CellGrid grid = history.grid();
  const int horizon = history.game.horizon();
  result.worst_slack = std::numeric_limits<double>::infinity();
  for (int cell = 0; cell < grid.size(); ++cell) {
    for (int t = 1; t <= history.rounds(); ++t) {
      const RoundRecord& rec = history.records[t - 1];
      const bool first = t == 1;
      const RoundRecord& prev = history.records[first ? 0 : t - 2];
      const double slack =
          signal_deviation_slack(rec.utility[cell], prev.utility[cell], rec.policy[cell],
                                 prev.policy[cell], horizon, first);
      result.worst_slack = std::min(result.worst_slack, slack);
      ++result.cells_checked;
    }
  }
  result.pass = result.worst_slack >= -1e-6;
  return result;
}

CheckResult nonneg_regret_check(const RunHistory& history) {
  CheckResult result;
  result.check_name = "nonnegative_lifted_regret";
  const int total = history.rounds();
  const CellGrid grid = history.grid();
  const WeightSchedule schedule(history.game.horizon(), history.params.base_eta);
  const std::vector<double> ratios = weight_ratios(schedule, total);
  const double alpha_total = schedule.alpha(total);
  const double log_w_total = schedule.log_w(total);
  // Raw-scale comparisons need w_T itself; the run is expected to be short
  // enough that it is representable (the CLI records histories at T <= a few
  // thousand).
  const double w_total = log_w_total < 690.0 ? schedule.w(total)
                                             : std::numeric_limits<double>::quiet_NaN();
  result.worst_slack = std::numeric_limits<double>::infinity();
  for (int cell = 0; cell < grid.size(); ++cell) {
    const CellRegret reg = lifted_regret(history, cell, ratios);
    const double scale = std::isnan(w_total) ? 1.0 : w_total;
    const double reg_tilde_raw = reg.reg_tilde * scale;
    // reg_T / alpha_T^1, divided by w_T, equals reg_T / alpha_T.
    const double incremental_raw = history.reg_final[cell] / alpha_total * scale;
    const double max_form_raw = std::max(0.0, reg.reg_external) * scale;
    const double s1 = reg_tilde_raw;                          // >= -1e-9
    const double s2 = reg_tilde_raw - incremental_raw;        // >= -1e-6
    const double s3 = -std::abs(reg_tilde_raw - max_form_raw);  // >= -1e-6
    result.worst_slack = std::min({result.worst_slack, s1, s2, s3});
    if (s1 < -1e-9 || s2 < -1e-6 || s3 < -1e-6) result.pass = false;
    ++result.cells_checked;
  }
  return result;
}

CheckResult delta_recursion_check(const RunHistory& history) {
  CheckResult result;
  result.check_name = "gap_recursion";
  const int total = history.rounds();
  const int horizon = history.game.horizon();
  const WeightSchedule schedule(history.game.horizon(), history.params.base_eta);
  result.worst_slack = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= total; ++t) {
    const Vec profile = schedule.alpha_profile(t);
    const RoundRecord& rec = history.records[t - 1];
    for (int h = 0; h < horizon; ++h) {
      double mixed_next = 0.0;
      if (h + 1 < horizon) {
        for (int j = 1; j <= t; ++j)
          mixed_next += profile[j - 1] * history.records[j - 1].delta[h + 1];
      }
      const double slack = mixed_next + rec.reg_stage[h] - rec.delta[h];
      result.worst_slack = std::min(result.worst_slack, slack);
      ++result.cells_checked;
    }
  }
  result.pass = result.worst_slack >= -1e-9;
  return result;
}

double gap_envelope(int round, int horizon, int num_players, double alpha_tilde, int max_actions) {
  const double h = static_cast<double>(horizon);
  const double bound = 864.0 * std::pow(h, 3.5) * num_players *
                       (alpha_tilde * std::log(static_cast<double>(round)) +
                        2.0 * std::log(static_cast<double>(max_actions)) + 2.0) /
                       round;
  return std::min(h, bound);
}

CheckResult envelope_check(const RunHistory& history) {
  CheckResult result;
  result.check_name = "gap_envelope";
  result.worst_slack = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= history.rounds(); ++t) {
    const double bound = gap_envelope(t, history.game.horizon(), history.game.num_players(),
                                      history.params.alpha_tilde, history.game.max_actions());
    result.worst_slack = std::min(result.worst_slack, bound - history.records[t - 1].gap_raw);
    ++result.cells_checked;
  }
  result.pass = result.worst_slack >= -1e-12;
  return result;
}

CheckResult weight_suite_check(const std::vector<int>& horizons, int max_round) {
  CheckResult result;
  result.check_name = "weight_suite";
  result.worst_slack = std::numeric_limits<double>::infinity();
  auto fold = [&](double slack) { result.worst_slack = std::min(result.worst_slack, slack); };
  for (int horizon : horizons) {
    const WeightSchedule schedule(horizon, 1.0);
    std::vector<double> profile;  // alpha_t^j for the current t
    profile.reserve(max_round);
    // Exact binomials C(H+t-1, H) via Pascal additions, independent of the
    // schedule's multiply/divide form.
    std::vector<std::uint64_t> pascal(static_cast<std::size_t>(horizon) + 1, 0);
    pascal[0] = 1;  // row t-1+H of the triangle, rebuilt incrementally
    for (int t = 1; t <= max_round; ++t) {
      const double alpha_t = schedule.alpha(t);
      for (double& p : profile) p *= 1.0 - alpha_t;
      profile.push_back(alpha_t);

      double sum = 0.0, sum_over_j = 0.0, sum_alpha_sq = 0.0;
      double min_step = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= t; ++j) {
        const double v = profile[j - 1];
        sum += v;
        sum_over_j += v / j;
        const double alpha_j = schedule.alpha(j);
        sum_alpha_sq += v * alpha_j * alpha_j;
        if (j < t) min_step = std::min(min_step, profile[j] - v);
      }
      fold(1e-12 - std::abs(sum - 1.0));
      if (t > 1) fold(min_step + 1e-15);
      fold(1.0 / t - profile[0] + 1e-15);
      fold((1.0 + 1.0 / horizon) / t - sum_over_j + 1e-12);
      fold(3.0 * static_cast<double>(horizon) / t - sum_alpha_sq + 1e-12);

      if (t <= 50) {
        // Advance Pascal row to n = H + t - 1 and compare C(n, H) exactly.
        if (t == 1) {
          for (int n = 1; n <= horizon; ++n)
            for (int k = std::min(n, horizon); k >= 1; --k) pascal[k] += pascal[k - 1];
        } else {
          for (int k = horizon; k >= 1; --k) pascal[k] += pascal[k - 1];
        }
        const auto exact = schedule.w_exact(t);
        if (!exact || *exact != pascal[horizon]) fold(-1.0);
      }
      if (t <= 2000) {
        const double ratio = profile[t - 1] / profile[0];
        fold(1e-10 - std::abs(ratio - schedule.w(t)) / schedule.w(t));
      }
      ++result.cells_checked;
    }
  }
  result.pass = result.worst_slack >= 0.0;
  return result;
}

CheckResult lifted_identity_check(std::uint64_t seed, int tuples) {
  CheckResult result;
  result.check_name = "lifted_objective_identity";
  result.worst_slack = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (int k = 0; k < tuples; ++k) {
    const int d = 2 + static_cast<int>(rng() % 15);
    const double alpha_tilde = 3.0 + 197.0 * uniform_unit(rng);
    const double lambda = 1e-6 + (1.0 - 1e-6) * uniform_unit(rng);
    Vec signal(d), x(d);
    double total = 0.0;
    for (int j = 0; j < d; ++j) {
      signal[j] = -50.0 + 100.0 * uniform_unit(rng);
      x[j] = -std::log(1.0 - uniform_unit(rng));
      total += x[j];
    }
    x /= total;
    x = x.max(1e-300);
    const double lifted = lifted_objective(lambda * x, signal, alpha_tilde);
    const double split = lambda * (signal * x).sum() + (alpha_tilde - 1.0) * std::log(lambda) -
                         (x * x.log()).sum();
    result.worst_slack = std::min(result.worst_slack, 1e-10 - std::abs(lifted - split));
    ++result.cells_checked;
  }
  result.pass = result.worst_slack >= 0.0;
  return result;
}

CheckResult lifted_argmax_check(const RunHistory& history, int samples, int max_rounds,
                                std::uint64_t seed) {
  CheckResult result;
  result.check_name = "lifted_argmax";
  result.worst_slack = std::numeric_limits<double>::infinity();
  const CellGrid grid = history.grid();
  const int rounds = std::min(history.rounds(), max_rounds);
  for (int t = 1; t <= rounds; ++t) {
    const RoundRecord& rec = history.records[t - 1];
    for (int cell = 0; cell < grid.size(); ++cell) {
      LearnerState state(static_cast<int>(rec.policy[cell].size()));
      state.signal = rec.signal[cell];
      state.policy = rec.policy[cell];
      state.lambda = rec.lambda[cell];
      const ArgmaxCheck check = verify_lifted_argmax(
          state, history.params, samples, seed + static_cast<std::uint64_t>(t) * grid.size() + cell);
      result.worst_slack = std::min(result.worst_slack, 1e-8 - check.worst_violation);
      if (!check.ok) result.pass = false;
      ++result.cells_checked;
    }
  }
  return result;
}

CheckResult qv_identity_check(std::uint64_t seed, int games, int rounds) {
  CheckResult result;
  result.check_name = "qv_equivalence";
  result.worst_slack = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (int g = 0; g < games; ++g) {
    const int players = 2 + static_cast<int>(rng() % 2);
    const int states = 2 + static_cast<int>(rng() % 3);
    const int actions = 2 + static_cast<int>(rng() % 3);
    const int horizon = 1 + static_cast<int>(rng() % 4);
    MarkovGame game = generate_random_game(rng(), players, states, actions, horizon, 0.8);
    // Replace the sticky rows with full action-dependent random dynamics.
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
    RunConfig config;
    config.rounds = rounds;
    config.track_q_tables = true;
    Trainer trainer(std::move(game), config);
    trainer.run_all();
    const double residual = trainer.result().qv_residual_max;
    result.worst_slack = std::min(result.worst_slack, 1e-9 - residual);
    ++result.cells_checked;
  }
  result.pass = result.worst_slack >= 0.0;
  return result;
}

SensitivityStats sensitivity_probe(const Vec& signal, const HyperParams& params,
                                   int num_perturbations, double max_shift, std::uint64_t seed) {
  SensitivityStats stats;
  const double base = solve_lambda(signal, params).lambda;
  std::mt19937_64 rng(seed);
  Vec shifted(signal.size());
  for (int k = 0; k < num_perturbations; ++k) {
    for (Eigen::Index j = 0; j < signal.size(); ++j)
      shifted[j] = signal[j] + max_shift * (2.0 * uniform_unit(rng) - 1.0);
    const double moved = solve_lambda(shifted, params).lambda;
    const double ratio = base / moved;
    stats.min_ratio = std::min(stats.min_ratio, ratio);
    stats.max_ratio = std::max(stats.max_ratio, ratio);
    if (ratio < 0.7 || ratio > 1.4) ++stats.outside_band;
    ++stats.probes;
  }
  return stats;
}

CheckResult sensitivity_check(const RunHistory& history, int probes_per_signal,
                              std::uint64_t seed) {
  CheckResult result;
  result.check_name = "lambda_sensitivity";
  result.hard = false;
  result.worst_slack = std::numeric_limits<double>::infinity();
  const CellGrid grid = history.grid();
  const double shift = 2.0 * history.game.horizon() * history.params.base_eta;
  const RoundRecord& rec = history.records.back();
  for (int cell = 0; cell < grid.size(); ++cell) {
    const SensitivityStats stats = sensitivity_probe(rec.signal[cell], history.params,
                                                     probes_per_signal, shift, seed + cell);
    result.worst_slack = std::min(
        {result.worst_slack, stats.min_ratio - 0.7, 1.4 - stats.max_ratio});
    result.cells_checked += stats.probes;
  }
  return result;  // informational: pass stays true
}

std::vector<CheckResult> run_verification(const RunHistory& history, std::uint64_t seed) {
  std::vector<CheckResult> checks;
  checks.push_back(weight_suite_check({1, 2, 3, 5}, 2000));
  checks.push_back(lifted_identity_check(seed, 500));
  checks.push_back(lifted_argmax_check(history, 200, 50, seed + 1));
  checks.push_back(qv_identity_check(seed + 2, 5, 100));
  checks.push_back(rvu_check(history));
  checks.push_back(signal_deviation_check(history));
  checks.push_back(nonneg_regret_check(history));
  checks.push_back(delta_recursion_check(history));
  checks.push_back(envelope_check(history));
  checks.push_back(sensitivity_check(history, 50, seed + 3));
  return checks;
}

nlohmann::json verification_report(const std::vector<CheckResult>& checks) {
  nlohmann::json report;
  report["format"] = "mg-verify-v1";
  nlohmann::json entries = nlohmann::json::array();
  bool all_pass = true;
  for (const CheckResult& check : checks) {
    entries.push_back({{"check_name", check.check_name},
                       {"cells_checked", check.cells_checked},
                       {"worst_slack", check.worst_slack},
                       {"pass", check.pass}});
    if (check.hard && !check.pass) all_pass = false;
  }
  report["checks"] = std::move(entries);
  report["pass"] = all_pass;
  return report;
}

}  // namespace mgdlrc
