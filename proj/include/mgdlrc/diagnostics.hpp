#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mgdlrc/history.hpp"
#include "mgdlrc/learner.hpp"
#include "mgdlrc/weights.hpp"

namespace mgdlrc {

struct CheckResult {
  std::string check_name;
  long cells_checked = 0;
  double worst_slack = 0.0;  // min over checked instances of (bound - value)
  bool pass = true;
  bool hard = true;  // informational checks never fail the report
};

// Per-cell ledger for the variation-in-utilities regret bound, evaluated on
// the w_T-normalized scale (every term divided by w_T so nothing overflows):
//
//   reg~ <= 2||u_T||_inf + (a~ log T + 2 log A_max)/eta_{T+1}
//           + sum_t eta_t ||u_t - kappa_t u_{t-1}||_inf^2
//           - (1/20) sum_{t<T} ||x_{t+1} - x_t||_1^2 / eta_t
//
// with u_t = w_t (nu_t - <nu_t, x_t> 1) reconstructed from the recorded
// utility/policy stream.  The first right-hand term does not bind t; both
// the final-round reading (term_a_last, used for pass/fail) and the
// conservative max over t (term_a_max) are reported.
struct RvuCellLedger {
  int player = 0, stage = 0, state = 0;
  double reg_tilde = 0.0;
  double term_a_last = 0.0;
  double term_a_max = 0.0;
  double term_b = 0.0;
  double term_c = 0.0;
  double term_d = 0.0;
  double slack_last = 0.0;
  double slack_max = 0.0;
};

std::vector<RvuCellLedger> rvu_ledgers(const RunHistory& history);
CheckResult rvu_check(const RunHistory& history);

// Per-round slack of the signal-deviation bound, on the w_t^2-normalized
// scale:  ||u~_t - u~_{t-1}||_inf^2 <= 6||nu_t - nu_{t-1}||_inf^2
//                                      + 4 H^2 ||x_t - x_{t-1}||_1^2,
// with nu_0 = 0 and x_0 = x_1.
double signal_deviation_slack(const Vec& nu_t, const Vec& nu_prev, const Vec& x_t,
                              const Vec& x_prev, int horizon, bool first_round);
CheckResult signal_deviation_check(const RunHistory& history);

// Nonnegative lifted regret: reg~ = max over {0} u {simplex vertices} of
// sum_t <u_t, y* - y_t>; checks reg~ >= 0, reg~ = max(0, Reg) and that it
// dominates the incremental weighted regret divided by alpha_T^1.
CheckResult nonneg_regret_check(const RunHistory& history);

// Stagewise gap recursion delta_t[h] <= sum_j alpha_t^j delta_j[h+1] +
// max_{i,s} reg_t[h], checked at every (t, h) of the recorded run.
CheckResult delta_recursion_check(const RunHistory& history);

// Final-bound envelope at every recorded round:
//   gap_t <= min(H, 864 H^{7/2} N (a~ log t + 2 log A_max + 2) / t).
double gap_envelope(int round, int horizon, int num_players, double alpha_tilde, int max_actions);
CheckResult envelope_check(const RunHistory& history);

// Numeric suite for the averaging-weight identities (profile sums to one,
// monotone, alpha_t^1 <= 1/t, the 1/j and alpha_j^2 moment bounds, and the
// closed-form w).
CheckResult weight_suite_check(const std::vector<int>& horizons, int max_round);

// Lifted-objective change of variables on random tuples.
CheckResult lifted_identity_check(std::uint64_t seed, int tuples);

// verify_lifted_argmax over recorded rounds (bounded by max_rounds).
CheckResult lifted_argmax_check(const RunHistory& history, int samples, int max_rounds,
                                std::uint64_t seed);

// Q-form vs V-form value updates on freshly generated small random games
// with action-dependent transitions.
CheckResult qv_identity_check(std::uint64_t seed, int games, int rounds);

struct SensitivityStats {
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  int outside_band = 0;  // ratios outside [0.7, 1.4]
  int probes = 0;
};

// Ratio of solved learning rates under sup-norm perturbations of the signal
// bounded by max_shift.  Informational: the multiplicative-stability band is
// reported, never asserted.
SensitivityStats sensitivity_probe(const Vec& signal, const HyperParams& params,
                                   int num_perturbations, double max_shift, std::uint64_t seed);
CheckResult sensitivity_check(const RunHistory& history, int probes_per_signal,
                              std::uint64_t seed);

// Full suite over a recorded run, as emitted by the verify subcommand.
std::vector<CheckResult> run_verification(const RunHistory& history, std::uint64_t seed);
nlohmann::json verification_report(const std::vector<CheckResult>& checks);

}  // namespace mgdlrc
