#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "mgdlrc/types.hpp"
#include "mgdlrc/weights.hpp"

namespace mgdlrc {

enum class BaselineMode { expected_value, v_value };
enum class LambdaRule { argmax, two_case };

struct HyperParams {
  double beta = 70.0;
  double alpha_tilde = 0.0;  // beta*log(A_max)^2 + 2*log(A_max) + 2 by default
  double base_eta = 0.0;
  double lambda_floor = 1e-12;
  double lambda_cap = 1.0;
  BaselineMode baseline = BaselineMode::expected_value;
  LambdaRule lambda_rule = LambdaRule::argmax;
  int solver_grid = 256;
  double refine_tol = 1e-10;

  static double default_alpha_tilde(double beta, int max_actions);
  static HyperParams defaults(int max_actions, double base_eta, double beta = 70.0);
};

// Overflow-safe log(sum(exp(v))), max-shifted.
template <typename Scalar>
Scalar log_sum_exp(const VecT<Scalar>& v) {
  const Scalar m = v.maxCoeff();
  return m + std::log((v - m).exp().sum());
}

// Learning-rate objective f(lambda) = (alpha_tilde - 1) log lambda
//                                   + log sum_k exp(lambda * signal_k).
template <typename Scalar>
Scalar lambda_objective(Scalar lambda, const VecT<Scalar>& signal, Scalar alpha_tilde) {
  VecT<Scalar> scaled = lambda * signal;
  return (alpha_tilde - Scalar(1)) * std::log(lambda) + log_sum_exp<Scalar>(scaled);
}

// softmax(lambda * signal), max-shifted; sums to 1 and is invariant to
// constant shifts of the signal.
template <typename Scalar>
VecT<Scalar> softmax_policy(const VecT<Scalar>& signal, Scalar lambda) {
  VecT<Scalar> z = lambda * signal;
  VecT<Scalar> e = (z - z.maxCoeff()).exp();
  return e / e.sum();
}

struct LambdaSolution {
  double lambda = 1.0;
  bool at_floor = false;
};

// Maximizes lambda_objective over (lambda_floor, lambda_cap]: geometric grid
// scan followed by golden-section refinement inside the best bracket.  The
// objective is concave-plus-convex, so single-crossing of f' is not assumed;
// the returned value is never worse than the best point evaluated anywhere.
LambdaSolution solve_lambda(const Vec& signal, const HyperParams& params);

// Dispatch on the configured rule.  two_case replicates the shortcut form:
// lambda = eta when max_k signal_k >= -beta*log(num_actions), otherwise the
// grid argmax with cap eta.  The two rules are not interchangeable and no
// test asserts their equivalence.
LambdaSolution select_lambda(const Vec& signal, const HyperParams& params, int num_actions);

// <signal, y> + alpha_tilde*log(sum y) - (1/sum y) * sum_k y_k log y_k over
// the scaled simplex (0,1]*Delta.  Rejects nonpositive entries / zero mass.
double lifted_objective(const Vec& y, const Vec& signal, double alpha_tilde);

// Per-(player, stage, state) learner cell.  Accumulators are kept in
// w_t-normalized form: dual_avg = U_t / w_t and correction_prev =
// u_{t-1} / w_{t-1}, so the optimistic signal is
//
//   R_t = eta_t (U_t + (w_t/w_{t-1}) u_{t-1}) = base_eta * (dual_avg + correction_prev)
//
// identically, with no w_t factor ever materialized (w_t grows like t^H and
// would overflow raw accumulation on long runs).
struct LearnerState {
  Vec dual_avg;         // U_t / w_t
  Vec correction_prev;  // u_{t-1} / w_{t-1}
  Vec signal;           // R_t (valid after policy_update)
  Vec policy;           // x_t
  Vec policy_prev;      // x_{t-1}; equals policy at t=1
  double lambda = 1.0;
  bool lambda_at_floor = false;
  int round = 1;

  explicit LearnerState(int num_actions);
  int num_actions() const { return static_cast<int>(policy.size()); }
  Vec lifted_point() const { return lambda * policy; }
};

// R_t = base_eta * (dual_avg + correction_prev).
Vec optimistic_signal(const LearnerState& state, double base_eta);

// Phase A step: recompute signal, lambda and policy for the current round.
void policy_update(LearnerState& state, const HyperParams& params);

// Phase C step: fold the observed utility vector into the accumulators and
// advance the round counter.  baseline_value is consumed only in v_value
// mode; the default subtracts <utility, policy>.
void commit_feedback(LearnerState& state, const Vec& utility, double baseline_value,
                     BaselineMode mode, const WeightSchedule& schedule);

struct ArgmaxCheck {
  bool ok = true;
  double worst_violation = 0.0;  // max objective excess of any candidate
  std::string counterexample;
};

// Samples random candidates on the scaled simplex plus the lambda-grid
// softmax curve and checks none beats the committed lifted point by more
// than 1e-8 in lifted objective.
ArgmaxCheck verify_lifted_argmax(const LearnerState& state, const HyperParams& params,
                                 int samples, std::uint64_t seed);

}  // namespace mgdlrc
