#include "mgdlrc/learner.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace mgdlrc {

double HyperParams::default_alpha_tilde(double beta, int max_actions) {
  const double ln_a = std::log(static_cast<double>(max_actions));
  return beta * ln_a * ln_a + 2.0 * ln_a + 2.0;
}

HyperParams HyperParams::defaults(int max_actions, double base_eta, double beta) {
  HyperParams p;
  p.beta = beta;
  p.alpha_tilde = default_alpha_tilde(beta, max_actions);
  p.base_eta = base_eta;
  return p;
}

namespace {

// Golden-section maximization of f on [lo, hi]; keeps the best point seen.
template <typename F>
void golden_refine(F&& f, double lo, double hi, double tol, double& best_x, double& best_f) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  auto consider = [&](double x, double fx) {
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
    }
  };
  consider(x1, f1);
  consider(x2, f2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
      consider(x2, f2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
      consider(x1, f1);
    }
  }
}

// f'(lambda) = (alpha_tilde - 1)/lambda + <signal, softmax(lambda * signal)>.
double lambda_gradient(double lambda, const Vec& signal, double alpha_tilde) {
  Vec z = lambda * signal;
  const Vec w = (z - z.maxCoeff()).exp();
  return (alpha_tilde - 1.0) / lambda + (signal * w).sum() / w.sum();
}

}  // namespace

LambdaSolution solve_lambda(const Vec& signal, const HyperParams& params) {
  if (!signal.allFinite()) throw std::invalid_argument("solve_lambda: non-finite signal entry");
  if (!(params.lambda_floor > 0.0) || !(params.lambda_cap > params.lambda_floor) ||
      params.lambda_cap > 1.0)
    throw std::invalid_argument("solve_lambda: invalid lambda bounds");

  auto f = [&](double lam) { return lambda_objective<double>(lam, signal, params.alpha_tilde); };

  const int n = std::max(params.solver_grid, 2);
  const double ratio = std::pow(params.lambda_cap / params.lambda_floor, 1.0 / (n - 1));
  double best_x = params.lambda_cap;
  double best_f = f(params.lambda_cap);
  int best_idx = n - 1;
  double x = params.lambda_floor;
  for (int i = 0; i < n - 1; ++i, x *= ratio) {
    const double fx = f(x);
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
      best_idx = i;
    }
  }
  const double lo =
      best_idx == 0 ? params.lambda_floor : params.lambda_floor * std::pow(ratio, best_idx - 1);
  const double hi =
      best_idx >= n - 2 ? params.lambda_cap : params.lambda_floor * std::pow(ratio, best_idx + 1);
  golden_refine(f, lo, std::min(hi, params.lambda_cap), params.refine_tol, best_x, best_f);

  // Near an interior optimum f is numerically flat (quadratic against ULP
  // noise); the gradient is not.  Bisect f' inside the bracket when it
  // straddles zero and keep the stationary point unless it measurably loses.
  double a = lo, b = std::min(hi, params.lambda_cap);
  if (lambda_gradient(a, signal, params.alpha_tilde) > 0.0 &&
      lambda_gradient(b, signal, params.alpha_tilde) < 0.0) {
    for (int it = 0; it < 80 && b - a > 1e-15 * b; ++it) {
      const double mid = 0.5 * (a + b);
      (lambda_gradient(mid, signal, params.alpha_tilde) > 0.0 ? a : b) = mid;
    }
    const double stationary = 0.5 * (a + b);
    const double f_stationary = f(stationary);
    if (f_stationary >= best_f - 1e-12) {
      best_x = stationary;
      best_f = std::max(best_f, f_stationary);
    }
  }

  LambdaSolution sol;
  sol.lambda = std::clamp(best_x, params.lambda_floor, params.lambda_cap);
  sol.at_floor = sol.lambda <= params.lambda_floor * (1.0 + 1e-9);
  return sol;
}

LambdaSolution select_lambda(const Vec& signal, const HyperParams& params, int num_actions) {
  if (params.lambda_rule == LambdaRule::argmax) return solve_lambda(signal, params);
  const double eta_cap = std::min(params.base_eta, 1.0);
  if (signal.maxCoeff() >= -params.beta * std::log(static_cast<double>(num_actions)))
    return {eta_cap, false};
  HyperParams capped = params;
  capped.lambda_cap = eta_cap;
  capped.lambda_floor = std::min(params.lambda_floor, eta_cap / 2.0);
  return solve_lambda(signal, capped);
}

double lifted_objective(const Vec& y, const Vec& signal, double alpha_tilde) {
  if (y.size() != signal.size()) throw std::invalid_argument("lifted_objective: size mismatch");
  if (!(y.minCoeff() > 0.0)) throw std::invalid_argument("lifted_objective: nonpositive entry");
  const double mass = y.sum();
  if (!(mass > 0.0)) throw std::invalid_argument("lifted_objective: zero mass");
  return (signal * y).sum() + alpha_tilde * std::log(mass) - (y * y.log()).sum() / mass;
}

LearnerState::LearnerState(int num_actions) {
  if (num_actions < 1) throw std::invalid_argument("LearnerState: need at least one action");
  dual_avg = Vec::Zero(num_actions);
  correction_prev = Vec::Zero(num_actions);
  signal = Vec::Zero(num_actions);
  policy = Vec::Constant(num_actions, 1.0 / num_actions);
  policy_prev = policy;
}

Vec optimistic_signal(const LearnerState& state, double base_eta) {
  return base_eta * (state.dual_avg + state.correction_prev);
}

void policy_update(LearnerState& state, const HyperParams& params) {
  state.signal = optimistic_signal(state, params.base_eta);
  const LambdaSolution sol = select_lambda(state.signal, params, state.num_actions());
  state.lambda = sol.lambda;
  state.lambda_at_floor = sol.at_floor;
  Vec next = softmax_policy<double>(state.signal, state.lambda);
  state.policy_prev = state.round == 1 ? next : state.policy;
  state.policy = std::move(next);
}

void commit_feedback(LearnerState& state, const Vec& utility, double baseline_value,
                     BaselineMode mode, const WeightSchedule& schedule) {
  if (utility.size() != state.policy.size())
    throw std::invalid_argument("commit_feedback: utility length mismatch");
  const double b =
      mode == BaselineMode::expected_value ? (utility * state.policy).sum() : baseline_value;
  const Vec correction = utility - b;
  // U_{t+1}/w_{t+1} = (w_t/w_{t+1}) (U_t/w_t + u_t/w_t), and w_t/w_{t+1} = 1/kappa_{t+1}.
  const double shrink = 1.0 / schedule.kappa(state.round + 1);
  state.dual_avg = shrink * (state.dual_avg + correction);
  state.correction_prev = correction;
  ++state.round;
}

ArgmaxCheck verify_lifted_argmax(const LearnerState& state, const HyperParams& params,
                                 int samples, std::uint64_t seed) {
  const int d = state.num_actions();
  const Vec committed = state.lifted_point();
  const double committed_value = lifted_objective(committed, state.signal, params.alpha_tilde);
  constexpr double kSlack = 1e-8;

  ArgmaxCheck check;
  auto consider = [&](const Vec& candidate, const char* kind, int index) {
    const double value = lifted_objective(candidate, state.signal, params.alpha_tilde);
    const double excess = value - committed_value;
    if (excess > check.worst_violation) check.worst_violation = excess;
    if (excess > kSlack && check.ok) {
      check.ok = false;
      std::ostringstream msg;
      msg << kind << " candidate #" << index << " beats committed point by " << excess;
      check.counterexample = msg.str();
    }
  };

  // Grid candidates along the softmax curve.
  const int n = std::max(params.solver_grid, 2);
  const double ratio = std::pow(params.lambda_cap / params.lambda_floor, 1.0 / (n - 1));
  double lam = params.lambda_floor;
  for (int i = 0; i < n; ++i, lam *= ratio) {
    const double clamped = std::min(lam, params.lambda_cap);
    consider(clamped * softmax_policy<double>(state.signal, clamped), "grid", i);
  }

  std::mt19937_64 rng(seed);
  Vec candidate(d);
  for (int k = 0; k < samples; ++k) {
    double total = 0.0;
    for (int j = 0; j < d; ++j) {
      // Exponential draws normalize to a uniform simplex point.
      const double e = -std::log(1.0 - uniform_unit(rng));
      candidate[j] = e;
      total += e;
    }
    const double mass = params.lambda_floor +
                        (params.lambda_cap - params.lambda_floor) * uniform_unit(rng);
    candidate *= mass / total;
    candidate = candidate.max(1e-300);
    consider(candidate, "sampled", k);
  }
  return check;
}

}  // namespace mgdlrc
