#include "mgdlrc/weights.hpp"

#include <cmath>
#include <stdexcept>

namespace mgdlrc {

WeightSchedule::WeightSchedule(int horizon, double base_eta)
    : horizon_(horizon), base_eta_(base_eta) {
  if (horizon < 1) throw std::invalid_argument("WeightSchedule: horizon must be >= 1");
  if (!(base_eta > 0.0)) throw std::invalid_argument("WeightSchedule: base_eta must be > 0");
}

double WeightSchedule::alpha(int t) const {
  if (t < 1) throw std::invalid_argument("WeightSchedule::alpha: round must be >= 1");
  return static_cast<double>(horizon_ + 1) / static_cast<double>(horizon_ + t);
}

Vec WeightSchedule::alpha_profile(int t) const {
  if (t < 1) throw std::invalid_argument("WeightSchedule::alpha_profile: round must be >= 1");
  Vec profile(t);
  profile[t - 1] = alpha(t);
  double suffix = 1.0;  // prod_{k=j+1..t} (1 - alpha_k)
  for (int j = t - 1; j >= 1; --j) {
    suffix *= 1.0 - alpha(j + 1);
    profile[j - 1] = alpha(j) * suffix;
  }
  return profile;
}

std::optional<std::uint64_t> WeightSchedule::w_exact(int t) const {
  if (t < 1) throw std::invalid_argument("WeightSchedule::w_exact: round must be >= 1");
  // C(H+t-1, H) built factor by factor; each partial product is itself a
  // binomial coefficient, so the division is always exact.
  unsigned __int128 r = 1;
  for (int k = 1; k <= horizon_; ++k) {
    r = r * static_cast<unsigned>(t - 1 + k);
    r /= static_cast<unsigned>(k);
    if (r > static_cast<unsigned __int128>(UINT64_MAX)) return std::nullopt;
  }
  return static_cast<std::uint64_t>(r);
}

double WeightSchedule::w(int t) const {
  if (auto exact = w_exact(t)) return static_cast<double>(*exact);
  return std::exp(log_w(t));
}

double WeightSchedule::log_w(int t) const {
  if (t < 1) throw std::invalid_argument("WeightSchedule::log_w: round must be >= 1");
  return std::lgamma(static_cast<double>(horizon_ + t)) -
         std::lgamma(static_cast<double>(t)) -
         std::lgamma(static_cast<double>(horizon_ + 1));
}

double WeightSchedule::kappa(int t) const {
  if (t < 1) throw std::invalid_argument("WeightSchedule::kappa: round must be >= 1");
  if (t == 1) return 1.0;
  return static_cast<double>(horizon_ + t - 1) / static_cast<double>(t - 1);
}

double WeightSchedule::eta_t(int t) const { return base_eta_ / w(t); }

double WeightSchedule::theoretical_eta(int horizon, int num_players) {
  if (horizon < 1 || num_players < 1)
    throw std::invalid_argument("theoretical_eta: horizon and num_players must be >= 1");
  return 1.0 / (24.0 * horizon * std::sqrt(static_cast<double>(horizon)) * num_players);
}

}  // namespace mgdlrc
