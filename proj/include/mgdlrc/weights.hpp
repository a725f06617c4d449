#pragma once

#include <cstdint>
#include <optional>

#include "mgdlrc/types.hpp"

namespace mgdlrc {

// Step-size and averaging-weight arithmetic shared by the policy and value
// updates.  With alpha_t = (H+1)/(H+t) the averaging profile is
//
//   alpha_t^t = alpha_t,   alpha_t^j = alpha_j * prod_{k=j+1..t} (1 - alpha_k)
//
// and the utility weights w_t = alpha_t^t / alpha_t^1 have the closed form
// w_t = C(H+t-1, H).  The closed form is verified against the product
// definition in the test suite before anything relies on it.
class WeightSchedule {
 public:
  WeightSchedule(int horizon, double base_eta);

  int horizon() const { return horizon_; }
  double base_eta() const { return base_eta_; }

  // alpha_t = (H+1)/(H+t), t >= 1.
  double alpha(int t) const;

  // (alpha_t^1, ..., alpha_t^t); entries sum to 1 and are nondecreasing in j.
  Vec alpha_profile(int t) const;

  // w_t = C(H+t-1, H) as a double (exact while it fits 53 bits).
  double w(int t) const;
  double log_w(int t) const;

  // Exact integer form when it fits std::uint64_t.
  std::optional<std::uint64_t> w_exact(int t) const;

  // kappa_t = w_t / w_{t-1} = (H+t-1)/(t-1) for t >= 2.  kappa_1 is never
  // consumed (the correction vector it multiplies is zero at t=1); defined
  // as 1 so the round loop needs no special case.
  double kappa(int t) const;

  // eta_t = base_eta / w_t.
  double eta_t(int t) const;

  static double theoretical_eta(int horizon, int num_players);

 private:
  int horizon_;
  double base_eta_;
};

}  // namespace mgdlrc
