#pragma once

#include <cstdint>
#include <optional>
#include <utility>

namespace fltorrent {

struct BoundInputs {
  int kappa = 1;
  std::int64_t k_beta = 0;
  std::int64_t K = 0;
  double mu = 0;  // expected spray receipts
  double m = 0;   // average degree
  int T_lag = 1;
  double q = 0;   // availability factor
  double eps = 0.1;
  std::int64_t s = 1;  // observations of one sender
  std::int64_t B_star = 0;
  std::int64_t O_star = 0;
  double phi = 0;
  double rho = 0;
  double X = 0;  // non-owner mass

  std::int64_t h() const { return k_beta > K ? k_beta - K : 0; }
};

double per_transfer_bound(int kappa, std::int64_t k_beta, std::int64_t K);
double p_lead(int T_lag);

struct MixingBound {
  double bound = 0;
  double eta = 0;
  bool vacuous = false;  // eta >= 1: the high-probability statement says nothing
};
MixingBound mixing_bound(const BoundInputs& in);

// 1 - C(B-O, s) / C(B, s). Throws std::domain_error for s > B or O > B.
double multi_obs_exact(std::int64_t B, std::int64_t O, std::int64_t s);
// Exact value as a reduced-free fraction (numerator, denominator) = (C(B,s) - C(B-O,s), C(B,s)); B <= 60.
std::pair<std::uint64_t, std::uint64_t> multi_obs_exact_fraction(int B, int O, int s);
double multi_obs_union(int kappa, std::int64_t h, std::int64_t s);

struct CollusionBounds {
  double af = 0;         // alliance-filtered gating/mixing cap
  MixingBound af_mixing;
  double af_multi = 0;   // repeated observations under collusion
};
CollusionBounds collusion_bounds(const BoundInputs& in);

// Fraction of request instances with a non-owner holder; nullopt when there were none.
std::optional<double> estimate_q(std::int64_t instances, std::int64_t with_nonowner);

}  // namespace fltorrent
