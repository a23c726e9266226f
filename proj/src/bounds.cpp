#include "fltorrent/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fltorrent {

double per_transfer_bound(int kappa, std::int64_t k_beta, std::int64_t K) {
  if (kappa < 1) throw std::domain_error("kappa must be at least 1");
  const std::int64_t h = std::max<std::int64_t>(0, k_beta - K);
  return static_cast<double>(kappa) / static_cast<double>(kappa + h);
}

double p_lead(int T_lag) {
  if (T_lag < 1) throw std::domain_error("T_lag must be at least 1");
  return static_cast<double>(T_lag - 1) / (2.0 * T_lag);
}

namespace {

double cap(int kappa, double mass) {
  if (mass <= 0) return 1.0;
  return std::min(1.0, kappa / (kappa + mass));
}

MixingBound mixing_with(const BoundInputs& in, double discount) {
  if (!(in.eps > 0 && in.eps < 1)) throw std::domain_error("eps must be in (0,1)");
  const double pl = p_lead(in.T_lag);
  const double mass = discount * (1.0 - in.eps) * (in.mu + in.m * pl * in.q);
  MixingBound r;
  r.bound = std::min(per_transfer_bound(in.kappa, in.k_beta, in.K), cap(in.kappa, mass));
  r.eta = std::exp(-in.eps * in.eps * in.mu / 2.0) + std::exp(-in.eps * in.eps * in.m * pl * in.q / 2.0);
  r.vacuous = r.eta >= 1.0;
  return r;
}

}  // namespace

MixingBound mixing_bound(const BoundInputs& in) { return mixing_with(in, 1.0); }

double multi_obs_exact(std::int64_t B, std::int64_t O, std::int64_t s) {
  if (B < 0 || O < 0 || s < 0 || O > B) throw std::domain_error("need 0 <= O <= B, s >= 0");
  if (s > B) throw std::domain_error("more draws than buffer entries");
  // C(B-O, s)/C(B, s) = prod_{i<s} (B-O-i)/(B-i)
  double miss = 1.0;
  for (std::int64_t i = 0; i < s; ++i) {
    const std::int64_t num = B - O - i;
    if (num <= 0) return 1.0;
    miss *= static_cast<double>(num) / static_cast<double>(B - i);
  }
  return 1.0 - miss;
}

std::pair<std::uint64_t, std::uint64_t> multi_obs_exact_fraction(int B, int O, int s) {
  if (B < 0 || B > 60 || O < 0 || O > B || s < 0 || s > B) throw std::domain_error("fraction form needs 0 <= O, s <= B <= 60");
  std::vector<std::vector<std::uint64_t>> C(B + 1, std::vector<std::uint64_t>(B + 1, 0));
  for (int a = 0; a <= B; ++a) {
    C[a][0] = 1;
    for (int b = 1; b <= a; ++b) C[a][b] = C[a - 1][b - 1] + (b <= a - 1 ? C[a - 1][b] : 0);
  }
  const std::uint64_t den = C[B][s];
  const std::uint64_t miss = s <= B - O ? C[B - O][s] : 0;
  return {den - miss, den};
}

double multi_obs_union(int kappa, std::int64_t h, std::int64_t s) {
  if (kappa < 1) throw std::domain_error("kappa must be at least 1");
  if (s <= 0) return 0.0;
  return std::min(1.0, static_cast<double>(s) * kappa / static_cast<double>(kappa + std::max<std::int64_t>(0, h)));
}

CollusionBounds collusion_bounds(const BoundInputs& in) {
  if (in.phi < 0 || in.phi > 1 || in.rho < 0 || in.rho > 1) throw std::domain_error("phi and rho must be in [0,1]");
  const double keep = 1.0 - in.phi * in.rho;
  CollusionBounds r;
  const double gate = per_transfer_bound(in.kappa, in.k_beta, in.K);
  r.af = std::min(gate, cap(in.kappa, keep * in.X));
  r.af_mixing = mixing_with(in, keep);
  r.af_multi = in.s <= 0 ? 0.0 : std::min(1.0, static_cast<double>(in.s) * r.af);
  return r;
}

std::optional<double> estimate_q(std::int64_t instances, std::int64_t with_nonowner) {
  if (instances <= 0) return std::nullopt;
  return static_cast<double>(with_nonowner) / static_cast<double>(instances);
}

}  // namespace fltorrent
