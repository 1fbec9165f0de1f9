#pragma once

// Lower bounds on the minimum energy E_min for a fidelity-quality profile:
// the single-level pointwise bound sup_Q log F(Q) / Q, the general K-level
// family
//
//   E >= N_1 log((1+tau_1)/(D(N_1)+tau_1))
//      + sum_{k=2..K} N_k log[(1+tau_k)(D(N_k)+tau_{k-1}) /
//                             ((1+tau_{k-1})(D(N_k)+tau_k))]
//
// with tau_1 >= ... >= tau_K = 0 and N_1 >= ... >= N_K > 0, and the
// optimizers that search these families. For the square-law profile all
// optimization runs in the normalized variable q = sqrt(alpha) * Q, so every
// returned bound scales exactly as sqrt(alpha).

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "edt/numerics.hpp"
#include "edt/profiles.hpp"

namespace edt::bounds {

struct LowerBoundParams {
  std::vector<double> taus;          // K entries, nonincreasing, last exactly 0
  std::vector<double> noise_levels;  // K entries, nonincreasing, all positive
};

inline void validate(const LowerBoundParams& p) {
  const std::size_t k = p.taus.size();
  if (k == 0 || p.noise_levels.size() != k) {
    throw std::invalid_argument("LowerBoundParams: need K >= 1 taus and K noise levels");
  }
  if (p.taus.back() != 0.0) {
    throw std::invalid_argument("LowerBoundParams: last tau must be exactly 0");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(p.taus[i] >= 0.0)) throw std::invalid_argument("LowerBoundParams: taus must be >= 0");
    if (!(p.noise_levels[i] > 0.0)) {
      throw std::invalid_argument("LowerBoundParams: noise levels must be > 0");
    }
    if (i > 0) {
      if (p.taus[i] > p.taus[i - 1]) {
        throw std::invalid_argument("LowerBoundParams: taus must be nonincreasing");
      }
      if (p.noise_levels[i] > p.noise_levels[i - 1]) {
        throw std::invalid_argument("LowerBoundParams: noise levels must be nonincreasing");
      }
    }
  }
}

// K-level lower bound evaluated at the given (tau, N) parameters. Each log
// argument is assembled as a product before taking the log, so degenerate
// levels (equal taus) contribute exactly zero.
template <FidelityProfile P>
double lemma1_bound(const P& profile, const LowerBoundParams& params) {
  validate(params);
  const std::size_t k_levels = params.taus.size();
  auto distortion_at = [&profile](double noise) { return 1.0 / profile.fidelity(1.0 / noise); };

  const double d1 = distortion_at(params.noise_levels[0]);
  double first_arg = (1.0 + params.taus[0]) / (d1 + params.taus[0]);
  if (!(first_arg > 0.0)) {
    throw std::domain_error("lemma1_bound: nonpositive log argument (invalid tau/N combination)");
  }
  double total = params.noise_levels[0] * std::log(first_arg);
  for (std::size_t k = 1; k < k_levels; ++k) {
    const double dk = distortion_at(params.noise_levels[k]);
    const double num = (1.0 + params.taus[k]) * (dk + params.taus[k - 1]);
    const double den = (1.0 + params.taus[k - 1]) * (dk + params.taus[k]);
    if (!(num > 0.0 && den > 0.0)) {
      throw std::domain_error("lemma1_bound: nonpositive log argument (invalid tau/N combination)");
    }
    total += params.noise_levels[k] * std::log(num / den);
  }
  return total;
}

// Normalized two-level objective (alpha factored out via q = sqrt(alpha)*Q):
//   log(1 + q1^2/(1 + tau(1+q1^2)))/q1 + log(1 + tau q2^2/(1+tau))/q2
inline double two_level_objective(double q1, double q2, double tau) {
  if (!(q1 > 0.0 && q2 > q1 && tau >= 0.0)) {
    throw std::invalid_argument("two_level_objective: need q2 > q1 > 0 and tau >= 0");
  }
  const double q1sq = q1 * q1;
  const double first = std::log1p(q1sq / (1.0 + tau * (1.0 + q1sq))) / q1;
  const double second = std::log1p(tau * q2 * q2 / (1.0 + tau)) / q2;
  return first + second;
}

struct PointwiseSearch {
  double q_lo = 1e-6;
  double q_hi = 1e3;
  double x_tol = 1e-10;
  std::size_t grid = 512;  // coarse bracketing scan used for generic profiles
};

// sup_{Q>0} log F(Q) / Q for the square-law profile. The normalized
// objective log(1+q^2)/q is unimodal on the search range, so golden-section
// search locates the constant directly; the bound is constant * sqrt(alpha).
inline BoundReport pointwise_lower_bound(const SquareLawProfile& profile,
                                         const PointwiseSearch& cfg = {}) {
  auto objective = [](double q) { return std::log1p(q * q) / q; };
  const auto r = numerics::golden_section_maximize(objective, cfg.q_lo, cfg.q_hi, cfg.x_tol);
  const double root_alpha = std::sqrt(profile.alpha());
  return make_bound_report(r.value, profile.alpha(),
                           {{"q_star", r.argmax}, {"Q_star", r.argmax / root_alpha}},
                           r.iterations, true);
}

// Generic-profile version: a log-spaced bracketing scan followed by
// golden-section refinement of log F(Q) / Q. The report's normalized
// constant equals the bound itself (no alpha to factor out).
template <FidelityProfile P>
BoundReport pointwise_lower_bound(const P& profile, const PointwiseSearch& cfg = {}) {
  if (!(cfg.q_lo > 0.0 && cfg.q_hi > cfg.q_lo && cfg.grid >= 8)) {
    throw std::invalid_argument("pointwise_lower_bound: bad search configuration");
  }
  auto objective = [&profile](double q) { return std::log(profile.fidelity(q)) / q; };
  const double ratio = std::log(cfg.q_hi / cfg.q_lo);
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.grid; ++i) {
    const double q =
        cfg.q_lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(cfg.grid - 1));
    const double v = objective(q);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  auto grid_q = [&](std::size_t i) {
    return cfg.q_lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(cfg.grid - 1));
  };
  const double lo = grid_q(best == 0 ? 0 : best - 1);
  const double hi = grid_q(best + 1 >= cfg.grid ? cfg.grid - 1 : best + 1);
  const auto r = numerics::golden_section_maximize(objective, lo, hi, cfg.x_tol);
  return make_bound_report(r.value, 1.0, {{"Q_star", r.argmax}}, r.iterations + cfg.grid, true);
}

// Theorem-1 series constant: sum_{k>=1} 1/sqrt(4^k e^k - 1). The tail past k
// is bounded geometrically: term(j) <= rho^j / sqrt(1 - e^-mu) with
// mu = 1 + 2 log 2 and rho = e^{-mu/2}.
inline numerics::SeriesResult theorem1_constant(double relative_tol = 1e-9,
                                                std::size_t hard_cap = 100'000) {
  const double mu = 1.0 + 2.0 * std::log(2.0);
  const double rho = std::exp(-0.5 * mu);
  const double head = 1.0 / std::sqrt(-std::expm1(-mu));
  auto term = [mu](std::size_t k) {
    return 1.0 / std::sqrt(std::expm1(static_cast<double>(k) * mu));
  };
  auto tail = [rho, head](std::size_t k, double) {
    return head * std::pow(rho, static_cast<double>(k + 1)) / (1.0 - rho);
  };
  return numerics::sum_series(term, 1, relative_tol, hard_cap, tail);
}

// Maximizes the two-level objective from a normalized starting point
// (q1, q2, tau); the returned bound is the optimized constant * sqrt(alpha).
inline BoundReport optimize_two_level(const SquareLawProfile& profile, double q1, double q2,
                                      double tau, const numerics::OptimOptions& opts = {}) {
  numerics::Objective objective = [](std::span<const double> v) {
    return two_level_objective(v[0], v[1], v[2]);
  };
  auto r = numerics::maximize_projected(objective, {q1, q2, tau}, {1e-8, 2e-8, 0.0},
                                        {{.below = 0, .above = 1}}, opts);
  const double root_alpha = std::sqrt(profile.alpha());
  return make_bound_report(r.value, profile.alpha(),
                           {{"q1_star", r.argmax[0]},
                            {"q2_star", r.argmax[1]},
                            {"tau_star", r.argmax[2]},
                            {"Q1_star", r.argmax[0] / root_alpha},
                            {"Q2_star", r.argmax[1] / root_alpha}},
                           r.iterations, r.converged);
}

// Maximizes the K-level bound over all taus and noise levels. Internally the
// search runs in normalized coordinates (tau_1..tau_{K-1}, q_1..q_K) with
// q_k = sqrt(alpha)/N_k, which keeps the objective independent of alpha.
inline BoundReport optimize_k_level(const SquareLawProfile& profile, std::size_t levels,
                                    const LowerBoundParams& initial,
                                    const numerics::OptimOptions& opts = {}) {
  validate(initial);
  if (levels == 0 || initial.taus.size() != levels) {
    throw std::invalid_argument("optimize_k_level: initial parameters must have K levels");
  }
  const double root_alpha = std::sqrt(profile.alpha());
  const SquareLawProfile unit(1.0);

  // Variables: [tau_1 .. tau_{K-1}, q_1 .. q_K] (tau_K is pinned at 0).
  const std::size_t n_tau = levels - 1;
  auto to_params = [&](std::span<const double> v) {
    LowerBoundParams p;
    // Optimizer layout is ascending (tau_{K-1}..tau_1, then q_1..q_K);
    // stored order is tau_1 >= ... >= tau_K = 0 and N_1 >= ... >= N_K.
    p.taus.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_tau));
    std::reverse(p.taus.begin(), p.taus.end());
    p.taus.push_back(0.0);
    p.noise_levels.resize(levels);
    for (std::size_t i = 0; i < levels; ++i) {
      p.noise_levels[i] = 1.0 / v[n_tau + i];  // q ascending -> N descending
    }
    return p;
  };

  numerics::Objective objective = [&](std::span<const double> v) {
    return lemma1_bound(unit, to_params(v));
  };

  // Initial point mapped into the optimizer layout: taus ascending
  // (tau_{K-1}..tau_1), then q ascending.
  std::vector<double> x0;
  x0.reserve(n_tau + levels);
  for (std::size_t i = 0; i < n_tau; ++i) x0.push_back(initial.taus[n_tau - 1 - i]);
  for (std::size_t i = 0; i < levels; ++i) {
    x0.push_back(root_alpha / initial.noise_levels[i]);  // q_k = sqrt(alpha)/N_k, ascending
  }
  std::vector<double> lb(n_tau + levels, 0.0);
  for (std::size_t i = 0; i < levels; ++i) lb[n_tau + i] = 1e-6;
  std::vector<numerics::Ordering> ord;
  for (std::size_t i = 0; i + 1 < n_tau; ++i) ord.push_back({.below = i, .above = i + 1});
  for (std::size_t i = 0; i + 1 < levels; ++i) {
    ord.push_back({.below = n_tau + i, .above = n_tau + i + 1});
  }

  auto r = numerics::maximize_projected(objective, std::move(x0), std::move(lb), std::move(ord),
                                        opts);
  const auto best = to_params(r.argmax);
  std::vector<std::pair<std::string, double>> named;
  for (std::size_t i = 0; i < levels; ++i) {
    named.emplace_back("tau_" + std::to_string(i + 1), best.taus[i]);
  }
  for (std::size_t i = 0; i < levels; ++i) {
    // Noise levels scale with alpha: N_k = sqrt(alpha) / q_k.
    named.emplace_back("N_" + std::to_string(i + 1), best.noise_levels[i] * root_alpha);
  }
  return make_bound_report(r.value, profile.alpha(), std::move(named), r.iterations, r.converged);
}

}  // namespace edt::bounds
