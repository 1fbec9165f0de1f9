#pragma once

// The K-layer uncoded + digital achievable scheme: ladder schedules, their
// feasibility, the inclined-staircase fidelity curve, per-layer binning
// rates and digital energies, the total-energy series, and the (c, d)
// optimization of the geometric schedule family.
//
// A ladder with K jump points stores, in index-0 form,
//   quality[i]             = Q_{i+1}
//   analog_energy[i]       = A_i
//   analog_energy_total[i] = A_0 + ... + A_i   (the cumulative A_{i+1,total})
//   beta[i]                = beta_i, with beta[0] == 1
// and satisfies the jump condition
//   analog_energy_total[i-1] * Q_i + beta[i-1] = 1 + alpha * Q_i^2
// at every jump. The staircase is defined on [0, Q_K): on segment
// Q_k <= Q < Q_{k+1} the fidelity is beta[k] + Q * analog_energy_total[k],
// and past Q_K the truncated ladder is deliberately undefined.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "edt/numerics.hpp"
#include "edt/profiles.hpp"

namespace edt::scheme {

// sum_{i=0}^{k-1} d^i for real k >= 0, stable for d near 1.
inline double geometric_sum(double d, double k) {
  if (k <= 0.0) return 0.0;
  if (d == 0.0) return 1.0;
  if (d == 1.0) return k;
  return std::expm1(k * std::log1p(d - 1.0)) / (d - 1.0);
}

// d^x with the d == 0 edge handled explicitly (0^0 = 1, 0^x = 0 for x > 0).
inline double geometric_pow(double d, double x) {
  if (d == 0.0) return x == 0.0 ? 1.0 : 0.0;
  return std::exp(x * std::log(d));
}

struct LadderSchedule {
  double alpha = 1.0;
  std::vector<double> quality;
  std::vector<double> analog_energy;
  std::vector<double> analog_energy_total;
  std::vector<double> beta;

  std::size_t layers() const noexcept { return quality.size(); }
};

inline void validate_structure(const LadderSchedule& s) {
  const std::size_t k = s.quality.size();
  if (k == 0) throw std::invalid_argument("LadderSchedule: need at least one jump point");
  if (s.analog_energy.size() != k || s.analog_energy_total.size() != k || s.beta.size() != k) {
    throw std::invalid_argument("LadderSchedule: inconsistent array sizes");
  }
  if (!(s.alpha > 0.0)) throw std::invalid_argument("LadderSchedule: alpha must be positive");
  double prev = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(s.quality[i] > prev)) {
      throw std::invalid_argument("LadderSchedule: quality points must be strictly increasing");
    }
    prev = s.quality[i];
    if (!(s.analog_energy[i] >= 0.0)) {
      throw std::invalid_argument("LadderSchedule: analog energies must be nonnegative");
    }
  }
}

// Builds a consistent ladder from jump points and per-layer analog energies:
// prefix sums and the betas implied by the jump condition. beta[0] is pinned
// to 1; feasibility (beta increasing) is a separate question for
// check_feasibility, so deliberately infeasible ladders can be represented.
inline LadderSchedule ladder_from_energies(double alpha, std::vector<double> quality,
                                           std::vector<double> analog_energy) {
  LadderSchedule s;
  s.alpha = alpha;
  s.quality = std::move(quality);
  s.analog_energy = std::move(analog_energy);
  const std::size_t k = s.quality.size();
  s.analog_energy_total.resize(k);
  double run = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    run += s.analog_energy[i];
    s.analog_energy_total[i] = run;
  }
  s.beta.resize(k);
  s.beta[0] = 1.0;
  for (std::size_t i = 1; i < k; ++i) {
    const double q = s.quality[i];
    s.beta[i] = 1.0 + alpha * q * q - s.analog_energy_total[i] * q;
  }
  validate_structure(s);
  return s;
}

struct GeometricParams {
  double alpha = 1.0;
  double c = 1.0;
  double d = 0.5;
  std::size_t layers = 16;

  double delta() const { return c / std::sqrt(alpha); }
};

inline void validate(const GeometricParams& p) {
  if (!(p.alpha > 0.0)) throw std::invalid_argument("GeometricParams: alpha must be positive");
  if (!(p.c > 0.0)) throw std::invalid_argument("GeometricParams: c must be positive");
  // d == 0 is the single-uncoded-layer reduction; d >= 1 never yields an
  // increasing beta sequence.
  if (!(p.d >= 0.0 && p.d < 1.0)) throw std::invalid_argument("GeometricParams: need 0 <= d < 1");
  if (p.layers == 0) throw std::invalid_argument("GeometricParams: need at least one layer");
}

// Q_k = k*Delta, A_0 = alpha*Delta, A_k = d^k * alpha * Delta.
inline LadderSchedule geometric_schedule(const GeometricParams& p) {
  validate(p);
  const double delta = p.delta();
  std::vector<double> quality(p.layers);
  std::vector<double> energy(p.layers);
  for (std::size_t i = 0; i < p.layers; ++i) {
    quality[i] = static_cast<double>(i + 1) * delta;
    energy[i] = geometric_pow(p.d, static_cast<double>(i)) * p.alpha * delta;
  }
  return ladder_from_energies(p.alpha, std::move(quality), std::move(energy));
}

struct FeasibilityViolation {
  std::string what;
  std::size_t index = 0;
  double slack = 0.0;  // negative or zero when violated
};

// Verifies A_0 = alpha*Q_1, the jump condition at every jump, the strict cap
//   A_k < [alpha(Q_{k+1}^2 - Q_k^2) - A_{k,total}(Q_{k+1} - Q_k)] / Q_{k+1}
// and that beta is strictly increasing. Violations are data, not errors; an
// empty result means the ladder is feasible.
inline std::vector<FeasibilityViolation> check_feasibility(const LadderSchedule& s) {
  validate_structure(s);
  std::vector<FeasibilityViolation> out;
  const std::size_t k = s.layers();

  if (std::abs(s.beta[0] - 1.0) > 1e-9) {
    out.push_back({"beta0_not_one", 0, -std::abs(s.beta[0] - 1.0)});
  }
  {
    const double want = s.alpha * s.quality[0];
    const double resid = s.analog_energy[0] - want;
    if (std::abs(resid) > 1e-9 * std::max(1.0, want)) {
      out.push_back({"a0_not_alpha_q1", 0, -std::abs(resid)});
    }
  }
  for (std::size_t j = 1; j <= k; ++j) {
    // Jump condition j: A_{j,total} * Q_j + beta_{j-1} = 1 + alpha * Q_j^2.
    const double q = s.quality[j - 1];
    const double profile = 1.0 + s.alpha * q * q;
    const double resid = s.analog_energy_total[j - 1] * q + s.beta[j - 1] - profile;
    if (std::abs(resid) > 1e-9 * profile) {
      out.push_back({"jump_condition", j, -std::abs(resid)});
    }
  }
  for (std::size_t j = 1; j < k; ++j) {
    // Cap on A_j for j = 1..K-1, using Q_{j+1} = quality[j].
    const double qn = s.quality[j];
    const double qc = s.quality[j - 1];
    const double total = s.analog_energy_total[j - 1];
    const double rhs = (s.alpha * (qn * qn - qc * qc) - total * (qn - qc)) / qn;
    const double slack = rhs - s.analog_energy[j];
    if (!(slack > 0.0)) {
      out.push_back({"analog_energy_cap", j, slack});
    }
  }
  for (std::size_t j = 1; j < k; ++j) {
    const double slack = s.beta[j] - s.beta[j - 1];
    if (!(slack > 0.0)) {
      out.push_back({"beta_not_increasing", j, slack});
    }
  }
  return out;
}

struct Lemma2Check {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

// d^k < [(2k+1) - (d^k - 1)/(d - 1)] / (k+1) for 0 < d < 1, k >= 1.
inline Lemma2Check lemma2_inequality(double d, std::size_t k) {
  if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("lemma2_inequality: need 0 < d < 1");
  if (k == 0) throw std::invalid_argument("lemma2_inequality: need k >= 1");
  const double kk = static_cast<double>(k);
  const double lhs = geometric_pow(d, kk);
  const double rhs = (2.0 * kk + 1.0 - geometric_sum(d, kk)) / (kk + 1.0);
  return {lhs < rhs, lhs, rhs};
}

// Staircase fidelity at quality Q in [0, Q_K); right-continuous in Q, so an
// exact jump point belongs to the segment it opens. Beyond the last jump the
// ladder is undefined and an error is raised rather than extrapolating.
inline double staircase_fidelity(const LadderSchedule& s, double quality) {
  validate_structure(s);
  if (!(quality >= 0.0)) {
    throw std::invalid_argument("staircase_fidelity: quality must be >= 0");
  }
  if (!(quality < s.quality.back())) {
    throw std::domain_error("staircase_fidelity: quality beyond the truncated ladder (Q >= Q_K)");
  }
  const auto it = std::upper_bound(s.quality.begin(), s.quality.end(), quality);
  const std::size_t seg = static_cast<std::size_t>(it - s.quality.begin());
  return s.beta[seg] + quality * s.analog_energy_total[seg];
}

// Left limit of the staircase at jump point Q_k (k = 1..K); by the jump
// condition this equals the profile value 1 + alpha * Q_k^2 up to rounding.
inline double staircase_left_limit(const LadderSchedule& s, std::size_t jump) {
  validate_structure(s);
  if (jump == 0 || jump > s.layers()) {
    throw std::out_of_range("staircase_left_limit: jump index must be in [1, K]");
  }
  // Approaching Q_jump from below lies on segment jump-1, whose fidelity is
  // beta_{jump-1} + Q * A_{jump,total}; by the jump condition this meets the
  // profile 1 + alpha * Q_jump^2 exactly.
  return s.beta[jump - 1] + s.quality[jump - 1] * s.analog_energy_total[jump - 1];
}

// Binning rate of digital layer k (nats per source symbol):
//   R_k = 1/2 log[(beta_k + Q_k A_{k,total}) / (beta_{k-1} + Q_k A_{k,total})].
// Needs beta_k, so a ladder with K jumps resolves rates for k = 1..K-1;
// build one extra layer when the K-th rate is required.
inline double digital_rate(const LadderSchedule& s, std::size_t k) {
  validate_structure(s);
  if (k == 0 || k >= s.layers()) {
    throw std::out_of_range("digital_rate: layer index must be in [1, K-1] for a K-jump ladder");
  }
  const double q = s.quality[k - 1];
  const double total = s.analog_energy_total[k - 1];
  const double num = s.beta[k] + q * total;
  const double den = s.beta[k - 1] + q * total;
  if (!(num > 0.0 && den > 0.0)) {
    throw std::domain_error("digital_rate: schedule yields nonpositive log argument");
  }
  return 0.5 * std::log(num / den);
}

// Minimum digital energy B_k meeting the rate with equality under the
// infinite-bandwidth capacity C_k = B_k Q_k / 2.
inline double digital_energy(const LadderSchedule& s, std::size_t k) {
  const double rate = digital_rate(s, k);
  return 2.0 * rate / s.quality[k - 1];
}

struct EnergyBreakdown {
  double uncoded = 0.0;
  double digital = 0.0;
  double total = 0.0;
  std::size_t terms_used = 0;
  double tail_bound = 0.0;
};

struct EnergyOptions {
  double relative_tol = 1e-9;
  std::size_t hard_cap = 1'000'000;
};

namespace detail {

// Normalized (alpha = 1, Delta = c) series terms; E_total / sqrt(alpha)
// depends on (c, d) only.
inline double unc_term(double c, double d, double k) {
  const double kp = k + 1.0;
  const double beta = 1.0 + c * c * (kp * kp - kp * geometric_sum(d, kp));
  return c * geometric_pow(d, k) / beta;
}

inline double dig_term(double c, double d, double k) {
  const double g = 2.0 * k + 1.0 - k * geometric_pow(d, k) - geometric_sum(d, k + 1.0);
  return std::log1p(c * c * g / (1.0 + k * k * c * c)) / (k * c);
}

}  // namespace detail

// Total energy E_unc + E_dig of the infinite geometric ladder:
//   E_unc = sum_{k>=0} A_k / beta_k,   E_dig = sum_{k>=1} B_k,
// summed to the requested relative tolerance. The uncoded tail is bounded
// geometrically (d^k with beta increasing); the digital tail, which decays
// like 2/(c k^2), is resolved by the integral tail estimate when the
// comparison bound 3/(c k) alone cannot reach the tolerance within the cap.
inline EnergyBreakdown total_energy(const GeometricParams& p, const EnergyOptions& opts = {}) {
  validate(p);
  if (!(opts.relative_tol > 0.0)) {
    throw std::invalid_argument("total_energy: relative tolerance must be positive");
  }
  const double c = p.c;
  const double d = p.d;
  const double half_tol = 0.5 * opts.relative_tol;

  numerics::SeriesResult unc;
  if (d == 0.0) {
    unc = {c, 1, 0.0};  // single uncoded layer: A_0 / beta_0 = c in normalized units
  } else {
    numerics::TailSeriesOptions uo;
    uo.relative_tol = half_tol;
    uo.hard_cap = opts.hard_cap;
    uo.simple_tail_bound = [c, d](std::size_t k) {
      const double kp = static_cast<double>(k) + 1.0;
      const double beta = 1.0 + c * c * ((kp + 1.0) * (kp + 1.0) - (kp + 1.0) * geometric_sum(d, kp + 1.0));
      return c * geometric_pow(d, kp) / ((1.0 - d) * std::max(beta, 1.0));
    };
    unc = numerics::sum_with_tail_estimate(
        [c, d](double k) { return detail::unc_term(c, d, k); }, 0, uo);
  }

  numerics::TailSeriesOptions dopt;
  dopt.relative_tol = half_tol;
  dopt.hard_cap = opts.hard_cap;
  dopt.simple_tail_bound = [c](std::size_t k) { return 3.0 / (c * static_cast<double>(k)); };
  const numerics::SeriesResult dig = numerics::sum_with_tail_estimate(
      [c, d](double k) { return detail::dig_term(c, d, k); }, 1, dopt);

  const double scale = std::sqrt(p.alpha);
  EnergyBreakdown out;
  out.uncoded = unc.value * scale;
  out.digital = dig.value * scale;
  out.total = out.uncoded + out.digital;
  out.terms_used = unc.terms_used + dig.terms_used;
  out.tail_bound = (unc.tail_bound + dig.tail_bound) * scale;
  return out;
}

struct UpperBoundOptions {
  double c_lo = 1e-5, c_hi = 1.0;
  std::size_t c_points = 51;
  double d_lo = 0.5, d_hi = 0.99999;
  std::size_t d_points = 51;
  double grid_tol = 1e-6;
  double refine_tol = 1e-7;
  double final_tol = 1e-9;
  double refine_step = 0.5;
  std::size_t refine_max_iterations = 600;
  std::size_t hard_cap = 1'000'000;
  std::function<void(const std::string&)> progress;  // optional status sink
};

// Minimizes E_total / sqrt(alpha) over c > 0, d in (0,1): a coarse grid
// (c log-spaced, d linear) followed by Nelder-Mead refinement in
// (log c, log(1-d)). Grid cells whose series cannot converge within the cap
// are skipped; ties prefer the smallest c, then the smallest d.
inline BoundReport optimize_upper_bound(double alpha, const UpperBoundOptions& opts = {}) {
  if (!(alpha > 0.0)) throw std::invalid_argument("optimize_upper_bound: alpha must be positive");

  auto normalized = [&](double c, double d, double tol) {
    GeometricParams p{.alpha = 1.0, .c = c, .d = d, .layers = 1};
    EnergyOptions eo{.relative_tol = tol, .hard_cap = opts.hard_cap};
    return total_energy(p, eo).total;
  };

  double best_val = std::numeric_limits<double>::infinity();
  double best_c = opts.c_lo, best_d = opts.d_lo;
  std::size_t evaluations = 0;
  const double log_ratio = std::log(opts.c_hi / opts.c_lo);
  for (std::size_t i = 0; i < opts.c_points; ++i) {
    const double c = opts.c_lo * std::exp(log_ratio * static_cast<double>(i) /
                                          static_cast<double>(opts.c_points - 1));
    for (std::size_t j = 0; j < opts.d_points; ++j) {
      const double d = opts.d_lo + (opts.d_hi - opts.d_lo) * static_cast<double>(j) /
                                       static_cast<double>(opts.d_points - 1);
      ++evaluations;
      double v;
      try {
        v = normalized(c, d, opts.grid_tol);
      } catch (const numerics::convergence_error&) {
        continue;
      }
      if (v < best_val) {
        best_val = v;
        best_c = c;
        best_d = d;
      }
    }
  }
  if (opts.progress) {
    opts.progress("grid scan done: E/sqrt(alpha) <= " + std::to_string(best_val) + " at c=" +
                  std::to_string(best_c) + ", d=" + std::to_string(best_d));
  }

  // Refinement in u = log c, v = log(1 - d); both coordinates unconstrained
  // up to the d < 1 - 1e-12 guard.
  numerics::Objective objective = [&](std::span<const double> x) {
    const double c = std::exp(x[0]);
    const double one_minus_d = std::exp(x[1]);
    const double d = 1.0 - one_minus_d;
    if (!(d >= 0.0 && d < 1.0 - 1e-12)) return std::numeric_limits<double>::infinity();
    try {
      return normalized(c, d, opts.refine_tol);
    } catch (const numerics::convergence_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const std::vector<double> x0{std::log(best_c), std::log(1.0 - best_d)};
  const std::vector<double> steps{opts.refine_step, opts.refine_step};
  auto nm = numerics::nelder_mead_minimize(objective, x0, steps, 1e-4, 1e-9,
                                           opts.refine_max_iterations);
  double ref_c = std::exp(nm.argmax[0]);
  double ref_d = 1.0 - std::exp(nm.argmax[1]);
  double refined = std::numeric_limits<double>::infinity();
  try {
    refined = normalized(ref_c, ref_d, opts.final_tol);
  } catch (const numerics::convergence_error&) {
  }
  if (!(refined <= best_val)) {  // keep the grid cell if refinement regressed
    ref_c = best_c;
    ref_d = best_d;
    refined = normalized(best_c, best_d, opts.final_tol);
  }
  if (opts.progress) {
    opts.progress("refined: E/sqrt(alpha) <= " + std::to_string(refined) + " at c=" +
                  std::to_string(ref_c) + ", d=" + std::to_string(ref_d));
  }
  return make_bound_report(refined, alpha,
                           {{"c", ref_c}, {"d", ref_d}, {"delta", ref_c / std::sqrt(alpha)}},
                           evaluations + nm.iterations, nm.converged);
}

// 2 sqrt(log 3 - Li_2(-2)), the single-uncoded-layer upper-bound constant.
inline double theorem2_constant() {
  return 2.0 * std::sqrt(std::log(3.0) - numerics::dilogarithm(-2.0));
}

}  // namespace edt::scheme
