#pragma once

// Shared numeric machinery: adaptive quadrature, the dilogarithm, series
// summation with tail control, numerical gradients, golden-section search,
// Nelder-Mead, and constrained maximization by projected gradient ascent.
//
// Everything here is deterministic: identical inputs give bit-identical
// outputs. There is no hidden randomness anywhere in this header.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace edt::numerics {

// Thrown whenever an iterative scheme cannot meet its tolerance within its
// budget. A partial value is never returned silently.
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature
// ---------------------------------------------------------------------------

struct QuadratureOptions {
  int max_depth = 80;
  std::size_t max_evaluations = 4'000'000;
};

namespace detail {

struct SimpsonState {
  const std::function<double(double)>& f;
  std::size_t evals = 0;
  std::size_t budget = 0;

  double eval(double x) {
    if (++evals > budget) {
      throw convergence_error("integrate_adaptive: evaluation budget exhausted");
    }
    return f(x);
  }
};

inline double simpson_recurse(SimpsonState& st, double a, double b, double fa, double fm,
                              double fb, double whole, double tol, int depth, int max_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.eval(lm);
  const double frm = st.eval(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol) {
    return left + right + err / 15.0;
  }
  if (depth >= max_depth) {
    throw convergence_error("integrate_adaptive: tolerance not reached after max refinement");
  }
  return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
         simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace detail

// Integrates f over [a, b] to absolute tolerance abs_tol. Throws
// convergence_error if the refinement limit is hit first.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double abs_tol, const QuadratureOptions& opts = {}) {
  if (!(abs_tol > 0.0)) {
    throw std::invalid_argument("integrate_adaptive: tolerance must be positive");
  }
  if (a == b) return 0.0;
  detail::SimpsonState st{f, 0, opts.max_evaluations};
  const double fa = st.eval(a);
  const double fm = st.eval(0.5 * (a + b));
  const double fb = st.eval(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_recurse(st, a, b, fa, fm, fb, whole, abs_tol, 0, opts.max_depth);
}

// ---------------------------------------------------------------------------
// Dilogarithm
// ---------------------------------------------------------------------------

// Li2(z) = -Int_0^1 log(1 - z*u)/u du, evaluated by adaptive quadrature to
// 1e-10 absolute. The integrand tends to -z as u -> 0. Arguments z > 1 are
// outside the supported domain (log singularity); z == 1 is the known value
// pi^2/6. Everything needed by the bound formulas lives at z <= 0.
inline double dilogarithm(double z, double abs_tol = 1e-10) {
  if (!(z <= 1.0)) {
    throw std::domain_error("dilogarithm: argument must be <= 1");
  }
  if (z == 0.0) return 0.0;
  if (z == 1.0) return std::numbers::pi * std::numbers::pi / 6.0;
  auto integrand = [z](double u) { return u == 0.0 ? -z : std::log1p(-z * u) / u; };
  return -integrate_adaptive(integrand, 0.0, 1.0, abs_tol);
}

// ---------------------------------------------------------------------------
// Series summation
// ---------------------------------------------------------------------------

struct SeriesResult {
  double value = 0.0;
  std::size_t terms_used = 0;
  double tail_bound = 0.0;  // bound on what the returned value is missing
};

// Sums term(k) for k = first_index, first_index+1, ... until
// tail_bound(k_last, term_k_last) <= relative_tol * |partial sum|.
// tail_bound must bound the absolute value of the series remainder past
// k_last. Throws convergence_error when hard_cap terms were not enough.
template <typename Term, typename TailBound>
SeriesResult sum_series(Term&& term, std::size_t first_index, double relative_tol,
                        std::size_t hard_cap, TailBound&& tail_bound) {
  if (!(relative_tol > 0.0)) {
    throw std::invalid_argument("sum_series: relative_tol must be positive");
  }
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t k = first_index; used < hard_cap; ++k) {
    const double t = term(k);
    if (!std::isfinite(t)) {
      throw std::domain_error("sum_series: non-finite term at k=" + std::to_string(k));
    }
    sum += t;
    ++used;
    const double bound = tail_bound(k, t);
    if (bound <= relative_tol * std::abs(sum)) {
      return {sum, used, bound};
    }
  }
  throw convergence_error("sum_series: tolerance not met within " + std::to_string(hard_cap) +
                          " terms");
}

// Convenience overload for eventually nonnegative, decreasing terms with a
// bounded ratio: the tail is estimated geometrically from the observed ratio
// of consecutive terms. Callers with a real tail bound should supply it.
template <typename Term>
SeriesResult sum_series(Term&& term, std::size_t first_index, double relative_tol,
                        std::size_t hard_cap) {
  double prev = std::numeric_limits<double>::quiet_NaN();
  auto ratio_tail = [&prev](std::size_t, double t) mutable {
    double bound = std::numeric_limits<double>::infinity();
    if (t == 0.0) {
      bound = 0.0;
    } else if (std::isfinite(prev) && prev > 0.0 && t > 0.0 && t < prev) {
      const double r = t / prev;
      bound = t * r / (1.0 - r);
    }
    prev = t;
    return bound;
  };
  return sum_series(std::forward<Term>(term), first_index, relative_tol, hard_cap, ratio_tail);
}

// ---------------------------------------------------------------------------
// Series summation with an integral tail estimate
// ---------------------------------------------------------------------------
//
// For sum_{k=k0}^inf f(k) where f extends to a smooth, eventually positive,
// decreasing, convex function of a real argument: terms are summed directly
// up to some K, and the remainder is taken as the midpoint-rule integral
// Int_{K+1/2}^inf f(x) dx (computed through the substitution x = x0/t, which
// maps the half-line onto (0,1]). For decreasing convex f the midpoint rule
// brackets the discrete tail with error at most (|f'| + f'')/24 around K,
// which is what the reported tail_bound carries (plus the quadrature
// tolerance). K doubles until the bound meets relative_tol, so the direct
// phase stays short even for series that decay like 1/k^2.

struct TailSeriesOptions {
  double relative_tol = 1e-9;
  std::size_t hard_cap = 1'000'000;
  std::size_t min_terms = 64;
  // Optional analytic bound on the remaining tail after index k; when it is
  // already below tolerance the integral estimate is skipped entirely.
  std::function<double(std::size_t)> simple_tail_bound;
};

inline SeriesResult sum_with_tail_estimate(const std::function<double(double)>& term_at,
                                           std::size_t first_index,
                                           const TailSeriesOptions& opts) {
  if (!(opts.relative_tol > 0.0)) {
    throw std::invalid_argument("sum_with_tail_estimate: relative_tol must be positive");
  }
  double sum = 0.0;
  std::size_t used = 0;
  std::size_t next = first_index;
  std::size_t target = std::min(opts.hard_cap, std::max(first_index + 8, opts.min_terms));

  while (true) {
    for (; next <= target; ++next) {
      const double t = term_at(static_cast<double>(next));
      if (!std::isfinite(t)) {
        throw std::domain_error("sum_with_tail_estimate: non-finite term at k=" +
                                std::to_string(next));
      }
      sum += t;
      ++used;
    }
    const std::size_t last = next - 1;

    if (opts.simple_tail_bound) {
      const double b = opts.simple_tail_bound(last);
      if (b >= 0.0 && b <= opts.relative_tol * std::abs(sum)) {
        return {sum, used, b};
      }
    }

    // The integral estimate needs f positive, decreasing and convex at the
    // boundary; probe and double the direct phase until that regime holds.
    const double x1 = static_cast<double>(last);
    const double f0 = term_at(x1 - 1.0);
    const double f1 = term_at(x1);
    const double f2 = term_at(x1 + 1.0);
    const bool regular =
        f0 >= f1 && f1 >= f2 && f2 > 0.0 && (f0 + f2 - 2.0 * f1) >= -1e-12 * f1;
    if (regular) {
      const double x0 = x1 + 0.5;
      auto integrand = [&](double t) {
        const double x = x0 / t;
        return x0 * term_at(x) / (t * t);
      };
      // The substituted integrand extends smoothly to t = 0 but any closed
      // form for the limit would have to know the term's asymptotics, so the
      // quadrature runs on [eps, 1] and the [0, eps] sliver is added as a
      // midpoint sample with its variation folded into the error bound.
      //
      // The tail can dwarf the partial sum (slow geometric decay), so the
      // quadrature tolerance comes from a rough first pass that establishes
      // the tail's own scale.
      const double eps = 1e-10;
      const double rough_tol = std::max(1e-3 * (std::abs(sum) + f1 * x0),
                                        std::numeric_limits<double>::min());
      const double rough = integrate_adaptive(integrand, eps, 1.0, rough_tol);
      const double scale = std::abs(sum) + std::abs(rough);
      const double qtol =
          std::max(opts.relative_tol * 0.01 * scale, std::numeric_limits<double>::min());
      const double body =
          qtol >= rough_tol ? rough : integrate_adaptive(integrand, eps, 1.0, qtol);
      const double sliver = eps * integrand(0.5 * eps);
      const double sliver_err =
          eps * std::abs(integrand(eps) - integrand(1e-3 * eps)) + 2.0 * std::abs(sliver) * eps;
      const double tail = body + sliver;
      const double deriv = 0.5 * std::abs(f2 - f0);
      const double curv = std::abs(f0 + f2 - 2.0 * f1);
      const double bound = 4.0 * (deriv + curv) / 24.0 + qtol + sliver_err;  // safety factor 4
      if (bound <= opts.relative_tol * std::abs(sum + tail)) {
        return {sum + tail, used, bound};
      }
    }

    if (target >= opts.hard_cap) {
      throw convergence_error("sum_with_tail_estimate: tolerance not met within " +
                              std::to_string(opts.hard_cap) + " terms");
    }
    target = std::min(opts.hard_cap, target * 2);
  }
}

// ---------------------------------------------------------------------------
// Numerical gradients
// ---------------------------------------------------------------------------

using Objective = std::function<double(std::span<const double>)>;

// Central differences with relative step rel_step * max(1, |x_i|).
inline std::vector<double> central_gradient(const Objective& f, std::span<const double> x,
                                            double rel_step = 1e-6) {
  std::vector<double> grad(x.size(), 0.0);
  std::vector<double> p(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    const double xi = p[i];
    p[i] = xi + h;
    const double fp = f(p);
    p[i] = xi - h;
    const double fm = f(p);
    p[i] = xi;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Golden-section search
// ---------------------------------------------------------------------------

struct ScalarSearchResult {
  double argmax = 0.0;
  double value = 0.0;
  std::size_t iterations = 0;
};

// Maximizes a unimodal f on [lo, hi] to an argument tolerance x_tol.
inline ScalarSearchResult golden_section_maximize(const std::function<double(double)>& f,
                                                  double lo, double hi, double x_tol = 1e-10,
                                                  std::size_t max_iterations = 400) {
  if (!(lo < hi)) throw std::invalid_argument("golden_section_maximize: need lo < hi");
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  std::size_t it = 0;
  while (b - a > x_tol && it < max_iterations) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
    ++it;
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm), it};
}

// ---------------------------------------------------------------------------
// Constrained maximization
// ---------------------------------------------------------------------------

// Ordering constraint: x[below] + margin <= x[above].
struct Ordering {
  std::size_t below = 0;
  std::size_t above = 0;
};

struct OptimOptions {
  double grad_rel_step = 1e-6;
  double armijo = 1e-4;
  double grad_tol = 1e-8;
  std::size_t max_iterations = 10'000;
  double margin = 1e-9;
  bool polish = true;  // Nelder-Mead refinement after the gradient phase
  double polish_diameter_tol = 1e-10;
  // Zero: the polish stops on simplex diameter alone, leaving a point
  // stationary enough that re-optimizing from it exits on the gradient test.
  double polish_value_tol = 0.0;
  std::size_t polish_max_iterations = 4000;
  double polish_step = 0.05;
  bool record_trace = false;
};

struct OptimResult {
  std::vector<double> argmax;
  double value = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::pair<std::vector<double>, double>> trace;
};

namespace detail {

inline void project_inplace(std::vector<double>& x, std::span<const double> lb,
                            std::span<const Ordering> ord, double margin) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::max(x[i], lb[i]);
  // Orderings may chain; iterate to a fixpoint (at most n passes for chains).
  for (std::size_t pass = 0; pass <= ord.size(); ++pass) {
    bool moved = false;
    for (const auto& o : ord) {
      const double need = x[o.below] + margin;
      if (x[o.above] < need) {
        x[o.above] = need;
        moved = true;
      }
    }
    if (!moved) break;
  }
}

inline bool feasible(std::span<const double> x, std::span<const double> lb,
                     std::span<const Ordering> ord) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lb[i])) return false;
  }
  for (const auto& o : ord) {
    if (!(x[o.below] <= x[o.above])) return false;
  }
  return true;
}

// Nelder-Mead on a minimization objective; fixed simplex construction, no
// randomness. Non-finite values are treated as +infinity.
struct NelderMeadResult {
  std::vector<double> best;
  double value = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

inline NelderMeadResult nelder_mead_minimize(const Objective& f, std::span<const double> x0,
                                             std::span<const double> steps, double diameter_tol,
                                             double value_tol, std::size_t max_iterations) {
  const std::size_t n = x0.size();
  auto safe = [&f](std::span<const double> p) {
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> v(n + 1, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < n; ++i) v[i + 1][i] += steps[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = safe(v[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> v2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      v2[i] = v[idx[i]];
      f2[i] = fv[idx[i]];
    }
    v.swap(v2);
    fv.swap(f2);
  };

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  std::size_t it = 0;
  bool converged = false;
  std::vector<double> centroid(n), cand(n);
  for (; it < max_iterations; ++it) {
    order();
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        diameter = std::max(diameter, std::abs(v[i][j] - v[0][j]));
      }
    }
    const double scale = std::max(1.0, std::abs(fv[0]));
    if (diameter <= diameter_tol || (std::isfinite(fv[n]) && fv[n] - fv[0] <= value_tol * scale)) {
      converged = true;
      break;
    }

    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += v[i][j];
      centroid[j] = s / static_cast<double>(n);
    }
    auto blend = [&](double coeff, const std::vector<double>& far) {
      for (std::size_t j = 0; j < n; ++j) cand[j] = centroid[j] + coeff * (far[j] - centroid[j]);
    };

    blend(-kReflect, v[n]);
    const double fr = safe(cand);
    if (fr < fv[0]) {
      std::vector<double> xr = cand;
      blend(-kExpand, v[n]);
      const double fe = safe(cand);
      if (fe < fr) {
        v[n] = cand;
        fv[n] = fe;
      } else {
        v[n] = std::move(xr);
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      v[n] = cand;
      fv[n] = fr;
    } else {
      const bool outside = fr < fv[n];
      if (outside) {
        std::vector<double> xr = cand;
        for (std::size_t j = 0; j < n; ++j) cand[j] = centroid[j] + kContract * (xr[j] - centroid[j]);
      } else {
        blend(kContract, v[n]);
      }
      const double fc = safe(cand);
      if (fc < (outside ? fr : fv[n])) {
        v[n] = cand;
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) v[i][j] = v[0][j] + kShrink * (v[i][j] - v[0][j]);
          fv[i] = safe(v[i]);
        }
      }
    }
  }
  order();
  return {v[0], fv[0], it, converged};
}

}  // namespace detail

// Public wrapper around the deterministic Nelder-Mead minimizer.
inline OptimResult nelder_mead_minimize(const Objective& f, std::span<const double> initial,
                                        std::span<const double> steps, double diameter_tol = 1e-10,
                                        double value_tol = 1e-13,
                                        std::size_t max_iterations = 4000) {
  if (initial.size() != steps.size() || initial.empty()) {
    throw std::invalid_argument("nelder_mead_minimize: dimension mismatch");
  }
  auto r = detail::nelder_mead_minimize(f, initial, steps, diameter_tol, value_tol, max_iterations);
  OptimResult out;
  out.argmax = std::move(r.best);
  out.value = r.value;
  out.iterations = r.iterations;
  out.converged = r.converged;
  return out;
}

// Maximizes f subject to x[i] >= lower_bounds[i] and the given ordering
// constraints, by projected gradient ascent (central differences, Armijo
// backtracking) followed by a Nelder-Mead refinement of the projected
// objective. The result is feasible, never worse than the starting point,
// and deterministic.
inline OptimResult maximize_projected(const Objective& f, std::vector<double> initial,
                                      std::vector<double> lower_bounds,
                                      std::vector<Ordering> orderings,
                                      const OptimOptions& opts = {}) {
  const std::size_t n = initial.size();
  if (n == 0 || lower_bounds.size() != n) {
    throw std::invalid_argument("maximize_projected: dimension mismatch");
  }
  for (const auto& o : orderings) {
    if (o.below >= n || o.above >= n || o.below == o.above) {
      throw std::invalid_argument("maximize_projected: bad ordering constraint");
    }
  }
  if (!detail::feasible(initial, lower_bounds, orderings)) {
    throw std::invalid_argument("maximize_projected: infeasible initial point");
  }

  auto project = [&](std::vector<double> p) {
    detail::project_inplace(p, lower_bounds, orderings, opts.margin);
    return p;
  };

  std::vector<double> x = project(std::move(initial));
  double fx = f(x);
  if (!std::isfinite(fx)) {
    throw std::invalid_argument("maximize_projected: objective not finite at initial point");
  }

  OptimResult out;
  if (opts.record_trace) out.trace.emplace_back(x, fx);

  // Gradient with one-sided fallback at constraint boundaries.
  auto gradient = [&](const std::vector<double>& p, double fp) {
    std::vector<double> g(n, 0.0);
    std::vector<double> q = p;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = opts.grad_rel_step * std::max(1.0, std::abs(p[i]));
      const double pi = p[i];
      q[i] = pi + h;
      const bool plus_ok = detail::feasible(q, lower_bounds, orderings);
      const double fplus = plus_ok ? f(q) : std::numeric_limits<double>::quiet_NaN();
      q[i] = pi - h;
      const bool minus_ok = detail::feasible(q, lower_bounds, orderings);
      const double fminus = minus_ok ? f(q) : std::numeric_limits<double>::quiet_NaN();
      q[i] = pi;
      if (std::isfinite(fplus) && std::isfinite(fminus)) {
        g[i] = (fplus - fminus) / (2.0 * h);
      } else if (std::isfinite(fplus)) {
        g[i] = (fplus - fp) / h;
      } else if (std::isfinite(fminus)) {
        g[i] = (fp - fminus) / h;
      }
    }
    return g;
  };

  auto projected_norm = [&](const std::vector<double>& p, std::vector<double> g) {
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i] <= lower_bounds[i] + opts.margin && g[i] < 0.0) g[i] = 0.0;
    }
    for (const auto& o : orderings) {
      if (p[o.above] - p[o.below] <= opts.margin * (1.0 + 1e-6) && g[o.below] > g[o.above]) {
        const double mean = 0.5 * (g[o.below] + g[o.above]);
        g[o.below] = mean;
        g[o.above] = mean;
      }
    }
    double s = 0.0;
    for (double gi : g) s += gi * gi;
    return std::sqrt(s);
  };

  std::size_t iterations = 0;
  bool grad_converged = false;
  std::size_t grad_converged_at = 0;
  std::size_t stalled_steps = 0;
  std::vector<double> xn(n);
  while (iterations < opts.max_iterations) {
    ++iterations;
    const auto g = gradient(x, fx);
    if (projected_norm(x, g) < opts.grad_tol) {
      grad_converged = true;
      grad_converged_at = iterations;
      break;
    }
    bool accepted = false;
    const double f_before = fx;
    for (double t = 1.0; t >= 1e-18; t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + t * g[i];
      detail::project_inplace(xn, lower_bounds, orderings, opts.margin);
      double advance = 0.0;
      for (std::size_t i = 0; i < n; ++i) advance += g[i] * (xn[i] - x[i]);
      if (advance == 0.0 && xn == x) continue;
      const double fn = f(xn);
      if (std::isfinite(fn) && fn > fx && fn >= fx + opts.armijo * std::max(advance, 0.0)) {
        x = xn;
        fx = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no ascent step left; refinement takes over
    // Hand over to the refinement once steps stop moving the value.
    if (fx - f_before <= 1e-12 * (1.0 + std::abs(fx))) {
      if (++stalled_steps >= 3) break;
    } else {
      stalled_steps = 0;
    }
    if (opts.record_trace) out.trace.emplace_back(x, fx);
  }

  bool nm_converged = false;
  const bool immediate_fixed_point = grad_converged && grad_converged_at <= 3;
  if (opts.polish && !immediate_fixed_point) {
    Objective projected_f = [&](std::span<const double> p) {
      std::vector<double> q(p.begin(), p.end());
      detail::project_inplace(q, lower_bounds, orderings, opts.margin);
      return f(q);
    };
    Objective neg = [&](std::span<const double> p) { return -projected_f(p); };
    std::vector<double> steps(n);
    for (std::size_t i = 0; i < n; ++i) steps[i] = opts.polish_step * std::max(1.0, std::abs(x[i]));
    auto nm = detail::nelder_mead_minimize(neg, x, steps, opts.polish_diameter_tol,
                                           opts.polish_value_tol, opts.polish_max_iterations);
    iterations += nm.iterations;
    nm_converged = nm.converged;
    std::vector<double> cand = project(std::move(nm.best));
    const double fc = f(cand);
    if (std::isfinite(fc) && fc >= fx) {
      x = std::move(cand);
      fx = fc;
    }
  }

  out.argmax = x;
  out.value = fx;
  out.iterations = iterations;
  out.converged = grad_converged || nm_converged;
  if (opts.record_trace) out.trace.emplace_back(x, fx);
  return out;
}

}  // namespace edt::numerics
