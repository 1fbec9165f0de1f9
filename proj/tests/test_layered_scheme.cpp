#include <catch2/catch_amalgamated.hpp>

#include "edt/layered_scheme.hpp"

#include <cmath>
#include <random>
#include <vector>

using Catch::Approx;
namespace sch = edt::scheme;

namespace {

// Random feasible non-geometric ladders: A_0 pinned to alpha*Q_1, every
// further energy drawn strictly inside its cap so beta stays increasing.
sch::LadderSchedule random_feasible_ladder(std::mt19937& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double alpha = 0.5 + 3.5 * u01(rng);
  const std::size_t layers = 2 + static_cast<std::size_t>(u01(rng) * 7);
  std::vector<double> quality(layers);
  double q = 0.1 + 0.9 * u01(rng);
  for (std::size_t i = 0; i < layers; ++i) {
    quality[i] = q;
    q += 0.1 + 0.9 * u01(rng);
  }
  std::vector<double> energy(layers);
  energy[0] = alpha * quality[0];
  double total = energy[0];
  for (std::size_t k = 1; k < layers; ++k) {
    const double qn = quality[k];
    const double qc = quality[k - 1];
    const double cap = (alpha * (qn * qn - qc * qc) - total * (qn - qc)) / qn;
    energy[k] = cap * (0.05 + 0.9 * u01(rng));
    total += energy[k];
  }
  return sch::ladder_from_energies(alpha, std::move(quality), std::move(energy));
}

}  // namespace

TEST_CASE("geometric schedule: jump identities and closed-form betas") {
  const sch::GeometricParams p{.alpha = 1.0, .c = 1.0, .d = 0.5, .layers = 8};
  const auto s = sch::geometric_schedule(p);
  CHECK(s.beta[0] == 1.0);
  CHECK(s.beta[1] == Approx(2.0).epsilon(1e-12));
  CHECK(s.analog_energy[0] == s.alpha * s.quality[0]);  // A_0 = alpha * Q_1 bit-exact
  CHECK(s.quality[0] == 1.0);
  CHECK(s.analog_energy[1] == Approx(0.5).epsilon(1e-15));

  // Closed form beta_{k-1} = 1 + alpha k^2 d^2 ... (geometric-sum form) matches
  // the jump-derived construction across parameter ranges.
  for (double c : {0.01, 0.3, 1.0, 0.00137}) {
    for (double d : {0.1, 0.5, 0.9, 0.999}) {
      const sch::GeometricParams gp{.alpha = 2.5, .c = c, .d = d, .layers = 512};
      const auto lad = sch::geometric_schedule(gp);
      const double delta = gp.delta();
      for (std::size_t k = 1; k <= lad.layers(); k += 37) {
        const double kk = static_cast<double>(k);
        const double closed = 1.0 + gp.alpha * kk * kk * delta * delta -
                              kk * gp.alpha * delta * delta * sch::geometric_sum(d, kk);
        CHECK(lad.beta[k - 1] == Approx(closed).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("geometric schedule: jump condition residual stays at rounding level") {
  const sch::GeometricParams p{.alpha = 1.0, .c = 0.00137, .d = 0.999, .layers = 10'000};
  const auto s = sch::geometric_schedule(p);
  for (std::size_t j = 1; j <= s.layers(); ++j) {
    const double q = s.quality[j - 1];
    const double profile = 1.0 + s.alpha * q * q;
    const double resid = s.analog_energy_total[j - 1] * q + s.beta[j - 1] - profile;
    REQUIRE(std::abs(resid) <= 1e-12 * profile);
  }
}

TEST_CASE("geometric schedule with d = 0 is the single-uncoded-layer scheme") {
  const sch::GeometricParams p{.alpha = 2.0, .c = 0.7, .d = 0.0, .layers = 64};
  const auto s = sch::geometric_schedule(p);
  const double delta = p.delta();
  for (std::size_t k = 1; k <= s.layers(); k += 7) {
    const double kk = static_cast<double>(k);
    const double closed = 1.0 + p.alpha * kk * kk * delta * delta - kk * p.alpha * delta * delta;
    CHECK(s.beta[k - 1] == Approx(closed).epsilon(1e-12));
  }
  // The staircase slope is constant: A_{k,total} = A_0 for every k >= 1.
  for (std::size_t i = 1; i < s.layers(); ++i) {
    CHECK(s.analog_energy[i] == 0.0);
    CHECK(s.analog_energy_total[i] == s.analog_energy_total[0]);
  }
  CHECK(sch::check_feasibility(s).empty());
}

TEST_CASE("geometric parameter validation") {
  CHECK_THROWS_AS(sch::geometric_schedule({.alpha = 0.0, .c = 1.0, .d = 0.5, .layers = 4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sch::geometric_schedule({.alpha = 1.0, .c = 0.0, .d = 0.5, .layers = 4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sch::geometric_schedule({.alpha = 1.0, .c = 1.0, .d = 1.0, .layers = 4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sch::geometric_schedule({.alpha = 1.0, .c = 1.0, .d = -0.1, .layers = 4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sch::geometric_schedule({.alpha = 1.0, .c = 1.0, .d = 0.5, .layers = 0}),
                  std::invalid_argument);
}

TEST_CASE("feasibility: geometric family passes, inflated energies fail") {
  for (double c : {0.01, 0.1, 1.0}) {
    for (double d : {0.0, 0.3, 0.5, 0.9, 0.999}) {
      const auto s = sch::geometric_schedule({.alpha = 1.0, .c = c, .d = d, .layers = 256});
      CHECK(sch::check_feasibility(s).empty());
    }
  }

  const sch::GeometricParams p{.alpha = 1.0, .c = 1.0, .d = 0.5, .layers = 6};
  const auto base = sch::geometric_schedule(p);
  auto energies = base.analog_energy;
  energies[1] *= 10.0;
  const auto broken = sch::ladder_from_energies(base.alpha, base.quality, energies);
  const auto violations = sch::check_feasibility(broken);
  REQUIRE_FALSE(violations.empty());
  bool cap_at_1 = false;
  for (const auto& v : violations) {
    if (v.what == "analog_energy_cap" && v.index == 1) {
      cap_at_1 = true;
      CHECK(v.slack < 0.0);
    }
  }
  CHECK(cap_at_1);
}

TEST_CASE("lemma-2 inequality") {
  SECTION("k = 1 reduces to d < 1") {
    for (double d : {0.001, 0.5, 0.9999}) {
      const auto r = sch::lemma2_inequality(d, 1);
      CHECK(r.holds);
      CHECK(r.lhs == Approx(d).epsilon(1e-15));
      CHECK(r.rhs == Approx(1.0).epsilon(1e-12));
    }
  }
  SECTION("hand-checked point d = 0.5, k = 3") {
    const auto r = sch::lemma2_inequality(0.5, 3);
    CHECK(r.holds);
    CHECK(r.lhs == Approx(0.125).epsilon(1e-15));
    CHECK(r.rhs == Approx(1.3125).epsilon(1e-14));
  }
  SECTION("extreme d and k evaluated stably") {
    const auto r = sch::lemma2_inequality(0.999, 10'000);
    CHECK(r.holds);
    CHECK(r.lhs == Approx(std::exp(10'000.0 * std::log(0.999))).epsilon(1e-12));
  }
  SECTION("domain") {
    CHECK_THROWS_AS(sch::lemma2_inequality(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(sch::lemma2_inequality(1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(sch::lemma2_inequality(0.5, 0), std::invalid_argument);
  }
}

TEST_CASE("staircase fidelity: segment evaluation and errors") {
  const auto s = sch::geometric_schedule({.alpha = 1.0, .c = 1.0, .d = 0.5, .layers = 4});
  CHECK(sch::staircase_fidelity(s, 0.0) == 1.0);
  CHECK(sch::staircase_fidelity(s, 0.5) == Approx(1.5).epsilon(1e-15));
  // Right-continuity at a jump: Q_1 belongs to segment 1.
  CHECK(sch::staircase_fidelity(s, 1.0) == Approx(s.beta[1] + 1.0 * s.analog_energy_total[1]));
  CHECK_THROWS_AS(sch::staircase_fidelity(s, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(sch::staircase_fidelity(s, 4.0), std::domain_error);
  CHECK_THROWS_AS(sch::staircase_fidelity(s, 17.0), std::domain_error);
}

TEST_CASE("staircase meets the profile at jump-point left limits") {
  const auto s = sch::geometric_schedule({.alpha = 3.0, .c = 0.4, .d = 0.7, .layers = 32});
  for (std::size_t j = 1; j <= s.layers(); ++j) {
    const double q = s.quality[j - 1];
    const double profile = 1.0 + s.alpha * q * q;
    CHECK(sch::staircase_left_limit(s, j) == Approx(profile).epsilon(1e-12));
    if (j <= s.layers() - 1) {
      // Approaching from inside the segment.
      const double just_below = q * (1.0 - 1e-12);
      CHECK(sch::staircase_fidelity(s, just_below) == Approx(profile).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(sch::staircase_left_limit(s, 0), std::out_of_range);
  CHECK_THROWS_AS(sch::staircase_left_limit(s, 33), std::out_of_range);
}

TEST_CASE("staircase dominates the profile everywhere on random feasible ladders") {
  std::mt19937 rng(7771);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto s = random_feasible_ladder(rng);
    REQUIRE(sch::check_feasibility(s).empty());
    for (std::size_t seg = 0; seg < s.layers(); ++seg) {
      const double lo = seg == 0 ? 0.0 : s.quality[seg - 1];
      const double hi = s.quality[seg];
      for (int i = 0; i < 100; ++i) {
        const double q = lo + (hi - lo) * (i + u01(rng)) / 101.0;
        const double slack = sch::staircase_fidelity(s, q) - (1.0 + s.alpha * q * q);
        REQUIRE(slack >= -1e-12);
      }
    }
  }
}

TEST_CASE("digital rates and energies on the worked schedule") {
  const auto s = sch::geometric_schedule({.alpha = 1.0, .c = 1.0, .d = 0.5, .layers = 4});
  CHECK(sch::digital_rate(s, 1) == Approx(0.5 * std::log(1.5)).epsilon(1e-14));
  CHECK(sch::digital_rate(s, 1) == Approx(0.2027325541).margin(1e-10));
  CHECK(sch::digital_energy(s, 1) == Approx(std::log(1.5)).epsilon(1e-14));
  CHECK(sch::digital_energy(s, 1) == Approx(0.4054651081).margin(1e-10));
  CHECK_THROWS_AS(sch::digital_rate(s, 0), std::out_of_range);
  CHECK_THROWS_AS(sch::digital_rate(s, 4), std::out_of_range);
}

TEST_CASE("degenerate layer with equal betas carries zero rate") {
  // quality (1,2) with A = (1,1) gives beta_1 = 1 + 4 - 2*2 = 1 = beta_0.
  const auto s = sch::ladder_from_energies(1.0, {1.0, 2.0}, {1.0, 1.0});
  CHECK(s.beta[1] == 1.0);
  CHECK(sch::digital_rate(s, 1) == 0.0);
  CHECK(sch::digital_energy(s, 1) == 0.0);
}

TEST_CASE("rate positivity and capacity identity on random feasible ladders") {
  std::mt19937 rng(424242);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_feasible_ladder(rng);
    for (std::size_t k = 1; k < s.layers(); ++k) {
      const double rate = sch::digital_rate(s, k);
      const double energy = sch::digital_energy(s, k);
      REQUIRE(rate > 0.0);
      // B_k Q_k / 2 meets the rate with equality.
      REQUIRE(std::abs(energy * s.quality[k - 1] / 2.0 - rate) <= 1e-14 * (1.0 + rate));
      // Jump-condition rewrite of the denominator.
      const double q = s.quality[k - 1];
      const double alt = std::log1p((s.beta[k] - s.beta[k - 1]) / (1.0 + s.alpha * q * q)) / q;
      REQUIRE(energy == Approx(alt).epsilon(1e-11));
    }
  }
}

TEST_CASE("total energy at the reported optimum and elsewhere") {
  const sch::GeometricParams star{.alpha = 1.0, .c = 0.00137, .d = 0.999, .layers = 1};
  const auto e = sch::total_energy(star);
  CHECK(e.total == Approx(2.3204338489).margin(2e-6));
  CHECK(e.total == Approx(2.3203).margin(0.01));
  CHECK(e.uncoded == Approx(0.9211101099).margin(2e-6));
  CHECK(e.digital == Approx(1.3993237390).margin(2e-6));
  CHECK(e.total == e.uncoded + e.digital);
  CHECK(e.tail_bound <= 1e-9 * e.total);
  CHECK(e.terms_used > 1000);

  const auto mid = sch::total_energy({.alpha = 1.0, .c = 1.0, .d = 0.5, .layers = 1});
  CHECK(mid.total == Approx(2.5362153566).margin(1e-6));
  const auto other = sch::total_energy({.alpha = 1.0, .c = 0.1, .d = 0.9, .layers = 1});
  CHECK(other.total == Approx(2.3907995605).margin(1e-6));
}

TEST_CASE("total energy first term and d = 0 reduction") {
  const auto e = sch::total_energy({.alpha = 4.0, .c = 0.25, .d = 0.0, .layers = 1});
  // Single uncoded layer: E_unc = A_0 / beta_0 = alpha * Delta = c sqrt(alpha).
  CHECK(e.uncoded == Approx(0.25 * 2.0).epsilon(1e-15));
  CHECK(e.digital > 0.0);
}

TEST_CASE("total energy scale law in alpha is exact") {
  const auto base = sch::total_energy({.alpha = 1.0, .c = 0.02, .d = 0.97, .layers = 1});
  for (double alpha : {0.5, 2.0, 10.0, 100.0, 1e4}) {
    const auto e = sch::total_energy({.alpha = alpha, .c = 0.02, .d = 0.97, .layers = 1});
    CHECK(e.total == Approx(base.total * std::sqrt(alpha)).epsilon(1e-12));
  }
}

TEST_CASE("total energy surfaces non-convergence") {
  sch::EnergyOptions opts;
  opts.relative_tol = 1e-12;
  opts.hard_cap = 32;
  CHECK_THROWS_AS(
      sch::total_energy({.alpha = 1.0, .c = 0.001, .d = 0.9, .layers = 1}, opts),
      edt::numerics::convergence_error);
}

TEST_CASE("partial ladder sums agree with the energy series") {
  // First uncoded terms of the series are exactly A_k / beta_k of the ladder.
  const sch::GeometricParams p{.alpha = 1.0, .c = 1.0, .d = 0.5, .layers = 12};
  const auto s = sch::geometric_schedule(p);
  double partial = 0.0;
  for (std::size_t k = 0; k < 11; ++k) partial += s.analog_energy[k] / s.beta[k];
  double series_partial = 0.0;
  for (std::size_t k = 0; k < 11; ++k) {
    series_partial += sch::detail::unc_term(p.c, p.d, static_cast<double>(k));
  }
  CHECK(partial == Approx(series_partial).epsilon(1e-12));
}

TEST_CASE("theorem-2 constant via the dilogarithm") {
  const double v = sch::theorem2_constant();
  CHECK(v == Approx(3.1845619200).margin(1e-6));
  CHECK(v == Approx(3.1846).margin(5e-4));
  CHECK(std::log(3.0) == Approx(1.0986122887).margin(1e-9));
  // Without the dilogarithm contribution the constant would collapse to
  // 2 sqrt(log 3); the gap is the -Li2(-2) term.
  CHECK(2.0 * std::sqrt(std::log(3.0)) == Approx(2.0962941479).margin(1e-9));
  CHECK(v > 2.0 * std::sqrt(std::log(3.0)));
}

TEST_CASE("upper-bound optimization beats the reported constant region") {
  const auto r = sch::optimize_upper_bound(1.0);
  CHECK(r.normalized_constant <= 2.3210);
  CHECK(r.normalized_constant > 2.0);
  const double c_star = r.params.at(0).second;
  const double d_star = r.params.at(1).second;
  CHECK(c_star > 0.0);
  CHECK(d_star > 0.0);
  CHECK(d_star < 1.0);

  // Restricting d to 0.9 is a strictly smaller feasible set.
  double best_d09 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 21; ++i) {
    const double c = 1e-5 * std::pow(1e5, i / 20.0);
    best_d09 = std::min(best_d09,
                        sch::total_energy({.alpha = 1.0, .c = c, .d = 0.9, .layers = 1}).total);
  }
  CHECK(best_d09 > r.normalized_constant);
}
