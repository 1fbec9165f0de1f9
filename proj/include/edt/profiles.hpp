#pragma once

// Distortion-noise / fidelity-quality profiles and the report type carried
// by every bound computation in the library.
//
// Conventions used throughout: fidelity F = 1/D, quality Q = 1/N, natural
// logarithms everywhere, so energies are in noise-variance * nats per source
// symbol. The square-law family F(Q) = 1 + alpha*Q^2 is the workhorse; any
// type exposing fidelity(Q) can stand in where a profile is accepted.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace edt {

template <typename P>
concept FidelityProfile = requires(const P& p, double q) {
  { p.fidelity(q) } -> std::convertible_to<double>;
};

// F(Q) = 1 + alpha*Q^2 for a unit-variance source, so F(0) = 1 and the
// dual distortion profile is D(N) = 1/F(1/N).
class SquareLawProfile {
 public:
  explicit SquareLawProfile(double alpha) : alpha_(alpha) {
    if (!(std::isfinite(alpha) && alpha > 0.0)) {
      throw std::invalid_argument("SquareLawProfile: alpha must be positive and finite");
    }
  }

  double alpha() const noexcept { return alpha_; }

  double fidelity(double quality) const {
    if (!(quality >= 0.0)) {
      throw std::invalid_argument("SquareLawProfile::fidelity: quality must be >= 0");
    }
    return 1.0 + alpha_ * quality * quality;
  }

  double distortion(double noise_var) const {
    if (!(noise_var > 0.0)) {
      throw std::invalid_argument("SquareLawProfile::distortion: noise variance must be > 0");
    }
    return 1.0 / fidelity(1.0 / noise_var);
  }

 private:
  double alpha_;
};

static_assert(FidelityProfile<SquareLawProfile>);

// Outcome of a bound evaluation or optimization. value is the energy per
// source symbol; normalized_constant is the alpha-free constant, and
// value == normalized_constant * sqrt(alpha) by construction.
struct BoundReport {
  double value = 0.0;
  double normalized_constant = 0.0;
  std::vector<std::pair<std::string, double>> params;
  std::size_t iterations = 0;
  bool converged = false;
};

inline BoundReport make_bound_report(double normalized_constant, double alpha,
                                     std::vector<std::pair<std::string, double>> params = {},
                                     std::size_t iterations = 0, bool converged = true) {
  if (!(normalized_constant >= 0.0)) {
    throw std::domain_error("make_bound_report: bound constants are nonnegative");
  }
  BoundReport r;
  r.normalized_constant = normalized_constant;
  r.value = normalized_constant * std::sqrt(alpha);
  r.params = std::move(params);
  r.iterations = iterations;
  r.converged = converged;
  return r;
}

}  // namespace edt
