#pragma once

// Linear-algebraic core of the layered scheme, validated two ways: rank-one
// closed forms on one side and dense matrix algebra on the other. Covers the
// observation matrix of one decoding epoch, the covariance pair (Sigma_Y,
// Sigma_Y|S-hat), the determinant-form binning rate, linear-MMSE (Wiener)
// coefficients through the Sherman-Morrison identity, the closed-form
// distortion 1/(beta_k + Q A_{k+1,total}), and a seeded Monte Carlo
// estimator of the same distortion.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "edt/layered_scheme.hpp"

namespace edt::mmse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Observation matrix of epoch k: a k x (k+1) block [a | I_k] whose first
// column holds sqrt(A_0)..sqrt(A_{k-1}). It satisfies A A^T = a a^T + I.
inline Matrix observation_matrix(std::size_t k, std::span<const double> analog_energy) {
  if (k == 0) throw std::invalid_argument("observation_matrix: need k >= 1");
  if (analog_energy.size() < k) {
    throw std::invalid_argument("observation_matrix: need at least k analog energies");
  }
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k + 1));
  for (std::size_t i = 0; i < k; ++i) {
    if (!(analog_energy[i] >= 0.0)) {
      throw std::invalid_argument("observation_matrix: analog energies must be nonnegative");
    }
    m(static_cast<Eigen::Index>(i), 0) = std::sqrt(analog_energy[i]);
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 1.0;
  }
  return m;
}

struct CovariancePair {
  Matrix sigma_y;            // N I + var_prev * a a^T
  Matrix sigma_y_given_est;  // N I + var_cur  * a a^T
};

// Builds both covariance matrices twice: (i) as the rank-one closed form and
// (ii) as A_k Sigma_Z A_k^T with the diagonal Sigma_Z = N I + (var - N) G,
// and insists the two constructions agree elementwise.
inline CovariancePair covariance_pair(std::span<const double> analog_energy, double var_prev,
                                      double var_cur, double noise_var) {
  const std::size_t k = analog_energy.size();
  if (k == 0) throw std::invalid_argument("covariance_pair: need at least one analog layer");
  if (!(var_prev > var_cur && var_cur > 0.0)) {
    throw std::invalid_argument("covariance_pair: need var_prev > var_cur > 0");
  }
  if (!(noise_var > 0.0)) throw std::invalid_argument("covariance_pair: need noise_var > 0");

  const Matrix obs = observation_matrix(k, analog_energy);
  const Vector a = obs.col(0);
  const auto eye = Matrix::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));

  auto closed_form = [&](double var) -> Matrix { return noise_var * eye + var * a * a.transpose(); };
  auto product_form = [&](double var) -> Matrix {
    Vector diag = Vector::Constant(static_cast<Eigen::Index>(k + 1), noise_var);
    diag(0) = var;  // Sigma_Z = N I + (var - N) G with G = e_0 e_0^T
    return obs * diag.asDiagonal() * obs.transpose();
  };

  CovariancePair pair{closed_form(var_prev), closed_form(var_cur)};
  const Matrix check_prev = product_form(var_prev);
  const Matrix check_cur = product_form(var_cur);
  const double scale = std::max({1.0, pair.sigma_y.cwiseAbs().maxCoeff(),
                                 pair.sigma_y_given_est.cwiseAbs().maxCoeff()});
  if ((pair.sigma_y - check_prev).cwiseAbs().maxCoeff() > 1e-12 * scale ||
      (pair.sigma_y_given_est - check_cur).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::logic_error("covariance_pair: construction routes disagree beyond 1e-12");
  }
  return pair;
}

// Determinant-form binning rate
//   R = 1/2 log(var_prev/var_cur) - 1/2 log(det Sigma_Y / det Sigma_Y|S-hat),
// computed from explicit determinants (the closed form is checked against
// this in the test suite).
inline double rate_via_determinants(const CovariancePair& pair, double var_prev, double var_cur) {
  if (!(var_prev > 0.0 && var_cur > 0.0)) {
    throw std::invalid_argument("rate_via_determinants: variances must be positive");
  }
  const double det_y = pair.sigma_y.determinant();
  const double det_ys = pair.sigma_y_given_est.determinant();
  if (!(det_y > 0.0 && det_ys > 0.0)) {
    throw std::domain_error("rate_via_determinants: covariance matrices must be positive definite");
  }
  return 0.5 * std::log(var_prev / var_cur) - 0.5 * std::log(det_y / det_ys);
}

// Effective side information of one decoding epoch: k+1 received analog
// signals y_i = gains[i] * S + W_i with S ~ N(0, layer_var) and independent
// W_i ~ N(0, noise_var). gains[i] = sqrt(A_i), so |gains|^2 = A_{k+1,total}.
struct SideInfoModel {
  Vector gains;
  double noise_var = 1.0;
  double layer_var = 1.0;

  std::size_t decoded_layers() const { return static_cast<std::size_t>(gains.size()) - 1; }
};

inline void validate(const SideInfoModel& m) {
  if (m.gains.size() == 0) throw std::invalid_argument("SideInfoModel: need at least one gain");
  for (Eigen::Index i = 0; i < m.gains.size(); ++i) {
    if (!(m.gains(i) >= 0.0)) throw std::invalid_argument("SideInfoModel: gains must be >= 0");
  }
  if (!(m.noise_var > 0.0)) throw std::invalid_argument("SideInfoModel: noise_var must be > 0");
  if (!(m.layer_var > 0.0 && m.layer_var <= 1.0)) {
    throw std::invalid_argument("SideInfoModel: layer_var must lie in (0, 1]");
  }
}

// Model for estimating the residual S_k at quality Q inside segment k of a
// ladder (Q_k <= Q < Q_{k+1}): variance 1/beta_k, gains sqrt(A_0)..sqrt(A_k).
inline SideInfoModel side_info_model(const scheme::LadderSchedule& s, std::size_t decoded_layers,
                                     double quality) {
  scheme::validate_structure(s);
  if (decoded_layers >= s.layers()) {
    throw std::out_of_range("side_info_model: epoch index must be < number of jumps");
  }
  const double q_lo = decoded_layers == 0 ? 0.0 : s.quality[decoded_layers - 1];
  const double q_hi = s.quality[decoded_layers];
  if (!(quality >= q_lo && quality < q_hi)) {
    throw std::domain_error("side_info_model: quality outside the requested segment");
  }
  if (!(quality > 0.0)) {
    throw std::domain_error("side_info_model: quality must be positive (finite noise)");
  }
  SideInfoModel m;
  m.gains.resize(static_cast<Eigen::Index>(decoded_layers + 1));
  for (std::size_t i = 0; i <= decoded_layers; ++i) {
    m.gains(static_cast<Eigen::Index>(i)) = std::sqrt(s.analog_energy[i]);
  }
  m.noise_var = 1.0 / quality;
  m.layer_var = 1.0 / s.beta[decoded_layers];
  validate(m);
  return m;
}

// Linear-MMSE coefficients lambda = var (N I + var a a^T)^{-1} a. By the
// Sherman-Morrison identity the inverse collapses to
//   (N I + var a a^T)^{-1} = (1/N)(I - var a a^T / (N + var a^T a)),
// giving lambda = var a / (N + var |a|^2).
inline Vector wiener_coefficients(const SideInfoModel& m) {
  validate(m);
  const double energy = m.gains.squaredNorm();
  return (m.layer_var / (m.noise_var + m.layer_var * energy)) * m.gains;
}

// Error variance of the Wiener estimate, var - var^2 a^T (N I + var aa^T)^-1 a
// reduced through the same identity; equals analytic_distortion on the
// matching ladder segment.
inline double estimator_error_variance(const SideInfoModel& m) {
  validate(m);
  const double energy = m.gains.squaredNorm();
  return m.layer_var * m.noise_var / (m.noise_var + m.layer_var * energy);
}

// D = 1/(beta_k + Q * A_{k+1,total}), the reciprocal of the staircase
// fidelity on segment k.
inline double analytic_distortion(double beta_k, double analog_total_next, double quality) {
  if (!(beta_k >= 1.0)) throw std::invalid_argument("analytic_distortion: beta must be >= 1");
  if (!(analog_total_next >= 0.0)) {
    throw std::invalid_argument("analytic_distortion: analog energy must be >= 0");
  }
  if (!(quality >= 0.0)) throw std::invalid_argument("analytic_distortion: quality must be >= 0");
  return 1.0 / (beta_k + quality * analog_total_next);
}

// Deterministic Gaussian sampler: mt19937_64 driving a Box-Muller transform
// on 53-bit uniforms. Fixed across runs for a given seed.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    do {
      u = uniform();
    } while (u <= 0.0);
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double theta = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  double uniform() {
    // 53 uniform bits in [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

struct MonteCarloResult {
  double empirical_distortion = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Draws S ~ N(0, var), W_i ~ N(0, N), forms y_i = gains[i] S + W_i, applies
// the Wiener coefficients and reports the mean squared estimation error with
// its standard error. Bit-for-bit reproducible for a fixed seed.
inline MonteCarloResult monte_carlo_distortion(const SideInfoModel& m, std::size_t samples,
                                               std::uint64_t seed) {
  validate(m);
  if (samples < 1000) {
    throw std::invalid_argument("monte_carlo_distortion: need at least 1000 samples");
  }
  const Vector lambda = wiener_coefficients(m);
  const double sigma = std::sqrt(m.layer_var);
  const double noise_sd = std::sqrt(m.noise_var);
  const Eigen::Index n_obs = m.gains.size();

  GaussianSampler gauss(seed);
  double sum_sq = 0.0;
  double sum_quad = 0.0;
  for (std::size_t t = 0; t < samples; ++t) {
    const double s = sigma * gauss();
    double estimate = 0.0;
    for (Eigen::Index i = 0; i < n_obs; ++i) {
      const double y = m.gains(i) * s + noise_sd * gauss();
      estimate += lambda(i) * y;
    }
    const double err = s - estimate;
    const double sq = err * err;
    sum_sq += sq;
    sum_quad += sq * sq;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum_sq / n;
  const double var_of_sq = std::max(0.0, sum_quad / n - mean * mean);
  return {mean, std::sqrt(var_of_sq / n), samples};
}

}  // namespace edt::mmse
