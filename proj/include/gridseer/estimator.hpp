#pragma once

// Weighted-least-squares DC state estimation, residual-based bad data
// detection, and structured (undetectable) injection attacks.

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include "gridseer/core.hpp"
#include "gridseer/grid_model.hpp"
#include "gridseer/linalg.hpp"

namespace gridseer {

// Length-m, aligned with JacobianMatrix::rows.
using MeasurementVector = Eigen::VectorXd;
// Length-n phase angles in radians, aligned with JacobianMatrix::columns.
using StateVector = Eigen::VectorXd;

struct EstimatorConfig {
  // Diagonal of W. Empty means identity.
  Eigen::VectorXd weights;
  double noise_sigma = 0.01;
  // Report sqrt(r' W r) instead of the raw l2 norm of r.
  bool weighted_residual = false;
};

struct BddConfig {
  double tau = 0.0;
};

struct EstimationResult {
  StateVector theta_hat;
  double residual_norm = 0.0;
  bool detected = false;
};

struct AttackVector {
  Eigen::VectorXd a;
  std::vector<MeterIdx> support;  // meters with |a_i| > 1e-12
  std::optional<StateVector> bias;
};

namespace detail {

inline Eigen::VectorXd sqrt_weights(const EstimatorConfig& cfg, Eigen::Index m) {
  if (cfg.weights.size() == 0) return Eigen::VectorXd::Ones(m);
  if (cfg.weights.size() != m) {
    fail(ErrorKind::kInvalidInput, "weight vector length " +
                                       std::to_string(cfg.weights.size()) +
                                       " does not match " + std::to_string(m) +
                                       " measurements");
  }
  if ((cfg.weights.array() <= 0.0).any()) {
    fail(ErrorKind::kInvalidInput, "estimator weights must be positive");
  }
  return cfg.weights.array().sqrt();
}

inline nlohmann::json null_vector_json(const JacobianMatrix& h,
                                       const PowerNetwork& net,
                                       const Eigen::VectorXd& c) {
  nlohmann::json out = nlohmann::json::object();
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    if (std::abs(c(j)) > 1e-9) {
      out[std::to_string(net.bus_id(h.columns[static_cast<std::size_t>(j)]))] = c(j);
    }
  }
  return out;
}

}  // namespace detail

// Throws kUnobservable with a null-vector certificate when rank(H) < n.
inline void require_full_rank(const JacobianMatrix& h, const PowerNetwork& net) {
  if (linalg::rank(h.values) == static_cast<Eigen::Index>(h.col_count())) return;
  Eigen::MatrixXd ns = linalg::null_space(h.values);
  Eigen::VectorXd c = ns.col(0);
  fail(ErrorKind::kUnobservable,
       "unobservable system: rank(H) < " + std::to_string(h.col_count()),
       {{"null_vector", detail::null_vector_json(h, net, c)}});
}

inline EstimationResult wls_estimate(const JacobianMatrix& h,
                                     const MeasurementVector& z,
                                     const EstimatorConfig& cfg,
                                     const PowerNetwork* net = nullptr) {
  const Eigen::Index m = h.values.rows();
  if (z.size() != m) {
    fail(ErrorKind::kInvalidInput, "measurement vector has length " +
                                       std::to_string(z.size()) + ", expected " +
                                       std::to_string(m));
  }
  Eigen::VectorXd sw = detail::sqrt_weights(cfg, m);
  Eigen::MatrixXd a = sw.asDiagonal() * h.values;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(linalg::kRankTolerance);
  if (qr.rank() < h.values.cols()) {
    Eigen::VectorXd c = linalg::null_space(h.values).col(0);
    nlohmann::json cert = net ? detail::null_vector_json(h, *net, c)
                              : nlohmann::json(std::vector<double>(
                                    c.data(), c.data() + c.size()));
    fail(ErrorKind::kUnobservable, "unobservable system: H is rank deficient",
         {{"null_vector", cert}});
  }
  EstimationResult out;
  out.theta_hat = qr.solve(sw.asDiagonal() * z);
  Eigen::VectorXd r = z - h.values * out.theta_hat;
  out.residual_norm =
      cfg.weighted_residual ? (sw.asDiagonal() * r).norm() : r.norm();
  return out;
}

inline bool bdd_check(const EstimationResult& result, const BddConfig& cfg) {
  return result.residual_norm > cfg.tau;
}

inline EstimationResult estimate_and_detect(const JacobianMatrix& h,
                                            const MeasurementVector& z,
                                            const EstimatorConfig& ecfg,
                                            const BddConfig& bcfg) {
  EstimationResult out = wls_estimate(h, z, ecfg);
  out.detected = bdd_check(out, bcfg);
  return out;
}

// Floor applied to tau so noiseless runs are not flagged by round-off.
inline constexpr double kMinTau = 1e-9;

// tau^2 = chi2_quantile(m - n, p) * sigma^2. With no redundancy the residual
// is identically zero and nothing can be detected.
inline double chi_square_tau(std::size_t m, std::size_t n, double sigma,
                             double p = 0.99) {
  if (m <= n) return kInfinity;
  boost::math::chi_squared dist(static_cast<double>(m - n));
  const double q = boost::math::quantile(dist, p);
  return std::max(std::sqrt(q) * sigma, kMinTau);
}

inline AttackVector forge_attack(const JacobianMatrix& h, const StateVector& c) {
  if (c.size() != h.values.cols()) {
    fail(ErrorKind::kInvalidInput, "bias vector has length " +
                                       std::to_string(c.size()) + ", expected " +
                                       std::to_string(h.values.cols()));
  }
  AttackVector out;
  out.a = h.values * c;
  out.bias = c;
  for (Eigen::Index i = 0; i < out.a.size(); ++i) {
    if (std::abs(out.a(i)) > 1e-12) {
      out.support.push_back(h.rows[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

// True iff `a` lies in col(H): the least-squares projection leaves a
// residual no larger than `tol`.
inline bool verify_undetectable(const JacobianMatrix& h, const Eigen::VectorXd& a,
                                double tol = kNumericTolerance) {
  if (a.size() != h.values.rows()) return false;
  if (a.size() == 0 || a.norm() == 0.0) return true;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h.values);
  qr.setThreshold(linalg::kRankTolerance);
  Eigen::VectorXd x = qr.solve(a);
  return (a - h.values * x).norm() <= tol;
}

inline bool verify_undetectable(const JacobianMatrix& h, const AttackVector& a,
                                double tol = kNumericTolerance) {
  return verify_undetectable(h, a.a, tol);
}

// z = H theta + e with e ~ N(0, sigma^2) i.i.d.
inline MeasurementVector simulate_measurements(const JacobianMatrix& h,
                                               const StateVector& theta,
                                               double sigma, std::mt19937_64& rng) {
  MeasurementVector z = h.values * theta;
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += noise(rng);
  }
  return z;
}

inline StateVector random_state(std::size_t n, double half_width,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  StateVector theta(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = u(rng);
  return theta;
}

inline nlohmann::json to_json(const EstimationResult& r, const MeasurementVector& z) {
  return {{"z", std::vector<double>(z.data(), z.data() + z.size())},
          {"theta_hat", std::vector<double>(r.theta_hat.data(),
                                            r.theta_hat.data() + r.theta_hat.size())},
          {"residual_norm", r.residual_norm},
          {"detected", r.detected}};
}

}  // namespace gridseer
