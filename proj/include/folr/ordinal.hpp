#pragma once

// Cumulative-link ordinal model with the standard logistic link:
//
//   P(Y <= j | g) = F(tau_j - g),   F(u) = 1 / (1 + exp(-u)),
//
// equivalently Y = j iff tau_{j-1} < g + eps <= tau_j with eps ~ Logistic(0,1),
// tau_0 = -inf and tau_K = +inf. Classes are 1-based: {1, ..., K}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "folr/error.hpp"

namespace folr {

/// Standard logistic CDF, evaluated without overflow for any finite u.
inline double logistic_cdf(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

/// Logistic density f(u) = F(u)(1 - F(u)) = F(u) F(-u).
inline double logistic_pdf(double u) {
  if (std::isinf(u)) return 0.0;
  const double a = std::abs(u);
  const double e = std::exp(-a);
  return e / ((1.0 + e) * (1.0 + e));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Ordered cut points tau_1 < ... < tau_{K-1}, K >= 2.
class Thresholds {
 public:
  explicit Thresholds(std::vector<double> tau) : tau_(std::move(tau)) {
    if (tau_.empty()) throw ValidationError("thresholds: need K >= 2 classes (at least one threshold)");
    for (std::size_t j = 0; j < tau_.size(); ++j) {
      if (!std::isfinite(tau_[j])) throw ValidationError("thresholds must be finite");
      if (j > 0 && !(tau_[j] > tau_[j - 1])) {
        throw ValidationError("thresholds not increasing (tau_" + std::to_string(j) + " = " +
                              std::to_string(tau_[j - 1]) + " >= tau_" + std::to_string(j + 1) +
                              " = " + std::to_string(tau_[j]) + ")");
      }
    }
  }

  int num_classes() const { return static_cast<int>(tau_.size()) + 1; }
  /// tau_j for j in 1..K-1.
  double operator[](int j) const { return tau_[j - 1]; }
  const std::vector<double>& values() const { return tau_; }

  /// tau_j with the conventions tau_0 = -inf, tau_K = +inf.
  double extended(int j) const {
    if (j <= 0) return -std::numeric_limits<double>::infinity();
    if (j >= num_classes()) return std::numeric_limits<double>::infinity();
    return tau_[j - 1];
  }

  friend bool operator==(const Thresholds&, const Thresholds&) = default;

 private:
  std::vector<double> tau_;
};

struct OrdinalModel {
  Thresholds thresholds;
  /// May be empty: a thresholds-only model.
  Eigen::VectorXd coefficients;

  OrdinalModel(Thresholds tau, Eigen::VectorXd b)
      : thresholds(std::move(tau)), coefficients(std::move(b)) {
    if (!coefficients.allFinite()) throw ValidationError("model coefficients must be finite");
  }

  int num_classes() const { return thresholds.num_classes(); }
  int num_covariates() const { return static_cast<int>(coefficients.size()); }
};

/// pi_j = P(Y = j), j = 1..K (stored 0-based).
struct ClassDistribution {
  std::vector<double> probs;

  int num_classes() const { return static_cast<int>(probs.size()); }
  double operator[](int j) const { return probs[j - 1]; }
};

/// Linear predictor g = <x, b>.
inline double linear_predictor(const OrdinalModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.coefficients.size()) {
    throw DimensionError("linear_predictor: covariate length " + std::to_string(x.size()) +
                         " != coefficient length " + std::to_string(model.coefficients.size()));
  }
  return x.dot(model.coefficients);
}

namespace detail {

// P(tau_{j-1} < g + eps <= tau_j). When both cut points sit above g the
// difference is taken on the upper tail F(-u) to avoid cancellation near 1.
inline double class_prob(const Thresholds& tau, int j, double g) {
  const double lo = tau.extended(j - 1) - g;
  const double hi = tau.extended(j) - g;
  double p;
  if (lo > 0.0) {
    p = logistic_cdf(-lo) - logistic_cdf(-hi);
  } else {
    p = logistic_cdf(hi) - logistic_cdf(lo);
  }
  return std::max(p, 0.0);
}

}  // namespace detail

inline ClassDistribution class_probs(const OrdinalModel& model, double g) {
  if (!std::isfinite(g)) throw ValidationError("class_probs: linear predictor must be finite");
  const int k = model.num_classes();
  ClassDistribution d;
  d.probs.resize(k);
  for (int j = 1; j <= k; ++j) d.probs[j - 1] = detail::class_prob(model.thresholds, j, g);
  // Renormalize the rounding residue so the vector sums to one.
  double total = 0.0;
  for (double p : d.probs) total += p;
  for (double& p : d.probs) p /= total;
  return d;
}

/// Row-major N x M covariates with labels in {1..K}.
inline void check_data(const OrdinalModel& model, const Eigen::Ref<const Eigen::MatrixXd>& xs,
                       std::span<const int> ys) {
  if (xs.rows() != static_cast<Eigen::Index>(ys.size())) {
    throw DimensionError("covariate rows (" + std::to_string(xs.rows()) + ") != labels (" +
                         std::to_string(ys.size()) + ")");
  }
  if (xs.cols() != model.coefficients.size()) {
    throw DimensionError("covariate columns (" + std::to_string(xs.cols()) +
                         ") != coefficients (" + std::to_string(model.coefficients.size()) + ")");
  }
  const int k = model.num_classes();
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] < 1 || ys[i] > k) {
      throw ValidationError("label " + std::to_string(ys[i]) + " at row " + std::to_string(i) +
                            " outside 1.." + std::to_string(k));
    }
  }
}

/// -sum_i log pi_{y_i}(<x_i, b>). Returns +inf when any observed class has
/// probability that underflows to zero.
inline double neg_log_likelihood(const OrdinalModel& model,
                                 const Eigen::Ref<const Eigen::MatrixXd>& xs,
                                 std::span<const int> ys) {
  check_data(model, xs, ys);
  double nll = 0.0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const double g = xs.cols() > 0 ? xs.row(i).dot(model.coefficients) : 0.0;
    const double p = detail::class_prob(model.thresholds, ys[i], g);
    if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
    nll -= std::log(std::max(p, 1e-300));
  }
  return nll;
}

struct NllGradient {
  Eigen::VectorXd tau;  // K-1
  Eigen::VectorXd b;    // M
};

/// Analytic gradient of neg_log_likelihood with respect to (tau, b).
inline NllGradient nll_gradient(const OrdinalModel& model,
                                const Eigen::Ref<const Eigen::MatrixXd>& xs,
                                std::span<const int> ys) {
  check_data(model, xs, ys);
  const int k = model.num_classes();
  NllGradient grad{Eigen::VectorXd::Zero(k - 1), Eigen::VectorXd::Zero(xs.cols())};
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const double g = xs.cols() > 0 ? xs.row(i).dot(model.coefficients) : 0.0;
    const int y = ys[i];
    const double p = std::max(detail::class_prob(model.thresholds, y, g), 1e-300);
    const double f_hi = y < k ? logistic_pdf(model.thresholds[y] - g) : 0.0;
    const double f_lo = y > 1 ? logistic_pdf(model.thresholds[y - 1] - g) : 0.0;
    if (y < k) grad.tau[y - 1] -= f_hi / p;
    if (y > 1) grad.tau[y - 2] += f_lo / p;
    if (xs.cols() > 0) grad.b.noalias() += ((f_hi - f_lo) / p) * xs.row(i).transpose();
  }
  return grad;
}

/// Most probable class; ties go to the smallest index.
inline int predict_mode(const ClassDistribution& dist) {
  const auto it = std::max_element(dist.probs.begin(), dist.probs.end());
  return static_cast<int>(it - dist.probs.begin()) + 1;
}

/// The class j with tau_{j-1} < g <= tau_j. Needs no probability evaluation.
inline int predict_lad(const Thresholds& thresholds, double g) {
  const auto& tau = thresholds.values();
  const auto it = std::lower_bound(tau.begin(), tau.end(), g);
  return static_cast<int>(it - tau.begin()) + 1;
}

inline int predict_lad(const OrdinalModel& model, double g) {
  return predict_lad(model.thresholds, g);
}

enum class CostKind { ZeroOne, AbsoluteDifference, Custom };

/// C(yhat, y) >= 0 with C(y, y) = 0.
class CostFunction {
 public:
  static CostFunction zero_one() { return CostFunction(CostKind::ZeroOne, {}); }
  static CostFunction absolute_difference() {
    return CostFunction(CostKind::AbsoluteDifference, {});
  }
  /// matrix(yhat - 1, y - 1).
  static CostFunction custom(Eigen::MatrixXd matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() < 2) {
      throw ValidationError("custom cost must be a K x K matrix with K >= 2");
    }
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
      if (matrix(r, r) != 0.0) throw ValidationError("custom cost must have a zero diagonal");
      for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        if (!(matrix(r, c) >= 0.0) || !std::isfinite(matrix(r, c))) {
          throw ValidationError("custom cost entries must be finite and >= 0");
        }
      }
    }
    return CostFunction(CostKind::Custom, std::move(matrix));
  }

  CostKind kind() const { return kind_; }

  double operator()(int yhat, int y) const {
    switch (kind_) {
      case CostKind::ZeroOne:
        return yhat == y ? 0.0 : 1.0;
      case CostKind::AbsoluteDifference:
        return std::abs(yhat - y);
      case CostKind::Custom:
        return matrix_(yhat - 1, y - 1);
    }
    return 0.0;
  }

  void check_classes(int k) const {
    if (kind_ == CostKind::Custom && matrix_.rows() != k) {
      throw DimensionError("custom cost is " + std::to_string(matrix_.rows()) + "x" +
                           std::to_string(matrix_.rows()) + " but the distribution has " +
                           std::to_string(k) + " classes");
    }
  }

 private:
  CostFunction(CostKind kind, Eigen::MatrixXd matrix) : kind_(kind), matrix_(std::move(matrix)) {}

  CostKind kind_;
  Eigen::MatrixXd matrix_;
};

struct CostDecision {
  int cls = 1;
  std::vector<double> expected_costs;  // index yhat - 1
};

/// Brute-force Bayes decision: E[C(yhat, Y)] = sum_y C(yhat, y) pi_y for every
/// candidate yhat, returning the smallest minimizing class.
inline CostDecision expected_cost_oracle(const ClassDistribution& dist, const CostFunction& cost) {
  const int k = dist.num_classes();
  cost.check_classes(k);
  CostDecision out;
  out.expected_costs.assign(k, 0.0);
  for (int yhat = 1; yhat <= k; ++yhat) {
    double e = 0.0;
    for (int y = 1; y <= k; ++y) e += cost(yhat, y) * dist[y];
    out.expected_costs[yhat - 1] = e;
  }
  const auto it = std::min_element(out.expected_costs.begin(), out.expected_costs.end());
  out.cls = static_cast<int>(it - out.expected_costs.begin()) + 1;
  return out;
}

}  // namespace folr
