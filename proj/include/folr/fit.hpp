#pragma once

// Functional ordinal logistic regression.
//
// With X(t) = a' psi(t) and beta(t) = b' phi(t), the functional predictor
// <X, beta> in L2([0,T]) equals a' R b where R(i, j) = <psi_i, phi_j>. The
// reduced covariates x~ = a' R turn the functional model into an ordinary
// cumulative logit model with M covariates, fitted here by maximum
// likelihood or with an l1 penalty on b.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "folr/basis.hpp"
#include "folr/error.hpp"
#include "folr/ordinal.hpp"

namespace folr {

struct FitConfig {
  /// l1 weight; the penalty is lasso_lambda * N * ||b||_1.
  double lasso_lambda = 0.0;
  int max_iters = 10000;
  /// Stop once the l-inf norm of the (minimum-norm sub)gradient is below this.
  double grad_tol = 1e-6;
  /// First trial step of the line search.
  double step_init = 1.0;
  /// Smallest gap allowed between initial thresholds.
  double threshold_init_spread = 1e-6;
  std::uint64_t seed = 0;
  /// Fit on columns rescaled to mean 0 / sd 1, then map b and tau back.
  bool standardize = false;

  void validate() const {
    if (!(lasso_lambda >= 0.0) || !std::isfinite(lasso_lambda)) {
      throw ValidationError("lasso lambda must be finite and >= 0");
    }
    if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
    if (!(grad_tol > 0.0)) throw ValidationError("grad_tol must be > 0");
    if (!(step_init > 0.0)) throw ValidationError("step_init must be > 0");
    if (!(threshold_init_spread > 0.0)) throw ValidationError("threshold_init_spread must be > 0");
  }
};

struct FitDiagnostics {
  double final_nll = 0.0;
  int iterations = 0;
  bool converged = false;
  /// l-inf norm of the optimality measure at the returned point.
  double gradient_norm = 0.0;
  /// 0-based indices of nonzero coefficients.
  std::vector<int> active_set;
  std::vector<std::string> warnings;
};

/// A fitted scalar-covariate cumulative logit model.
struct OrdinalFit {
  OrdinalModel model;
  FitDiagnostics diagnostics;
};

namespace detail {

inline std::vector<int> class_counts(std::span<const int> ys, int num_classes) {
  std::vector<int> counts(num_classes, 0);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] < 1 || ys[i] > num_classes) {
      throw ValidationError("label " + std::to_string(ys[i]) + " at row " + std::to_string(i) +
                            " outside 1.." + std::to_string(num_classes));
    }
    ++counts[ys[i] - 1];
  }
  return counts;
}

// Unconstrained coordinates: theta = (tau_1, log(tau_2 - tau_1), ...,
// log(tau_{K-1} - tau_{K-2}), b). Any theta maps to ordered thresholds.
class ThresholdMap {
 public:
  explicit ThresholdMap(int num_classes) : k_(num_classes) {}

  int tau_dim() const { return k_ - 1; }

  Eigen::VectorXd to_theta(const std::vector<double>& tau) const {
    Eigen::VectorXd t(k_ - 1);
    t[0] = tau[0];
    for (int j = 1; j < k_ - 1; ++j) t[j] = std::log(tau[j] - tau[j - 1]);
    return t;
  }

  std::vector<double> to_tau(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
    std::vector<double> tau(k_ - 1);
    tau[0] = theta[0];
    for (int j = 1; j < k_ - 1; ++j) tau[j] = tau[j - 1] + std::exp(theta[j]);
    return tau;
  }

  // Chain rule: dNLL/dtheta from dNLL/dtau.
  Eigen::VectorXd pull_back(const Eigen::Ref<const Eigen::VectorXd>& theta,
                            const Eigen::VectorXd& grad_tau) const {
    Eigen::VectorXd out(k_ - 1);
    double tail = 0.0;
    for (int j = k_ - 2; j >= 0; --j) {
      tail += grad_tau[j];
      out[j] = j == 0 ? tail : std::exp(theta[j]) * tail;
    }
    return out;
  }

 private:
  int k_;
};

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

struct Standardization {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
};

inline Standardization column_stats(const Eigen::MatrixXd& xs) {
  const auto n = static_cast<double>(xs.rows());
  Standardization s;
  s.mean = xs.colwise().mean();
  s.scale.resize(xs.cols());
  for (Eigen::Index c = 0; c < xs.cols(); ++c) {
    const double var = (xs.col(c).array() - s.mean[c]).square().sum() / n;
    s.scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

// Model on the original scale -> model on standardized columns and back.
inline OrdinalModel to_standardized(const OrdinalModel& m, const Standardization& s) {
  Eigen::VectorXd b = m.coefficients.cwiseProduct(s.scale.transpose());
  const double shift = m.coefficients.dot(s.mean.transpose());
  std::vector<double> tau = m.thresholds.values();
  for (double& t : tau) t -= shift;
  return OrdinalModel(Thresholds(std::move(tau)), std::move(b));
}

inline OrdinalModel from_standardized(const OrdinalModel& m, const Standardization& s) {
  Eigen::VectorXd b = m.coefficients.cwiseQuotient(s.scale.transpose());
  const double shift = b.dot(s.mean.transpose());
  std::vector<double> tau = m.thresholds.values();
  for (double& t : tau) t += shift;
  return OrdinalModel(Thresholds(std::move(tau)), std::move(b));
}

}  // namespace detail

/// Closed-form MLE of the model without covariates:
/// tau_j = logit((n_1 + ... + n_j) / N). Every class must be observed.
inline Thresholds thresholds_only_mle(std::span<const int> ys, int num_classes,
                                      double min_gap = 1e-6) {
  if (num_classes < 2) throw ValidationError("need at least 2 classes");
  const std::vector<int> counts = detail::class_counts(ys, num_classes);
  for (int j = 0; j < num_classes; ++j) {
    if (counts[j] == 0) {
      throw ConfigError("class " + std::to_string(j + 1) + " is not observed in the training data");
    }
  }
  const auto n = static_cast<double>(ys.size());
  std::vector<double> tau(num_classes - 1);
  long cum = 0;
  for (int j = 0; j < num_classes - 1; ++j) {
    cum += counts[j];
    tau[j] = logit(static_cast<double>(cum) / n);
    if (j > 0 && tau[j] < tau[j - 1] + min_gap) tau[j] = tau[j - 1] + min_gap;
  }
  return Thresholds(std::move(tau));
}

/// Smallest l1 weight (in units of N) at which the penalized fit has b = 0:
/// ||dNLL/db||_inf / N at the thresholds-only MLE.
inline double lambda_max(const Eigen::MatrixXd& xs, std::span<const int> ys, int num_classes,
                         bool standardize = false) {
  if (xs.cols() == 0) return 0.0;
  Eigen::MatrixXd work = xs;
  if (standardize) {
    const auto s = detail::column_stats(xs);
    work = (xs.rowwise() - s.mean).array().rowwise() / s.scale.array();
  }
  const OrdinalModel null_model(thresholds_only_mle(ys, num_classes),
                                Eigen::VectorXd::Zero(xs.cols()));
  const NllGradient g = nll_gradient(null_model, work, ys);
  return g.b.lpNorm<Eigen::Infinity>() / static_cast<double>(ys.size());
}

/// Penalized maximum likelihood for the cumulative logit model:
///
///   minimize  NLL(tau, b) + lambda * N * ||b||_1
///
/// by (proximal) gradient descent in the ordered-threshold coordinates,
/// with monotone backtracking (factor 0.5, sufficient-decrease constant
/// 1e-4). Trial steps after the first use the Barzilai-Borwein estimate.
/// Thresholds are never penalized. Starts from `warm_start` when given,
/// otherwise from b = 0 and the thresholds-only MLE.
///
/// Iterates run on centered, unit-variance columns with a per-column l1
/// weight, which leaves the objective unchanged but keeps badly scaled
/// Gram-reduced designs tractable. With cfg.standardize the penalty applies
/// to the standardized coefficients instead.
inline OrdinalFit fit_ordinal(const Eigen::MatrixXd& xs, std::span<const int> ys, int num_classes,
                              const FitConfig& cfg,
                              const std::optional<OrdinalModel>& warm_start = std::nullopt) {
  cfg.validate();
  if (xs.rows() != static_cast<Eigen::Index>(ys.size())) {
    throw DimensionError("design has " + std::to_string(xs.rows()) + " rows for " +
                         std::to_string(ys.size()) + " labels");
  }
  if (ys.empty()) throw ConfigError("cannot fit on an empty dataset");
  const int k = num_classes;
  const auto m = static_cast<int>(xs.cols());
  const auto n = static_cast<double>(ys.size());
  const Thresholds init_tau = thresholds_only_mle(ys, k, cfg.threshold_init_spread);

  FitDiagnostics diag;
  if (ys.size() <= static_cast<std::size_t>(m + k - 1)) {
    diag.warnings.push_back("few observations: N = " + std::to_string(ys.size()) +
                            " <= M + K - 1 = " + std::to_string(m + k - 1));
  }

  const detail::Standardization stdz =
      m > 0 ? detail::column_stats(xs)
            : detail::Standardization{Eigen::RowVectorXd(0), Eigen::RowVectorXd(0)};
  const Eigen::MatrixXd work =
      m > 0 ? Eigen::MatrixXd((xs.rowwise() - stdz.mean).array().rowwise() / stdz.scale.array())
            : xs;
  // l1 weight of each working coefficient.
  const Eigen::VectorXd weight = cfg.standardize
                                     ? Eigen::VectorXd::Ones(m)
                                     : Eigen::VectorXd(stdz.scale.transpose().cwiseInverse());

  OrdinalModel start(init_tau, Eigen::VectorXd::Zero(m));
  if (warm_start) {
    if (warm_start->num_classes() != k || warm_start->num_covariates() != m) {
      throw DimensionError("warm start does not match the design dimensions");
    }
    start = *warm_start;
  }
  if (m > 0) start = detail::to_standardized(start, stdz);

  const detail::ThresholdMap map(k);
  const int nt = map.tau_dim();
  const double penalty = cfg.lasso_lambda * n;

  Eigen::VectorXd theta(nt + m);
  theta.head(nt) = map.to_theta(start.thresholds.values());
  theta.tail(m) = start.coefficients;

  auto model_of = [&](const Eigen::VectorXd& th) {
    return OrdinalModel(Thresholds(map.to_tau(th.head(nt))), th.tail(m));
  };
  auto objective = [&](const Eigen::VectorXd& th) {
    if (!th.allFinite()) return std::numeric_limits<double>::infinity();
    std::vector<double> tau = map.to_tau(th.head(nt));
    for (std::size_t j = 0; j < tau.size(); ++j) {
      if (!std::isfinite(tau[j]) || (j > 0 && !(tau[j] > tau[j - 1]))) {
        return std::numeric_limits<double>::infinity();
      }
    }
    const OrdinalModel mod(Thresholds(std::move(tau)), th.tail(m));
    return neg_log_likelihood(mod, work, ys) + penalty * th.tail(m).cwiseAbs().dot(weight);
  };
  // Optimality measure in the caller's (tau, b): the gradient for tau and
  // the minimum-norm subgradient of the penalized objective for b.
  auto optimality = [&](const Eigen::VectorXd& th, const NllGradient& g) {
    double worst = g.tau.size() ? g.tau.lpNorm<Eigen::Infinity>() : 0.0;
    const double tau_sum = g.tau.sum();
    for (int c = 0; c < m; ++c) {
      double b = th[nt + c];
      double gb = g.b[c];
      if (!cfg.standardize) {
        // tau' = tau - mean.b and b' = scale * b.
        b /= stdz.scale[c];
        gb = stdz.scale[c] * gb - stdz.mean[c] * tau_sum;
      }
      const double r = b != 0.0 ? std::abs(gb + penalty * (b > 0 ? 1.0 : -1.0))
                                : std::max(std::abs(gb) - penalty, 0.0);
      worst = std::max(worst, r);
    }
    return worst;
  };

  double f = objective(theta);
  if (!std::isfinite(f)) throw EstimationError("objective is not finite at the starting point");

  auto gradient = [&](const Eigen::VectorXd& th, NllGradient& nat) {
    nat = nll_gradient(model_of(th), work, ys);
    Eigen::VectorXd g(nt + m);
    g.head(nt) = map.pull_back(th.head(nt), nat.tau);
    g.tail(m) = nat.b;
    return g;
  };

  NllGradient nat;
  Eigen::VectorXd grad = gradient(theta, nat);
  double measure = optimality(theta, nat);
  double step = cfg.step_init;
  constexpr double kArmijo = 1e-4;
  constexpr double kSeparationNorm = 1e4;
  constexpr double kSeparationNll = 1e-6;

  int iter = 0;
  bool converged = measure <= cfg.grad_tol;
  while (!converged && iter < cfg.max_iters) {
    // Changes this small in f are rounding noise.
    const double noise = 1e-13 * std::max(1.0, std::abs(f));
    Eigen::VectorXd trial(nt + m);
    double f_trial = 0.0;
    NllGradient nat_new;
    Eigen::VectorXd grad_new;
    bool accepted = false;
    for (int bt = 0; bt < 200; ++bt) {
      trial = theta - step * grad;
      for (int c = 0; c < m; ++c) {
        trial[nt + c] = detail::soft_threshold(trial[nt + c], step * penalty * weight[c]);
      }
      const double moved = (trial - theta).squaredNorm();
      if (!(moved > 0.0)) break;
      f_trial = objective(trial);
      if (std::isfinite(f_trial) && f_trial <= f - kArmijo / step * moved) {
        grad_new = gradient(trial, nat_new);
        accepted = true;
        break;
      }
      if (std::isfinite(f_trial) && f_trial <= f + noise) {
        // f cannot resolve the decrease; accept on a smaller optimality measure.
        grad_new = gradient(trial, nat_new);
        if (optimality(trial, nat_new) < measure) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      diag.warnings.push_back("line search stalled at iteration " + std::to_string(iter));
      break;
    }
    ++iter;
    const Eigen::VectorXd s = trial - theta;
    const Eigen::VectorXd y = grad_new - grad;
    theta = trial;
    f = f_trial;
    grad = grad_new;
    nat = nat_new;
    measure = optimality(theta, nat);
    converged = measure <= cfg.grad_tol;

    if (m > 0 && theta.tail(m).cwiseQuotient(stdz.scale.transpose()).lpNorm<Eigen::Infinity>() >
                     kSeparationNorm) {
      diag.warnings.push_back("possible perfect separation: coefficient norm exceeds 1e4");
      break;
    }
    // Barzilai-Borwein trial step for the next line search.
    const double sy = s.dot(y);
    const double ss = s.squaredNorm();
    if (sy > 0.0 && ss > 0.0) {
      step = std::clamp(ss / sy, 1e-20, 1e20);
    } else {
      step = std::min(step * 2.0, 1e20);
    }
  }

  OrdinalModel fitted = model_of(theta);
  if (m > 0) fitted = detail::from_standardized(fitted, stdz);
  diag.iterations = iter;
  diag.converged = converged;
  diag.gradient_norm = measure;
  diag.final_nll = neg_log_likelihood(fitted, xs, ys);
  for (int c = 0; c < m; ++c) {
    if (fitted.coefficients[c] != 0.0) diag.active_set.push_back(c);
  }
  // Under separation the gradient vanishes as |b| grows, so a "converged"
  // fit whose likelihood is essentially 1 is not a maximum.
  if (m > 0 && diag.final_nll < kSeparationNll * n) {
    diag.converged = false;
    diag.warnings.push_back("possible perfect separation: fitted likelihood is essentially 1");
  }
  if (!diag.converged && diag.warnings.empty()) {
    diag.warnings.push_back("did not converge in " + std::to_string(cfg.max_iters) + " iterations");
  }
  return OrdinalFit{std::move(fitted), std::move(diag)};
}

/// Warm-started fits along a decreasing lambda grid.
inline std::vector<OrdinalFit> lasso_path(const Eigen::MatrixXd& xs, std::span<const int> ys,
                                          int num_classes, FitConfig cfg,
                                          std::span<const double> lambdas) {
  std::vector<OrdinalFit> path;
  path.reserve(lambdas.size());
  std::optional<OrdinalModel> warm;
  for (double lam : lambdas) {
    cfg.lasso_lambda = lam;
    path.push_back(fit_ordinal(xs, ys, num_classes, cfg, warm));
    warm = path.back().model;
  }
  return path;
}

/// n values from hi down to hi * min_ratio, evenly spaced in log scale.
inline std::vector<double> log_grid(double hi, double min_ratio, int n) {
  if (n < 1) throw ValidationError("grid size must be >= 1");
  if (!(hi > 0.0) || !(min_ratio > 0.0) || min_ratio > 1.0) {
    throw ValidationError("log grid needs hi > 0 and 0 < min_ratio <= 1");
  }
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    grid[i] = hi * std::pow(min_ratio, frac);
  }
  return grid;
}

/// Reduced covariates x~_i = a_i' R for a set of curves sharing one basis.
struct ReducedDesign {
  Eigen::MatrixXd xt;
  BasisSpec curve_basis;
  /// Empty for a thresholds-only model.
  std::optional<BasisSpec> beta_basis;
  /// R: curve-basis size x beta-basis size (0 columns without a beta basis).
  Eigen::MatrixXd gram;

  int num_covariates() const { return static_cast<int>(xt.cols()); }
};

inline Eigen::MatrixXd reduction_matrix(const BasisSpec& curve_basis,
                                        const std::optional<BasisSpec>& beta_basis) {
  if (!beta_basis) return Eigen::MatrixXd(curve_basis.size(), 0);
  return gram(curve_basis, *beta_basis).entries;
}

inline ReducedDesign reduce(std::span<const FunctionalSample> samples,
                            const std::optional<BasisSpec>& beta_basis) {
  if (samples.empty()) throw DimensionError("reduce: no samples");
  const BasisSpec& curve_basis = samples.front().basis();
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].basis() == curve_basis)) {
      throw DimensionError("reduce: sample " + std::to_string(i) +
                           " uses a different basis than sample 0");
    }
  }
  ReducedDesign d{Eigen::MatrixXd(), curve_basis, beta_basis,
                  reduction_matrix(curve_basis, beta_basis)};
  Eigen::MatrixXd a(static_cast<Eigen::Index>(samples.size()), curve_basis.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = samples[i].coefficients().transpose();
  }
  d.xt = a * d.gram;
  return d;
}

enum class FitKind { Mle, Lasso };

inline const char* to_string(FitKind kind) { return kind == FitKind::Mle ? "mle" : "lasso"; }

/// beta(t) = sum_m b_m phi_m(t) together with the thresholds, plus what is
/// needed to map new curves onto the reduced covariates.
class FittedFolr {
 public:
  FittedFolr(OrdinalModel model, BasisSpec curve_basis, std::optional<BasisSpec> beta_basis,
             FitKind kind, double lambda, std::uint64_t seed, bool standardized,
             FitDiagnostics diagnostics)
      : model_(std::move(model)),
        curve_basis_(std::move(curve_basis)),
        beta_basis_(std::move(beta_basis)),
        kind_(kind),
        lambda_(lambda),
        seed_(seed),
        standardized_(standardized),
        diagnostics_(std::move(diagnostics)) {
    const int m = beta_basis_ ? beta_basis_->size() : 0;
    if (model_.num_covariates() != m) {
      throw DimensionError("model has " + std::to_string(model_.num_covariates()) +
                           " coefficients for a beta basis of size " + std::to_string(m));
    }
    gram_ = reduction_matrix(curve_basis_, beta_basis_);
  }

  const OrdinalModel& model() const { return model_; }
  const BasisSpec& curve_basis() const { return curve_basis_; }
  const std::optional<BasisSpec>& beta_basis() const { return beta_basis_; }
  FitKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  std::uint64_t seed() const { return seed_; }
  bool standardized() const { return standardized_; }
  const FitDiagnostics& diagnostics() const { return diagnostics_; }
  int num_classes() const { return model_.num_classes(); }

  Eigen::VectorXd reduced_covariates(const FunctionalSample& sample) const {
    if (!(sample.basis() == curve_basis_)) {
      throw DimensionError("sample basis " + sample.basis().describe() +
                           " does not match the model's curve basis " + curve_basis_.describe());
    }
    return gram_.transpose() * sample.coefficients();
  }

  /// <X, beta> for a curve.
  double score(const FunctionalSample& sample) const {
    return linear_predictor(model_, reduced_covariates(sample));
  }

 private:
  OrdinalModel model_;
  BasisSpec curve_basis_;
  std::optional<BasisSpec> beta_basis_;
  FitKind kind_;
  double lambda_;
  std::uint64_t seed_;
  bool standardized_;
  FitDiagnostics diagnostics_;
  Eigen::MatrixXd gram_;
};

inline FittedFolr fit_folr(const ReducedDesign& design, std::span<const int> ys, int num_classes,
                           const FitConfig& cfg) {
  OrdinalFit fit = fit_ordinal(design.xt, ys, num_classes, cfg);
  return FittedFolr(std::move(fit.model), design.curve_basis, design.beta_basis,
                    cfg.lasso_lambda > 0.0 ? FitKind::Lasso : FitKind::Mle, cfg.lasso_lambda,
                    cfg.seed, cfg.standardize, std::move(fit.diagnostics));
}

/// Unpenalized maximum likelihood.
inline FittedFolr fit_mle(const ReducedDesign& design, std::span<const int> ys, int num_classes,
                          FitConfig cfg = {}) {
  cfg.lasso_lambda = 0.0;
  return fit_folr(design, ys, num_classes, cfg);
}

/// l1-penalized likelihood; cfg.lasso_lambda must be > 0.
inline FittedFolr fit_lasso(const ReducedDesign& design, std::span<const int> ys, int num_classes,
                            const FitConfig& cfg) {
  if (!(cfg.lasso_lambda > 0.0)) throw ValidationError("fit_lasso needs lasso_lambda > 0");
  return fit_folr(design, ys, num_classes, cfg);
}

/// beta evaluated on a grid of points of [0, T].
inline Eigen::VectorXd reconstruct_beta(const FittedFolr& fit, std::span<const double> t_grid) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t_grid.size()));
  if (!fit.beta_basis()) {
    for (double t : t_grid) {
      if (!(t >= 0.0 && t <= fit.curve_basis().domain_end())) {
        throw DomainError("grid point " + std::to_string(t) + " outside the domain");
      }
    }
    return out;
  }
  const auto& b = fit.model().coefficients;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = fit.beta_basis()->eval(t_grid[k]).dot(b);
  }
  return out;
}

enum class DecisionRule { Mode, Lad };

inline const char* to_string(DecisionRule rule) { return rule == DecisionRule::Mode ? "mode" : "lad"; }

struct Prediction {
  int cls = 1;
  /// <X, beta>.
  double score = 0.0;
  /// Filled by the mode rule only; the LAD rule compares the score with the
  /// thresholds and never evaluates probabilities. See class_distribution().
  std::optional<ClassDistribution> distribution;
};

inline Prediction predict_score(const OrdinalModel& model, double g, DecisionRule rule) {
  Prediction p;
  p.score = g;
  if (rule == DecisionRule::Lad) {
    p.cls = predict_lad(model, g);
  } else {
    p.distribution = class_probs(model, g);
    p.cls = predict_mode(*p.distribution);
  }
  return p;
}

inline Prediction predict(const FittedFolr& fit, const FunctionalSample& sample,
                          DecisionRule rule) {
  return predict_score(fit.model(), fit.score(sample), rule);
}

inline ClassDistribution class_distribution(const FittedFolr& fit,
                                            const FunctionalSample& sample) {
  return class_probs(fit.model(), fit.score(sample));
}

}  // namespace folr
