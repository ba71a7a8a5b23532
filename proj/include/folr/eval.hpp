#pragma once

// Synthetic data, stratified k-fold cross-validation, and the three model
// arms compared in the evaluation: an ordinal model on the last observed
// value of each curve, and the functional model with and without an l1
// penalty.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "folr/basis.hpp"
#include "folr/detail/random.hpp"
#include "folr/error.hpp"
#include "folr/fit.hpp"
#include "folr/ordinal.hpp"

namespace folr {

/// How simulated curve coefficients are drawn. With class_means, each curve
/// first draws a nominal group uniformly and centers its coefficients on that
/// group's mean; otherwise coefficients are mean + sd * N(0, I).
struct CurveGenerator {
  BasisSpec basis;
  Eigen::VectorXd mean;  // empty = zero mean
  std::vector<Eigen::VectorXd> class_means;
  double coefficient_sd = 1.0;
};

struct SyntheticSpec {
  Thresholds true_tau;
  FunctionalSample true_beta;
  CurveGenerator curves;
  int n_curves = 100;
  double noise_sd = 0.0;
  std::vector<double> sampling_times;
  std::uint64_t seed = 0;

  int num_classes() const { return true_tau.num_classes(); }

  void validate() const {
    if (n_curves < 1) throw ValidationError("n_curves must be >= 1");
    if (!(noise_sd >= 0.0)) throw ValidationError("noise_sd must be >= 0");
    if (!(curves.coefficient_sd >= 0.0)) throw ValidationError("coefficient_sd must be >= 0");
    detail::check_same_domain(curves.basis, true_beta.basis());
    const int r = curves.basis.size();
    if (curves.mean.size() != 0 && curves.mean.size() != r) {
      throw DimensionError("curve mean has " + std::to_string(curves.mean.size()) +
                           " coefficients for a basis of size " + std::to_string(r));
    }
    for (const auto& cm : curves.class_means) {
      if (cm.size() != r) throw DimensionError("class mean size does not match the curve basis");
    }
    if (sampling_times.size() < 2) throw ValidationError("need at least 2 sampling times");
    for (std::size_t k = 0; k < sampling_times.size(); ++k) {
      if (sampling_times[k] < 0.0 || sampling_times[k] > curves.basis.domain_end()) {
        throw DomainError("sampling time outside the curve domain");
      }
      if (k > 0 && !(sampling_times[k] > sampling_times[k - 1])) {
        throw ValidationError("sampling times must be strictly increasing");
      }
    }
  }
};

inline std::vector<double> uniform_grid(double end, int points) {
  if (points < 2) throw ValidationError("grid needs at least 2 points");
  std::vector<double> t(points);
  for (int k = 0; k < points; ++k) t[k] = end * static_cast<double>(k) / (points - 1);
  t.back() = end;
  return t;
}

struct SimulatedData {
  std::vector<RawCurve> curves;
  std::vector<int> labels;
  /// The noiseless curves behind `curves`.
  std::vector<FunctionalSample> samples;
  /// <X_i, beta> before the logistic noise.
  std::vector<double> signal;
};

/// Draws curves and labels from Y* = <X, beta> + eps, eps ~ Logistic(0, 1),
/// Y = j iff tau_{j-1} < Y* <= tau_j. Deterministic in spec.seed.
inline SimulatedData simulate(const SyntheticSpec& spec) {
  spec.validate();
  detail::Rng rng(spec.seed);
  const BasisSpec& basis = spec.curves.basis;
  const int r = basis.size();
  const Eigen::MatrixXd gram_cb = gram(basis, spec.true_beta.basis()).entries;
  const Eigen::VectorXd reduced_beta = gram_cb * spec.true_beta.coefficients();

  const auto n_times = static_cast<int>(spec.sampling_times.size());
  Eigen::MatrixXd design(n_times, r);
  for (int k = 0; k < n_times; ++k) design.row(k) = basis.eval(spec.sampling_times[k]).transpose();

  SimulatedData out;
  out.curves.reserve(spec.n_curves);
  out.labels.reserve(spec.n_curves);
  const int width = static_cast<int>(std::to_string(spec.n_curves).size());
  for (int i = 0; i < spec.n_curves; ++i) {
    Eigen::VectorXd a = spec.curves.mean.size() ? spec.curves.mean : Eigen::VectorXd::Zero(r);
    if (!spec.curves.class_means.empty()) {
      a += spec.curves.class_means[rng.below(spec.curves.class_means.size())];
    }
    for (int c = 0; c < r; ++c) a[c] += spec.curves.coefficient_sd * rng.normal();
    const double g = a.dot(reduced_beta);
    const double latent = g + rng.logistic();
    const int label = predict_lad(spec.true_tau, latent);

    std::string id = std::to_string(i + 1);
    id = "c" + std::string(width - id.size(), '0') + id;
    RawCurve curve{id, spec.sampling_times, std::vector<double>(n_times)};
    const Eigen::VectorXd clean = design * a;
    for (int k = 0; k < n_times; ++k) curve.values[k] = clean[k] + spec.noise_sd * rng.normal();

    out.curves.push_back(std::move(curve));
    out.labels.push_back(label);
    out.samples.emplace_back(basis, std::move(a));
    out.signal.push_back(g);
  }
  return out;
}

/// Fold index (0..k-1) for every observation. Each class is shuffled and
/// dealt round-robin, continuing the rotation across classes, so per-class
/// fold counts differ by at most one and fold sizes stay balanced.
inline std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  if (static_cast<std::size_t>(k) > labels.size()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds the " +
                      std::to_string(labels.size()) + " observations");
  }
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
  detail::Rng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  int next = 0;
  for (auto& [cls, idx] : by_class) {
    rng.shuffle(idx);
    for (int i : idx) {
      fold[i] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

struct FoldMetrics {
  double mae = 0.0;
  double accuracy_error = 0.0;
};

/// Mean absolute class difference and misclassification rate.
inline FoldMetrics score_predictions(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw DimensionError("prediction count does not match the held-out labels");
  }
  FoldMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    m.mae += std::abs(truth[i] - predicted[i]);
    m.accuracy_error += truth[i] != predicted[i] ? 1.0 : 0.0;
  }
  m.mae /= static_cast<double>(truth.size());
  m.accuracy_error /= static_cast<double>(truth.size());
  return m;
}

struct CvReport {
  std::vector<FoldMetrics> per_fold;
  double mean_mae = 0.0;
  double mean_accuracy_error = 0.0;
  int n_folds = 0;
};

inline CvReport summarize(std::vector<FoldMetrics> folds) {
  CvReport r;
  r.n_folds = static_cast<int>(folds.size());
  for (const auto& f : folds) {
    r.mean_mae += f.mae;
    r.mean_accuracy_error += f.accuracy_error;
  }
  if (r.n_folds > 0) {
    r.mean_mae /= r.n_folds;
    r.mean_accuracy_error /= r.n_folds;
  }
  r.per_fold = std::move(folds);
  return r;
}

/// Trains on `train` and returns one predicted class per index of `test`.
using FitPredict =
    std::function<std::vector<int>(std::span<const int> train, std::span<const int> test)>;

/// Every class 1..K needs two observations so that each training split of a
/// stratified partition contains all classes.
inline void check_cv_classes(std::span<const int> labels, int num_classes) {
  std::vector<int> counts(num_classes, 0);
  for (int y : labels) {
    if (y < 1 || y > num_classes) {
      throw ValidationError("label " + std::to_string(y) + " outside 1.." +
                            std::to_string(num_classes));
    }
    ++counts[y - 1];
  }
  for (int j = 0; j < num_classes; ++j) {
    if (counts[j] < 2) {
      throw ConfigError("class " + std::to_string(j + 1) + " has " + std::to_string(counts[j]) +
                        " observation(s); every training fold must contain all classes");
    }
  }
}

/// Calls fn(train, test) for each fold of a seeded stratified partition.
template <typename Fn>
void for_each_fold(std::span<const int> labels, int num_classes, int k, std::uint64_t seed,
                   Fn&& fn) {
  check_cv_classes(labels, num_classes);
  const std::vector<int> fold = stratified_folds(labels, k, seed);
  for (int f = 0; f < k; ++f) {
    std::vector<int> train, test;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (fold[i] == f ? test : train).push_back(static_cast<int>(i));
    }
    fn(std::span<const int>(train), std::span<const int>(test));
  }
}

inline CvReport kfold(std::span<const int> labels, int num_classes, int k, std::uint64_t seed,
                      const FitPredict& fit_predict) {
  std::vector<FoldMetrics> metrics;
  for_each_fold(labels, num_classes, k, seed,
                [&](std::span<const int> train, std::span<const int> test) {
                  std::vector<int> truth;
                  truth.reserve(test.size());
                  for (int i : test) truth.push_back(labels[i]);
                  metrics.push_back(score_predictions(truth, fit_predict(train, test)));
                });
  return summarize(std::move(metrics));
}

/// N x 1 design holding the final observed value of each curve.
inline Eigen::MatrixXd last_value_baseline(std::span<const RawCurve> curves) {
  if (curves.empty()) throw DimensionError("last_value_baseline: no curves");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(curves.size()), 1);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (curves[i].values.empty()) throw ValidationError("curve '" + curves[i].id + "' is empty");
    x(static_cast<Eigen::Index>(i), 0) = curves[i].values.back();
  }
  return x;
}

namespace detail {

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, std::span<const int> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

inline std::vector<int> take(std::span<const int> v, std::span<const int> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

inline std::vector<int> predict_rows(const OrdinalModel& model, const Eigen::MatrixXd& x,
                                     std::span<const int> rows, DecisionRule rule) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double g = x.cols() ? x.row(rows[i]).dot(model.coefficients) : 0.0;
    out[i] = predict_score(model, g, rule).cls;
  }
  return out;
}

}  // namespace detail

struct LambdaSelection {
  std::vector<double> grid;
  /// Mean inner-fold MAE for each grid value.
  std::vector<double> mae;
  double lambda = 0.0;
  double lambda_max = 0.0;
};

/// Picks the l1 weight by inner k-fold MAE over a log grid from lambda_max
/// down to lambda_max * min_ratio. Ties go to the larger (sparser) lambda.
inline LambdaSelection select_lambda(const Eigen::MatrixXd& xs, std::span<const int> ys,
                                     int num_classes, const FitConfig& cfg, DecisionRule rule,
                                     int inner_folds = 5, int grid_size = 20,
                                     double min_ratio = 1e-3, std::uint64_t seed = 0) {
  LambdaSelection sel;
  sel.lambda_max = lambda_max(xs, ys, num_classes, cfg.standardize);
  if (!(sel.lambda_max > 0.0)) {
    sel.lambda = 0.0;
    return sel;
  }
  sel.grid = log_grid(sel.lambda_max, min_ratio, grid_size);
  sel.mae.assign(sel.grid.size(), 0.0);
  for_each_fold(ys, num_classes, inner_folds, seed,
                [&](std::span<const int> train, std::span<const int> test) {
                  const Eigen::MatrixXd xtr = detail::take_rows(xs, train);
                  const std::vector<int> ytr = detail::take(ys, train);
                  const std::vector<int> truth = detail::take(ys, test);
                  const auto path = lasso_path(xtr, ytr, num_classes, cfg, sel.grid);
                  for (std::size_t g = 0; g < path.size(); ++g) {
                    const auto pred = detail::predict_rows(path[g].model, xs, test, rule);
                    sel.mae[g] += score_predictions(truth, pred).mae / inner_folds;
                  }
                });
  std::size_t best = 0;
  for (std::size_t g = 1; g < sel.grid.size(); ++g) {
    if (sel.mae[g] < sel.mae[best] - 1e-12) best = g;
  }
  sel.lambda = sel.grid[best];
  return sel;
}

enum class Arm { LastValue, Folr, FolrLasso };

inline const char* to_string(Arm arm) {
  switch (arm) {
    case Arm::LastValue:
      return "last-value";
    case Arm::Folr:
      return "folr";
    case Arm::FolrLasso:
      return "folr-lasso";
  }
  return "?";
}

inline Arm parse_arm(const std::string& name) {
  if (name == "last-value") return Arm::LastValue;
  if (name == "folr") return Arm::Folr;
  if (name == "folr-lasso") return Arm::FolrLasso;
  throw ConfigError("unknown arm '" + name + "' (expected last-value, folr, folr-lasso)");
}

struct Dataset {
  std::vector<RawCurve> curves;
  std::vector<int> labels;
  int num_classes = 2;
};

struct PipelineConfig {
  /// Basis the raw curves are smoothed onto.
  BasisSpec curve_basis = BasisSpec::uniform_bspline(16, 4, 1.0);
  double smooth_lambda = 0.0;
  BasisSpec beta_basis = BasisSpec::uniform_bspline(10, 4, 1.0);
  FitConfig fit;
  DecisionRule rule = DecisionRule::Lad;
  int inner_folds = 5;
  int lambda_grid = 20;
  double lambda_min_ratio = 1e-3;
  std::uint64_t seed = 0;
};

/// Reduced covariates of every curve for the functional arms.
inline Eigen::MatrixXd functional_design(const Dataset& data, const PipelineConfig& cfg) {
  const Smoother smoother(cfg.curve_basis, cfg.smooth_lambda);
  std::vector<FunctionalSample> samples;
  samples.reserve(data.curves.size());
  for (const auto& c : data.curves) samples.push_back(smoother(c).sample);
  return reduce(samples, cfg.beta_basis).xt;
}

/// Cross-validated metrics of one arm. Smoothing is label-free and done
/// once on all curves; every fit sees only its training split.
inline CvReport cross_validate(const Dataset& data, Arm arm, const PipelineConfig& cfg, int k) {
  if (data.curves.size() != data.labels.size()) {
    throw DimensionError("dataset has " + std::to_string(data.curves.size()) + " curves and " +
                         std::to_string(data.labels.size()) + " labels");
  }
  const Eigen::MatrixXd x =
      arm == Arm::LastValue ? last_value_baseline(data.curves) : functional_design(data, cfg);
  int fold_no = 0;
  return kfold(data.labels, data.num_classes, k, cfg.seed,
               [&](std::span<const int> train, std::span<const int> test) {
                 const Eigen::MatrixXd xtr = detail::take_rows(x, train);
                 const std::vector<int> ytr = detail::take(data.labels, train);
                 FitConfig fc = cfg.fit;
                 fc.lasso_lambda = 0.0;
                 if (arm == Arm::FolrLasso) {
                   const auto sel = select_lambda(xtr, ytr, data.num_classes, fc, cfg.rule,
                                                  cfg.inner_folds, cfg.lambda_grid,
                                                  cfg.lambda_min_ratio, cfg.seed + 1 + fold_no);
                   fc.lasso_lambda = sel.lambda;
                 }
                 ++fold_no;
                 const OrdinalFit fit = fit_ordinal(xtr, ytr, data.num_classes, fc);
                 return detail::predict_rows(fit.model, x, test, cfg.rule);
               });
}

}  // namespace folr
