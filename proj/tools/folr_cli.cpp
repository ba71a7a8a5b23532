// folr: smooth curves, fit and apply functional ordinal models, run
// cross-validation and generate synthetic data.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "folr/folr.hpp"

namespace {

namespace fs = std::filesystem;
using namespace folr;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

double max_time(const std::vector<RawCurve>& curves) {
  double t = 0.0;
  for (const auto& c : curves) {
    if (!c.times.empty()) t = std::max(t, c.times.back());
  }
  if (!(t > 0.0)) throw ValidationError("cannot infer the domain: all times are 0");
  return t;
}

BasisSpec make_basis(const std::string& kind, int size, int order, double domain_end) {
  if (kind == "bspline") return BasisSpec::uniform_bspline(size, order, domain_end);
  return BasisSpec::monomial_up_to(size, domain_end);
}

std::string join_active(const std::vector<int>& active) {
  std::string s = "[";
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(active[i] + 1);
  }
  return s + "]";
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s + "]";
}

// ---------------------------------------------------------------------------

struct SmoothArgs {
  std::string curves, out, basis = "bspline";
  int size = 16;
  int order = 4;
  double lambda = 0.0;
  std::optional<double> domain;
};

int run_smooth(const SmoothArgs& a) {
  const auto curves = load_curves(a.curves);
  if (curves.empty()) throw ValidationError(a.curves + ": no curves");
  const double end = a.domain.value_or(max_time(curves));
  const Smoother smoother(make_basis(a.basis, a.size, a.order, end), a.lambda);
  CoefficientTable table;
  std::cout << "curve_id,residual_rms\n";
  for (const auto& c : curves) {
    const SmoothResult r = smoother(c);
    std::cout << c.id << "," << format_double(r.residual_rms) << (r.jittered ? ",jittered" : "")
              << "\n";
    table.ids.push_back(c.id);
    table.samples.push_back(r.sample);
  }
  save_coefficients(table, a.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string coeffs, labels, out, beta_basis = "bspline";
  std::optional<std::string> curve_basis;
  int beta_size = 10;
  int beta_order = 4;
  std::optional<double> lasso;
  bool no_penalty = false;
  bool standardize = false;
  std::optional<int> num_classes;
  int max_iters = 10000;
  double grad_tol = 1e-6;
  std::uint64_t seed = 0;
};

int run_fit(const FitArgs& a) {
  const auto table = load_coefficients(a.coeffs, a.curve_basis ? std::optional<fs::path>(*a.curve_basis)
                                                               : std::nullopt);
  if (table.samples.empty()) throw ValidationError(a.coeffs + ": no curves");
  const auto labels = join_labels(table.ids, load_labels(a.labels, a.num_classes));
  const int k = resolve_num_classes(labels, a.num_classes);
  const BasisSpec& curve_basis = table.samples.front().basis();
  std::optional<BasisSpec> beta;
  if (a.beta_size > 0) beta = make_basis(a.beta_basis, a.beta_size, a.beta_order, curve_basis.domain_end());

  const ReducedDesign design = reduce(table.samples, beta);
  FitConfig cfg;
  cfg.lasso_lambda = a.lasso.value_or(0.0);
  cfg.max_iters = a.max_iters;
  cfg.grad_tol = a.grad_tol;
  cfg.seed = a.seed;
  cfg.standardize = a.standardize;
  const double lmax = lambda_max(design.xt, labels, k, a.standardize);
  const FittedFolr fit = cfg.lasso_lambda > 0.0 ? fit_lasso(design, labels, k, cfg)
                                                : fit_mle(design, labels, k, cfg);
  const auto& d = fit.diagnostics();
  if (!std::isfinite(d.final_nll)) {
    std::cerr << "error: fitted model has infinite negative log-likelihood\n";
    return kExitNumerical;
  }
  save_model(fit, a.out);

  std::cout << "fit_kind = " << to_string(fit.kind()) << "\n"
            << "lambda = " << format_double(fit.lambda()) << "\n"
            << "lambda_max = " << format_double(lmax) << "\n"
            << "nll = " << format_double(d.final_nll) << "\n"
            << "iterations = " << d.iterations << "\n"
            << "converged = " << (d.converged ? "true" : "false") << "\n"
            << "gradient_norm = " << format_double(d.gradient_norm) << "\n"
            << "tau = " << join_doubles(fit.model().thresholds.values()) << "\n"
            << "active_set = " << join_active(d.active_set) << "\n";
  for (const auto& w : d.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string model, coeffs, out, rule = "lad";
  std::optional<std::string> curve_basis;
};

int run_predict(const PredictArgs& a) {
  const FittedFolr fit = load_model(a.model);
  const auto table = load_coefficients(
      a.coeffs, a.curve_basis ? std::optional<fs::path>(*a.curve_basis) : std::nullopt);
  const DecisionRule rule = a.rule == "mode" ? DecisionRule::Mode : DecisionRule::Lad;
  const int k = fit.num_classes();
  std::string out = "curve_id,predicted_class";
  if (rule == DecisionRule::Mode) {
    for (int j = 1; j <= k; ++j) out += ",p" + std::to_string(j);
  }
  out += "\n";
  for (std::size_t i = 0; i < table.samples.size(); ++i) {
    const Prediction p = predict(fit, table.samples[i], rule);
    out += table.ids[i] + "," + std::to_string(p.cls);
    if (p.distribution) {
      for (double q : p.distribution->probs) out += "," + format_double(q);
    }
    out += "\n";
  }
  atomic_write(a.out, out);
  return 0;
}

// ---------------------------------------------------------------------------

struct CrossvalArgs {
  std::string curves, labels, out_dir;
  std::string arms = "last-value,folr,folr-lasso";
  int k = 10;
  std::string curve_basis = "bspline";
  int curve_size = 16;
  int curve_order = 4;
  double smooth_lambda = 0.0;
  std::string beta_basis = "bspline";
  int beta_size = 10;
  int beta_order = 4;
  std::string rule = "lad";
  int inner_folds = 5;
  int lambda_grid = 20;
  double lambda_min_ratio = 1e-3;
  bool standardize = false;
  std::optional<int> num_classes;
  std::optional<double> domain;
  std::uint64_t seed = 0;
};

std::vector<Arm> parse_arms(const std::string& list) {
  std::vector<Arm> arms;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const Arm arm = parse_arm(name);
    if (std::find(arms.begin(), arms.end(), arm) != arms.end()) {
      throw ConfigError("arm '" + name + "' listed twice");
    }
    arms.push_back(arm);
  }
  if (arms.empty()) throw ConfigError("no arms requested");
  return arms;
}

int run_crossval(const CrossvalArgs& a) {
  const std::vector<Arm> arms = parse_arms(a.arms);
  auto curves = load_curves(a.curves);
  if (curves.empty()) throw ValidationError(a.curves + ": no curves");
  const double end = a.domain.value_or(max_time(curves));
  const auto labels = load_labels(a.labels, a.num_classes);
  const Dataset data = join(std::move(curves), labels, a.num_classes);

  PipelineConfig cfg;
  cfg.curve_basis = make_basis(a.curve_basis, a.curve_size, a.curve_order, end);
  cfg.smooth_lambda = a.smooth_lambda;
  cfg.beta_basis = make_basis(a.beta_basis, a.beta_size, a.beta_order, end);
  cfg.fit.standardize = a.standardize;
  cfg.fit.seed = a.seed;
  cfg.rule = a.rule == "mode" ? DecisionRule::Mode : DecisionRule::Lad;
  cfg.inner_folds = a.inner_folds;
  cfg.lambda_grid = a.lambda_grid;
  cfg.lambda_min_ratio = a.lambda_min_ratio;
  cfg.seed = a.seed;

  std::vector<std::pair<Arm, CvReport>> rows;
  for (Arm arm : arms) rows.emplace_back(arm, cross_validate(data, arm, cfg, a.k));

  fs::create_directories(a.out_dir);
  for (const auto& [arm, report] : rows) {
    atomic_write(fs::path(a.out_dir) / ("cv_" + std::string(to_string(arm)) + ".csv"),
                 render_cv_report(report));
  }
  const std::string summary = render_summary(rows);
  atomic_write(fs::path(a.out_dir) / "summary.csv", summary);
  std::cout << summary;
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string spec, out_curves, out_labels;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& a) {
  SyntheticSpec spec = load_synthetic_spec(a.spec);
  if (a.seed) spec.seed = *a.seed;
  const SimulatedData sim = simulate(spec);
  std::vector<std::string> ids;
  for (const auto& c : sim.curves) ids.push_back(c.id);
  atomic_write(a.out_curves, render_curves(sim.curves));
  atomic_write(a.out_labels, render_labels(ids, sim.labels));
  std::vector<int> counts(spec.num_classes(), 0);
  for (int y : sim.labels) ++counts[y - 1];
  std::cout << "curves = " << sim.curves.size() << "\n";
  for (int j = 0; j < spec.num_classes(); ++j) {
    std::cout << "class " << j + 1 << " = " << counts[j] << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional ordinal logistic regression"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  const auto basis_kinds = CLI::IsMember({"bspline", "monomial"});
  const auto rules = CLI::IsMember({"lad", "mode"});

  SmoothArgs sm;
  auto* smooth_cmd = app.add_subcommand("smooth", "Project raw curves onto a basis");
  smooth_cmd->add_option("--curves", sm.curves, "Curves CSV (curve_id,t,value)")->required();
  smooth_cmd->add_option("--basis", sm.basis, "Basis kind")->check(basis_kinds);
  smooth_cmd->add_option("--size", sm.size, "Number of basis functions")->check(CLI::Range(1, 100000));
  smooth_cmd->add_option("--order", sm.order, "B-spline order (4 = cubic)")->check(CLI::Range(1, 30));
  smooth_cmd->add_option("--lambda", sm.lambda, "Roughness penalty weight")->check(CLI::NonNegativeNumber);
  smooth_cmd->add_option("--domain", sm.domain, "Domain end T (default: largest time)")->check(CLI::PositiveNumber);
  smooth_cmd->add_option("--out", sm.out, "Coefficients CSV")->required();

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a functional ordinal model");
  fit_cmd->add_option("--coeffs", fa.coeffs, "Coefficients CSV from smooth")->required();
  fit_cmd->add_option("--curve-basis", fa.curve_basis, "Curve basis JSON (default: <coeffs>.basis.json)");
  fit_cmd->add_option("--labels", fa.labels, "Labels CSV (curve_id,label)")->required();
  fit_cmd->add_option("--beta-basis", fa.beta_basis, "Basis kind for beta")->check(basis_kinds);
  fit_cmd->add_option("--beta-size", fa.beta_size, "Beta basis size (0 = thresholds only)")->check(CLI::Range(0, 100000));
  fit_cmd->add_option("--beta-order", fa.beta_order, "B-spline order for beta")->check(CLI::Range(1, 30));
  auto* lasso_opt = fit_cmd->add_option("--lasso", fa.lasso, "l1 penalty weight")->check(CLI::PositiveNumber);
  auto* nopen_opt = fit_cmd->add_flag("--no-penalty", fa.no_penalty, "Unpenalized maximum likelihood (default)");
  lasso_opt->excludes(nopen_opt);
  fit_cmd->add_flag("--standardize", fa.standardize, "Standardize reduced covariates while fitting");
  fit_cmd->add_option("--num-classes", fa.num_classes, "K (default: largest label)")->check(CLI::Range(2, 1000));
  fit_cmd->add_option("--max-iters", fa.max_iters, "Iteration limit")->check(CLI::Range(1, 100000000));
  fit_cmd->add_option("--grad-tol", fa.grad_tol, "Convergence tolerance")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fa.seed, "Seed recorded with the model");
  fit_cmd->add_option("--out", fa.out, "Model JSON")->required();

  PredictArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "Predict classes with a saved model");
  predict_cmd->add_option("--model", pa.model, "Model JSON")->required();
  predict_cmd->add_option("--coeffs", pa.coeffs, "Coefficients CSV")->required();
  predict_cmd->add_option("--curve-basis", pa.curve_basis, "Curve basis JSON (default: <coeffs>.basis.json)");
  predict_cmd->add_option("--rule", pa.rule, "Decision rule")->check(rules);
  predict_cmd->add_option("--out", pa.out, "Predictions CSV")->required();

  CrossvalArgs ca;
  auto* cv_cmd = app.add_subcommand("crossval", "Cross-validate the model arms");
  cv_cmd->add_option("--curves", ca.curves, "Curves CSV")->required();
  cv_cmd->add_option("--labels", ca.labels, "Labels CSV")->required();
  cv_cmd->add_option("--k", ca.k, "Number of folds")->check(CLI::Range(2, 100000));
  cv_cmd->add_option("--arms", ca.arms, "Comma-separated arms: last-value,folr,folr-lasso")
      ->check([](const std::string& list) {
        try {
          parse_arms(list);
        } catch (const Error& e) {
          return std::string(e.what());
        }
        return std::string();
      });
  cv_cmd->add_option("--curve-basis", ca.curve_basis, "Basis kind for curves")->check(basis_kinds);
  cv_cmd->add_option("--curve-size", ca.curve_size, "Curve basis size")->check(CLI::Range(1, 100000));
  cv_cmd->add_option("--curve-order", ca.curve_order, "Curve B-spline order")->check(CLI::Range(1, 30));
  cv_cmd->add_option("--smooth-lambda", ca.smooth_lambda, "Roughness penalty weight")->check(CLI::NonNegativeNumber);
  cv_cmd->add_option("--beta-basis", ca.beta_basis, "Basis kind for beta")->check(basis_kinds);
  cv_cmd->add_option("--beta-size", ca.beta_size, "Beta basis size")->check(CLI::Range(1, 100000));
  cv_cmd->add_option("--beta-order", ca.beta_order, "Beta B-spline order")->check(CLI::Range(1, 30));
  cv_cmd->add_option("--rule", ca.rule, "Decision rule")->check(rules);
  cv_cmd->add_option("--inner-folds", ca.inner_folds, "Inner folds for lambda selection")->check(CLI::Range(2, 1000));
  cv_cmd->add_option("--lambda-grid", ca.lambda_grid, "Lambda grid size")->check(CLI::Range(1, 10000));
  cv_cmd->add_option("--lambda-min-ratio", ca.lambda_min_ratio, "Smallest lambda / lambda_max")->check(CLI::Range(1e-12, 1.0));
  cv_cmd->add_flag("--standardize", ca.standardize, "Standardize covariates while fitting");
  cv_cmd->add_option("--num-classes", ca.num_classes, "K (default: largest label)")->check(CLI::Range(2, 1000));
  cv_cmd->add_option("--domain", ca.domain, "Domain end T (default: largest time)")->check(CLI::PositiveNumber);
  cv_cmd->add_option("--seed", ca.seed, "Fold seed");
  cv_cmd->add_option("--out-dir", ca.out_dir, "Directory for cv_<arm>.csv and summary.csv")->required();

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate synthetic curves and labels");
  sim_cmd->add_option("--spec", sa.spec, "Synthetic spec JSON")->required();
  sim_cmd->add_option("--seed", sa.seed, "Override the seed in the simulation file");
  sim_cmd->add_option("--out-curves", sa.out_curves, "Curves CSV")->required();
  sim_cmd->add_option("--out-labels", sa.out_labels, "Labels CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*smooth_cmd) return run_smooth(sm);
    if (*fit_cmd) return run_fit(fa);
    if (*predict_cmd) return run_predict(pa);
    if (*cv_cmd) return run_crossval(ca);
    if (*sim_cmd) return run_simulate(sa);
  } catch (const EstimationError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
