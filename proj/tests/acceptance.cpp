// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "folr/folr.hpp"
#include "oracles.hpp"

using namespace folr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<double> random_thresholds(std::mt19937_64& gen, int k, double spread) {
  std::normal_distribution<double> nd;
  std::vector<double> tau(k - 1);
  tau[0] = spread * nd(gen);
  for (int j = 1; j < k - 1; ++j) tau[j] = tau[j - 1] + 0.05 + spread * std::abs(nd(gen));
  return tau;
}

int draw_class(std::mt19937_64& gen, const std::vector<double>& tau, double g) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  double u = ud(gen);
  while (u <= 0.0) u = ud(gen);
  const double latent = g + std::log(u / (1.0 - u));
  int cls = 1;
  while (cls <= static_cast<int>(tau.size()) && latent > tau[cls - 1]) ++cls;
  return cls;
}

Outcome gradient_correctness() {
  std::mt19937_64 gen(101);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> k_dist(2, 6), m_dist(0, 5);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int k = k_dist(gen);
    const int m = m_dist(gen);
    const int n = 30;
    const std::vector<double> tau = random_thresholds(gen, k, 1.0);
    std::vector<double> b(m);
    for (auto& v : b) v = 0.5 * nd(gen);
    std::vector<std::vector<double>> rows(n, std::vector<double>(m));
    std::vector<int> ys(n);
    Eigen::MatrixXd xs(n, m);
    for (int i = 0; i < n; ++i) {
      double g = 0.0;
      for (int c = 0; c < m; ++c) {
        rows[i][c] = xs(i, c) = nd(gen);
        g += rows[i][c] * b[c];
      }
      ys[i] = draw_class(gen, tau, g);
    }
    const OrdinalModel model(Thresholds(tau),
                             Eigen::Map<const Eigen::VectorXd>(b.data(), m));
    const NllGradient grad = nll_gradient(model, xs, ys);
    std::vector<double> theta(tau);
    theta.insert(theta.end(), b.begin(), b.end());
    const auto fd = oracle::central_gradient(
        [&](const std::vector<double>& p) {
          return oracle::naive_nll({p.begin(), p.begin() + (k - 1)}, {p.begin() + (k - 1), p.end()}, rows, ys);
        },
        theta, 1e-5);
    for (std::size_t c = 0; c < fd.size(); ++c) {
      const double a = c < static_cast<std::size_t>(k - 1) ? grad.tau[c] : grad.b[c - (k - 1)];
      const double rel = std::abs(a - fd[c]) / std::max({1.0, std::abs(a), std::abs(fd[c])});
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 1e-6, "max relative error " + num(worst)};
}

Outcome distribution_validity() {
  std::mt19937_64 gen(102);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> k_dist(2, 8);
  double worst_sum = 0.0;
  int bad = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const int k = k_dist(gen);
    const OrdinalModel model(Thresholds(random_thresholds(gen, k, 3.0)), Eigen::VectorXd());
    const double g = 5.0 * nd(gen);
    const ClassDistribution d = class_probs(model, g);
    double sum = 0.0;
    double prev_cum = 0.0;
    for (double p : d.probs) {
      if (!(p >= 0.0 && p <= 1.0)) ++bad;
      sum += p;
      if (sum < prev_cum) ++bad;
      prev_cum = sum;
    }
    if (static_cast<int>(d.probs.size()) != k) ++bad;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  return {bad == 0 && worst_sum <= 1e-12, "max |sum-1| " + num(worst_sum) + ", violations " + std::to_string(bad)};
}

Outcome lad_optimality() {
  std::mt19937_64 gen(103);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> k_dist(2, 8);
  int agree = 0, total = 0;
  while (total < 10000) {
    const int k = k_dist(gen);
    const std::vector<double> tau = random_thresholds(gen, k, 1.5);
    const double g = 3.0 * nd(gen);
    bool near = false;
    for (double t : tau) near |= std::abs(t - g) < 1e-6;
    if (near) continue;
    ++total;
    const OrdinalModel model{Thresholds(tau), Eigen::VectorXd()};
    const int lad = predict_lad(model, g);
    const CostDecision best = expected_cost_oracle(class_probs(model, g), CostFunction::absolute_difference());
    const double min_cost = best.expected_costs[best.cls - 1];
    agree += best.expected_costs[lad - 1] <= min_cost + 1e-12;
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " in the oracle argmin"};
}

Outcome mode_optimality() {
  std::mt19937_64 gen(104);
  std::exponential_distribution<double> ed(1.0);
  std::uniform_int_distribution<int> k_dist(2, 8);
  int agree = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    ClassDistribution d;
    d.probs.resize(k_dist(gen));
    double s = 0.0;
    for (auto& p : d.probs) s += (p = ed(gen));
    for (auto& p : d.probs) p /= s;
    agree += predict_mode(d) == expected_cost_oracle(d, CostFunction::zero_one()).cls;
  }
  return {agree == 10000, std::to_string(agree) + "/10000 agree"};
}

BasisSpec random_basis(std::mt19937_64& gen, double end) {
  if (gen() % 2) {
    std::uniform_int_distribution<int> order_dist(1, 5);
    const int order = order_dist(gen);
    std::uniform_int_distribution<int> size_dist(order, order + 12);
    return BasisSpec::uniform_bspline(size_dist(gen), order, end);
  }
  std::vector<int> degrees;
  for (int d = 1; d <= 5; ++d) {
    if (gen() % 2) degrees.push_back(d);
  }
  if (degrees.empty()) degrees.push_back(1);
  return BasisSpec::monomial(degrees, end);
}

Outcome reduction_exactness() {
  std::mt19937_64 gen(105);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> end_dist(0.5, 2.0);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const double end = end_dist(gen);
    const BasisSpec psi = random_basis(gen, end);
    const BasisSpec phi = random_basis(gen, end);
    Eigen::VectorXd a(psi.size()), b(phi.size());
    for (auto& v : a) v = nd(gen);
    for (auto& v : b) v = nd(gen);
    const std::vector<FunctionalSample> s = {FunctionalSample(psi, a)};
    const double fast = reduce(s, phi).xt.row(0).dot(b);
    const FunctionalSample beta(phi, b);
    std::vector<double> pts = psi.breakpoints();
    const auto more = phi.breakpoints();
    pts.insert(pts.end(), more.begin(), more.end());
    const double ref = oracle::integrate_pieces([&](double t) { return s[0].value(t) * beta.value(t); }, pts);
    worst = std::max(worst, std::abs(fast - ref));
  }
  return {worst <= 1e-8, "max |a'Rb - integral| " + num(worst)};
}

Outcome parameter_recovery() {
  // Piecewise-constant curve and coefficient bases on [0, 3] have identity
  // Gram matrix, so the reduced covariates are the curve coefficients.
  const auto basis = BasisSpec::uniform_bspline(3, 1, 3.0);
  const std::vector<double> tau = {-1.5, 0.0, 1.2};
  const Eigen::Vector3d b(0.8, -0.6, 0.4);
  std::mt19937_64 gen(106);
  std::normal_distribution<double> nd;
  std::vector<FunctionalSample> samples;
  std::vector<int> ys;
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3d a(nd(gen), nd(gen), nd(gen));
    samples.emplace_back(basis, a);
    ys.push_back(draw_class(gen, tau, a.dot(b)));
  }
  const ReducedDesign design = reduce(samples, basis);
  const FittedFolr fit = fit_mle(design, ys, 4);
  double err = (fit.model().coefficients - b).lpNorm<Eigen::Infinity>();
  for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(fit.model().thresholds[j + 1] - tau[j]));
  const NllGradient g = nll_gradient(fit.model(), design.xt, ys);
  const double gnorm = std::max(g.tau.lpNorm<Eigen::Infinity>(), g.b.lpNorm<Eigen::Infinity>());
  return {err <= 0.15 && gnorm <= 1e-6, "l-inf error " + num(err) + ", gradient " + num(gnorm)};
}

Outcome thresholds_closed_form() {
  std::mt19937_64 gen(107);
  std::uniform_int_distribution<int> k_dist(2, 6), n_dist(50, 500);
  const auto basis = BasisSpec::monomial({1}, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int k = k_dist(gen);
    const int n = n_dist(gen);
    std::uniform_int_distribution<int> cls(1, k);
    std::vector<int> ys(n);
    for (int i = 0; i < n; ++i) ys[i] = i < k ? i + 1 : cls(gen);
    std::vector<FunctionalSample> samples(n, FunctionalSample(basis, Eigen::VectorXd::Zero(1)));
    const FittedFolr fit = fit_mle(reduce(samples, std::nullopt), ys, k);
    for (int j = 1; j < k; ++j) {
      const double freq = static_cast<double>(std::count_if(ys.begin(), ys.end(), [&](int y) { return y <= j; })) / n;
      worst = std::max(worst, std::abs(oracle::sigmoid(fit.model().thresholds[j]) - freq));
    }
  }
  return {worst <= 1e-6, "max |F(tau_j) - cumulative frequency| " + num(worst)};
}

Outcome lasso_endpoints() {
  std::mt19937_64 gen(108);
  std::normal_distribution<double> nd;
  const std::vector<double> tau = {-1.0, 0.5, 1.5};
  const Eigen::VectorXd b = (Eigen::VectorXd(6) << 1.0, -0.7, 0.0, 0.0, 0.4, 0.0).finished();
  const int n = 800;
  Eigen::MatrixXd xs(n, 6);
  std::vector<int> ys(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 6; ++c) xs(i, c) = nd(gen) * (1.0 + c);
    ys[i] = draw_class(gen, tau, xs.row(i).dot(b));
  }
  const double lmax = lambda_max(xs, ys, 4);
  bool zero_ok = true;
  for (double mult : {1.0, 1.5, 10.0}) {
    FitConfig cfg;
    cfg.lasso_lambda = mult * lmax;
    zero_ok &= (fit_ordinal(xs, ys, 4, cfg).model.coefficients.array() == 0.0).all();
  }
  FitConfig tight;
  tight.grad_tol = 1e-9;
  const OrdinalFit mle = fit_ordinal(xs, ys, 4, tight);
  tight.lasso_lambda = 1e-10;
  const OrdinalFit tiny = fit_ordinal(xs, ys, 4, tight);
  double diff = (mle.model.coefficients - tiny.model.coefficients).lpNorm<Eigen::Infinity>();
  for (int j = 1; j <= 3; ++j) {
    diff = std::max(diff, std::abs(mle.model.thresholds[j] - tiny.model.thresholds[j]));
  }
  FitConfig path_cfg;
  path_cfg.grad_tol = 1e-9;
  const auto grid = log_grid(lmax, 1e-3, 20);
  const auto path = lasso_path(xs, ys, 4, path_cfg, grid);
  int increases = 0;
  for (std::size_t g = 1; g < path.size(); ++g) {
    const double prev = path[g - 1].diagnostics.final_nll;
    increases += path[g].diagnostics.final_nll > prev + 1e-9 * std::abs(prev);
  }
  return {zero_ok && diff <= 1e-4 && increases == 0,
          std::string("b=0 at lambda>=lambda_max: ") + (zero_ok ? "yes" : "no") + ", |tiny - mle| " + num(diff) +
              ", path increases " + std::to_string(increases)};
}

Outcome support_recovery() {
  const auto curve_basis = BasisSpec::uniform_bspline(16, 4, 1.0);
  const auto beta_basis = BasisSpec::uniform_bspline(10, 4, 1.0);
  // Only the last cubic B-spline lives inside the final quarter.
  Eigen::VectorXd beta_coef = Eigen::VectorXd::Zero(10);
  beta_coef[9] = 120.0;
  std::vector<int> early;
  for (int m = 0; m < beta_basis.size(); ++m) {
    if (beta_basis.support(m).second <= 0.5) early.push_back(m);
  }
  int clean = 0;
  std::string picks;
  for (int rep = 0; rep < 10; ++rep) {
    const SyntheticSpec spec{Thresholds({-2.0, 0.0, 2.0}), FunctionalSample(beta_basis, beta_coef),
                             CurveGenerator{curve_basis, Eigen::VectorXd(), {}, 1.0}, 300, 0.05,
                             uniform_grid(1.0, 101), 900u + rep};
    const SimulatedData sim = simulate(spec);
    std::vector<FunctionalSample> samples;
    for (const auto& c : sim.curves) samples.push_back(smooth(c, curve_basis, 0.0).sample);
    const ReducedDesign design = reduce(samples, beta_basis);
    FitConfig cfg;
    cfg.seed = rep;
    const LambdaSelection sel = select_lambda(design.xt, sim.labels, 4, cfg, DecisionRule::Lad, 5, 20, 1e-3, rep);
    cfg.lasso_lambda = sel.lambda;
    const FittedFolr fit = fit_folr(design, sim.labels, 4, cfg);
    bool ok = true;
    for (int m : early) ok &= fit.model().coefficients[m] == 0.0;
    clean += ok;
    picks += (rep ? " " : "") + std::to_string(fit.diagnostics().active_set.size());
  }
  return {clean >= 9, std::to_string(clean) + "/10 replicates with no early basis function active (active sizes " +
                          picks + ")"};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + FOLR_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome end_to_end_cv() {
  const fs::path dir = fs::temp_directory_path() / "folr_acceptance_cv";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string data_dir = FOLR_DATA_DIR;
  int code = run_cli("simulate --spec " + data_dir + "/early_signal.json --out-curves " + (dir / "curves.csv").string() +
                         " --out-labels " + (dir / "labels.csv").string(),
                     dir / "simulate.log");
  if (code != 0) return {false, "simulate exited with " + std::to_string(code)};
  code = run_cli("crossval --curves " + (dir / "curves.csv").string() + " --labels " + (dir / "labels.csv").string() +
                     " --k 5 --arms last-value,folr,folr-lasso --seed 11 --out-dir " + (dir / "cv").string(),
                 dir / "crossval.log");
  if (code != 0) return {false, "crossval exited with " + std::to_string(code)};
  std::istringstream in(read_file(dir / "cv" / "summary.csv"));
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> mae;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) return {false, "malformed summary row: " + line};
    mae[std::string(fields[0])] = parse_double(fields[1], "summary");
    ++rows;
  }
  if (rows != 3 || !mae.count("folr") || !mae.count("last-value")) {
    return {false, "summary has " + std::to_string(rows) + " rows"};
  }
  const double gain = 1.0 - mae["folr"] / mae["last-value"];
  return {gain >= 0.2, "3 rows; folr MAE " + num(mae["folr"]) + " vs last-value " + num(mae["last-value"]) +
                           " (" + num(100 * gain) + "% lower), folr-lasso " + num(mae["folr-lasso"])};
}

FittedFolr random_fit(std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> k_dist(2, 6), size_dist(4, 14);
  const double end = 0.5 + std::abs(nd(gen));
  const auto curve_basis = (gen() % 2) ? BasisSpec::uniform_bspline(size_dist(gen), 4, end)
                                       : BasisSpec::monomial({1, 2, 3}, end);
  std::optional<BasisSpec> beta_basis;
  Eigen::VectorXd b(0);
  if (gen() % 5) {
    beta_basis = (gen() % 2) ? BasisSpec::uniform_bspline(size_dist(gen), 3, end) : BasisSpec::monomial({1, 2}, end);
    b.resize(beta_basis->size());
    for (auto& v : b) v = (gen() % 3 == 0) ? 0.0 : nd(gen);
  }
  FitDiagnostics diag;
  diag.final_nll = std::abs(nd(gen)) * 500;
  diag.iterations = static_cast<int>(gen() % 5000);
  diag.converged = true;
  diag.gradient_norm = std::abs(nd(gen)) * 1e-7;
  for (Eigen::Index c = 0; c < b.size(); ++c) {
    if (b[c] != 0.0) diag.active_set.push_back(static_cast<int>(c));
  }
  const bool lasso = gen() % 2;
  return FittedFolr(OrdinalModel(Thresholds(random_thresholds(gen, k_dist(gen), 1.0)), b), curve_basis,
                    beta_basis, lasso ? FitKind::Lasso : FitKind::Mle, lasso ? std::abs(nd(gen)) : 0.0, gen(),
                    gen() % 2, diag);
}

Outcome persistence_round_trip() {
  const fs::path dir = fs::temp_directory_path() / "folr_acceptance_models";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::mt19937_64 gen(111);
  std::normal_distribution<double> nd;
  int mismatched_predictions = 0, mismatched_bytes = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const FittedFolr fit = random_fit(gen);
    const fs::path file = dir / ("m" + std::to_string(rep) + ".json");
    save_model(fit, file);
    const FittedFolr back = load_model(file);
    mismatched_bytes += render_model(back) != read_file(file);
    for (int s = 0; s < 100; ++s) {
      Eigen::VectorXd a(fit.curve_basis().size());
      for (auto& v : a) v = nd(gen);
      const FunctionalSample x(fit.curve_basis(), a);
      const Prediction p0 = predict(fit, x, DecisionRule::Mode);
      const Prediction p1 = predict(back, x, DecisionRule::Mode);
      const bool same = p0.cls == p1.cls && p0.score == p1.score && p0.distribution->probs == p1.distribution->probs &&
                        predict(fit, x, DecisionRule::Lad).cls == predict(back, x, DecisionRule::Lad).cls;
      mismatched_predictions += !same;
    }
  }
  return {mismatched_predictions == 0 && mismatched_bytes == 0,
          std::to_string(mismatched_predictions) + " differing predictions, " + std::to_string(mismatched_bytes) +
              " differing re-renders"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "gradient matches central differences", 5, gradient_correctness},
      {2, "class distributions are valid", 1, distribution_validity},
      {3, "LAD rule minimizes expected absolute error", 5, lad_optimality},
      {4, "mode rule minimizes expected 0-1 loss", 1, mode_optimality},
      {5, "reduced covariates equal the integral", 10, reduction_exactness},
      {6, "MLE recovers parameters", 60, parameter_recovery},
      {7, "thresholds-only fit matches class frequencies", 5, thresholds_closed_form},
      {8, "lasso path endpoints and monotone likelihood", 60, lasso_endpoints},
      {9, "lasso ignores the early half of the domain", 120, support_recovery},
      {10, "simulate and crossval end to end", 120, end_to_end_cv},
      {11, "model files round-trip", 5, persistence_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = out.ok && in_time;
    failures += !pass;
    std::printf("%s [%d] %s: %s (%.2f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.detail.c_str(), secs, c.limit_seconds, in_time ? "" : ", over time");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
