#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "folr/persist.hpp"

using namespace folr;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("folr_persist_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

FittedFolr random_fit(std::mt19937_64& gen, bool thresholds_only = false) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> k_dist(2, 6);
  const int k = k_dist(gen);
  std::vector<double> tau(k - 1);
  tau[0] = nd(gen);
  for (int j = 1; j < k - 1; ++j) tau[j] = tau[j - 1] + std::abs(nd(gen)) + 1e-3;
  const auto curve_basis = (gen() % 2) ? BasisSpec::uniform_bspline(12, 4, 2.5)
                                       : BasisSpec::monomial({1, 2, 3}, 2.5);
  std::optional<BasisSpec> beta_basis;
  Eigen::VectorXd b(0);
  if (!thresholds_only) {
    beta_basis = (gen() % 2) ? BasisSpec::uniform_bspline(6, 3, 2.5) : BasisSpec::monomial({1, 2}, 2.5);
    b.resize(beta_basis->size());
    for (auto& v : b) v = (gen() % 3 == 0) ? 0.0 : nd(gen) / 3.0;
  }
  FitDiagnostics diag;
  diag.final_nll = std::abs(nd(gen)) * 100;
  diag.iterations = static_cast<int>(gen() % 1000);
  diag.converged = gen() % 2;
  diag.gradient_norm = std::abs(nd(gen)) * 1e-7;
  for (Eigen::Index c = 0; c < b.size(); ++c) {
    if (b[c] != 0.0) diag.active_set.push_back(static_cast<int>(c));
  }
  if (!diag.converged) diag.warnings.push_back("did not converge in 10 iterations");
  return FittedFolr(OrdinalModel(Thresholds(tau), b), curve_basis, beta_basis,
                    gen() % 2 ? FitKind::Lasso : FitKind::Mle, std::abs(nd(gen)) * 0.01, gen(),
                    gen() % 2, diag);
}

std::string hand_model(const std::string& tau, int version = 1) {
  return R"({
  "format_version": )" + std::to_string(version) + R"(,
  "curve_basis": {"kind": "monomial", "degrees": [1, 2], "domain_end": 1},
  "beta_basis": {"kind": "monomial", "degrees": [1], "domain_end": 1},
  "tau": )" + tau + R"(,
  "b": [0.5],
  "metadata": {"fit_kind": "mle", "lambda": 0, "seed": 3, "standardized": false,
    "diagnostics": {"final_nll": 1.5, "iterations": 4, "converged": true,
                    "gradient_norm": 1e-7, "active_set": [0], "warnings": []}}
}
)";
}

}  // namespace

TEST(Numbers, ShortestRoundTrip) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 10000) {
    const std::uint64_t raw = bits(gen);
    double v;
    std::memcpy(&v, &raw, sizeof v);
    if (!std::isfinite(v)) continue;
    ++checked;
    EXPECT_EQ(parse_double(format_double(v), "x"), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-10), "1e-10");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_THROW(parse_double("1,5", "field"), ParseError);
  EXPECT_THROW(parse_double("", "field"), ParseError);
  EXPECT_THROW(parse_double("nan", "field"), ParseError);
}

TEST(BasisJson, RoundTripAndShorthand) {
  for (const auto& b : {BasisSpec::uniform_bspline(16, 4, 3.0), BasisSpec::monomial({1, 3}, 2.0),
                        BasisSpec::bspline(2, {0, 0, 0.1, 0.7, 1, 1})}) {
    EXPECT_EQ(parse_basis(render_basis(b)), b);
  }
  EXPECT_EQ(parse_basis(R"({"kind":"bspline","size":10,"order":4,"domain_end":2})"),
            BasisSpec::uniform_bspline(10, 4, 2.0));
  EXPECT_EQ(parse_basis(R"({"kind":"monomial","size":3,"domain_end":1})"),
            BasisSpec::monomial({1, 2, 3}, 1.0));
  EXPECT_THROW(parse_basis(R"({"kind":"fourier","size":3})"), ParseError);
  EXPECT_THROW(parse_basis(R"({"kind":"monomial","degrees":[0,1],"domain_end":1})"), ValidationError);
  EXPECT_THROW(parse_basis(R"({"kind":"bspline","order":4})"), ParseError);
}

TEST(ModelFile, RoundTripIsExact) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 30; ++rep) {
    const FittedFolr fit = random_fit(gen, rep % 7 == 0);
    const std::string text = render_model(fit);
    const FittedFolr back = parse_model(text);
    EXPECT_EQ(render_model(back), text);
    EXPECT_EQ(back.model().thresholds, fit.model().thresholds);
    EXPECT_EQ(back.model().coefficients, fit.model().coefficients);
    EXPECT_EQ(back.curve_basis(), fit.curve_basis());
    EXPECT_EQ(back.beta_basis().has_value(), fit.beta_basis().has_value());
    EXPECT_EQ(back.kind(), fit.kind());
    EXPECT_EQ(back.lambda(), fit.lambda());
    EXPECT_EQ(back.seed(), fit.seed());
    EXPECT_EQ(back.standardized(), fit.standardized());
    EXPECT_EQ(back.diagnostics().final_nll, fit.diagnostics().final_nll);
    EXPECT_EQ(back.diagnostics().iterations, fit.diagnostics().iterations);
    EXPECT_EQ(back.diagnostics().active_set, fit.diagnostics().active_set);
    EXPECT_EQ(back.diagnostics().warnings, fit.diagnostics().warnings);
    for (int s = 0; s < 100; ++s) {
      Eigen::VectorXd a(fit.curve_basis().size());
      for (auto& v : a) v = nd(gen);
      const FunctionalSample x(fit.curve_basis(), a);
      EXPECT_EQ(predict(back, x, DecisionRule::Lad).cls, predict(fit, x, DecisionRule::Lad).cls);
      EXPECT_EQ(predict(back, x, DecisionRule::Mode).distribution->probs,
                predict(fit, x, DecisionRule::Mode).distribution->probs);
    }
  }
}

TEST(ModelFile, SaveLoadThroughDisk) {
  std::mt19937_64 gen(3);
  const fs::path dir = scratch_dir("model");
  const FittedFolr fit = random_fit(gen);
  save_model(fit, dir / "m.json");
  EXPECT_FALSE(fs::exists(dir / "m.json.tmp"));
  EXPECT_EQ(render_model(load_model(dir / "m.json")), render_model(fit));
  EXPECT_THROW(load_model(dir / "missing.json"), ParseError);
}

TEST(ModelFile, ValidationAndVersionErrors) {
  EXPECT_NO_THROW(parse_model(hand_model("[0, 1]")));
  try {
    parse_model(hand_model("[1, 0]"));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("thresholds not increasing"), std::string::npos);
  }
  EXPECT_THROW(parse_model(hand_model("[0, 1]", 999)), UnsupportedVersionError);
  std::string wrong_b = hand_model("[0, 1]");
  wrong_b.replace(wrong_b.find("\"b\": [0.5]"), 10, "\"b\": [0.5, 1]");
  EXPECT_THROW(parse_model(wrong_b), ValidationError);
}

TEST(ModelFile, ParseErrorsCarryContext) {
  std::string broken = hand_model("[0, 1]");
  broken.replace(broken.find("\"b\": [0.5]"), 10, "\"b\": [0.5,,]");
  try {
    parse_model(broken, "m.json");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("m.json:6"), std::string::npos) << e.what();
  }
  std::string missing = hand_model("[0, 1]");
  missing.replace(missing.find("\"iterations\": 4, "), 17, "");
  try {
    parse_model(missing, "m.json");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("diagnostics: missing field 'iterations'"), std::string::npos)
        << e.what();
  }
}

TEST(Curves, GroupsSortsAndValidates) {
  const auto one = parse_curves("curve_id,t,value\na,0,1\na,1,2\n");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].times.size(), 2u);
  const auto sorted = parse_curves("curve_id,t,value\r\nb,0.5,5\r\na,1,1\r\nb,0,3\r\nb,1,4\r\na,0,0\r\n");
  ASSERT_EQ(sorted.size(), 2u);
  EXPECT_EQ(sorted[0].id, "b");
  EXPECT_EQ(sorted[0].times, (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(sorted[0].values, (std::vector<double>{3, 5, 4}));
  EXPECT_EQ(sorted[1].id, "a");
  EXPECT_THROW(parse_curves("curve_id,t,value\na,0,1\na,0,2\n"), FormatError);
  EXPECT_THROW(parse_curves("id,t,value\na,0,1\n"), ParseError);
  try {
    parse_curves("curve_id,t,value\na,0,1\na,x,2\n", "c.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("c.csv:3"), std::string::npos);
  }
  EXPECT_THROW(parse_curves("curve_id,t,value\na,0\n"), ParseError);
}

TEST(Curves, RenderRoundTrip) {
  const std::vector<RawCurve> curves = {{"x", {0, 0.1, 1}, {1.25, -3e-9, 7}}, {"y", {0, 1}, {0, 0}}};
  const std::string text = render_curves(curves);
  const auto back = parse_curves(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].values, curves[0].values);
  EXPECT_EQ(render_curves(back), text);
}

TEST(Labels, RangeAndDuplicates) {
  const auto ok = parse_labels("curve_id,label\na,1\nb,4\n", 4);
  ASSERT_EQ(ok.size(), 2u);
  EXPECT_EQ(ok[1].label, 4);
  EXPECT_THROW(parse_labels("curve_id,label\na,0\n", 4), RangeError);
  EXPECT_THROW(parse_labels("curve_id,label\na,5\n", 4), RangeError);
  EXPECT_THROW(parse_labels("curve_id,label\na,1\na,2\n"), FormatError);
  EXPECT_THROW(parse_labels("curve_id,label\na,1.5\n"), ParseError);
}

TEST(Join, ListsOffenders) {
  const std::vector<RawCurve> curves = {{"a", {0, 1}, {0, 1}}, {"b", {0, 1}, {0, 1}}};
  const std::vector<LabeledId> labels = {{"a", 1}, {"c", 2}};
  try {
    join(curves, labels);
    FAIL();
  } catch (const JoinError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("curves without a label: b"), std::string::npos) << msg;
    EXPECT_NE(msg.find("labels without a curve: c"), std::string::npos) << msg;
  }
  const Dataset d = join(curves, std::vector<LabeledId>{{"b", 3}, {"a", 1}});
  EXPECT_EQ(d.labels, (std::vector<int>{1, 3}));
  EXPECT_EQ(d.num_classes, 3);
  EXPECT_THROW(join(curves, std::vector<LabeledId>{{"b", 3}, {"a", 1}}, 2), RangeError);
}

TEST(Coefficients, RoundTripWithSidecar) {
  const fs::path dir = scratch_dir("coef");
  const auto basis = BasisSpec::uniform_bspline(5, 3, 2.0);
  CoefficientTable t;
  t.ids = {"p", "q"};
  t.samples.emplace_back(basis, Eigen::VectorXd::LinSpaced(5, -1, 1));
  t.samples.emplace_back(basis, Eigen::VectorXd::Constant(5, 1.0 / 3.0));
  save_coefficients(t, dir / "c.csv");
  EXPECT_TRUE(fs::exists(dir / "c.csv.basis.json"));
  const auto back = load_coefficients(dir / "c.csv");
  EXPECT_EQ(back.ids, t.ids);
  EXPECT_EQ(back.samples[1].coefficients(), t.samples[1].coefficients());
  EXPECT_EQ(back.samples[0].basis(), basis);
  EXPECT_EQ(render_coefficients(back), render_coefficients(t));
  EXPECT_THROW(parse_coefficients("curve_id,c1,c2\na,1,2\n", basis), ParseError);
}

TEST(Reports, CvAndSummaryLayout) {
  const CvReport r = summarize({{0.5, 0.25}, {1.0, 0.5}});
  EXPECT_EQ(render_cv_report(r), "fold,mae,accuracy_error\n1,0.5,0.25\n2,1,0.5\nmean,0.75,0.375\n");
  const std::vector<std::pair<Arm, CvReport>> rows = {{Arm::LastValue, r}, {Arm::Folr, r}};
  EXPECT_EQ(render_summary(rows), "arm,mean_mae,mean_error_rate\nlast-value,0.75,0.375\nfolr,0.75,0.375\n");
}

TEST(SyntheticSpecFile, ParsesAllForms) {
  const std::string text = R"({
    "n_curves": 12, "seed": 4, "noise_sd": 0.1, "tau": [-1, 1],
    "beta": {"basis": {"kind": "monomial", "size": 2, "domain_end": 2},
             "coefficients": [1, -1]},
    "curves": {"basis": {"kind": "bspline", "size": 6, "order": 4, "domain_end": 2},
               "coefficient_sd": 0.5, "mean": [0, 0, 0, 0, 0, 1],
               "class_means": [[0, 0, 0, 0, 0, 0], [1, 1, 1, 1, 1, 1]]},
    "sampling_times": {"points": 21}
  })";
  const SyntheticSpec s = parse_synthetic_spec(text);
  EXPECT_EQ(s.n_curves, 12);
  EXPECT_EQ(s.num_classes(), 3);
  EXPECT_EQ(s.sampling_times.size(), 21u);
  EXPECT_EQ(s.sampling_times.back(), 2.0);
  EXPECT_EQ(s.curves.class_means.size(), 2u);
  EXPECT_EQ(simulate(s).curves.size(), 12u);
  std::string bad = text;
  bad.replace(bad.find("[-1, 1]"), 7, "[1, -1]");
  EXPECT_THROW(parse_synthetic_spec(bad), ValidationError);
  EXPECT_THROW(parse_synthetic_spec("{\"n_curves\": 3}"), ParseError);
}

TEST(AtomicWrite, NoPartialOutput) {
  const fs::path dir = scratch_dir("atomic");
  atomic_write(dir / "a.txt", "hello\n");
  EXPECT_EQ(read_file(dir / "a.txt"), "hello\n");
  atomic_write(dir / "a.txt", "bye\n");
  EXPECT_EQ(read_file(dir / "a.txt"), "bye\n");
  EXPECT_THROW(atomic_write(dir / "nope" / "b.txt", "x"), ParseError);
  EXPECT_FALSE(fs::exists(dir / "nope"));
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
}
