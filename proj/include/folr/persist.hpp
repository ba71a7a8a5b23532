#pragma once

// File formats.
//
//   curves CSV        curve_id,t,value          (long format, one row per observation)
//   labels CSV        curve_id,label            (labels 1..K)
//   coefficients CSV  curve_id,c1,...,cM        (+ <path>.basis.json sidecar)
//   model JSON        format_version 1, see render_model()
//   CV report CSV     fold,mae,accuracy_error   (last row: mean)
//   summary CSV       arm,mean_mae,mean_error_rate
//
// Reals are written in shortest round-trip decimal form, independent of the
// C locale, so every render is byte-for-byte deterministic.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "folr/basis.hpp"
#include "folr/error.hpp"
#include "folr/eval.hpp"
#include "folr/fit.hpp"
#include "folr/ordinal.hpp"

namespace folr {

inline constexpr int kModelFormatVersion = 1;

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Text helpers

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(where + ": expected a number, got '" + std::string(text) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(where + ": number is not finite");
  return v;
}

inline int parse_int(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(where + ": expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a temporary sibling and renames it over `path`, so a failed
/// write never leaves partial output behind.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw ParseError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ParseError("cannot move output into place at '" + path.string() + "'");
  }
}

// Non-empty lines with their 1-based line numbers; strips '\r' and a BOM.
inline std::vector<std::pair<int, std::string_view>> csv_lines(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::pair<int, std::string_view>> lines;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    if (!line.empty()) lines.emplace_back(number, line);
    start = end + 1;
  }
  return lines;
}

inline void expect_header(const std::vector<std::pair<int, std::string_view>>& lines,
                          std::string_view header, const std::string& source) {
  if (lines.empty()) throw ParseError(source + ": empty file, expected header '" +
                                      std::string(header) + "'");
  if (lines.front().second != header) {
    throw ParseError(source + ":" + std::to_string(lines.front().first) + ": expected header '" +
                     std::string(header) + "', got '" + std::string(lines.front().second) + "'");
  }
}

// ---------------------------------------------------------------------------
// Bases

inline Json basis_to_json(const BasisSpec& b) {
  Json j;
  j["kind"] = to_string(b.kind());
  if (b.kind() == BasisKind::BSpline) {
    j["order"] = b.order();
    j["knots"] = b.knots();
  } else {
    j["degrees"] = b.degrees();
    j["domain_end"] = b.domain_end();
  }
  return j;
}

namespace detail {

inline const Json& field(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

inline double json_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(where + ": number is not finite");
  return d;
}

inline int json_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<int>();
}

inline std::vector<double> json_doubles(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(json_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline std::vector<int> json_ints(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(json_int(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n');
    throw ParseError(source + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
}

template <typename Fn>
auto validated(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

}  // namespace detail

/// Accepts the full form written by basis_to_json, and the shorthand
/// {"kind": "bspline", "size": M, "order": p, "domain_end": T} (uniform
/// knots) or {"kind": "monomial", "size": M, "domain_end": T} (degrees 1..M).
inline BasisSpec basis_from_json(const Json& j, const std::string& where) {
  const Json& kind = detail::field(j, "kind", where);
  if (!kind.is_string()) throw ParseError(where + ".kind: expected a string");
  const std::string k = kind.get<std::string>();
  return detail::validated(where, [&] {
    if (k == "bspline") {
      const int order = detail::json_int(detail::field(j, "order", where), where + ".order");
      if (j.contains("knots")) {
        return BasisSpec::bspline(order, detail::json_doubles(j["knots"], where + ".knots"));
      }
      const int size = detail::json_int(detail::field(j, "size", where), where + ".size");
      const double end =
          detail::json_number(detail::field(j, "domain_end", where), where + ".domain_end");
      return BasisSpec::uniform_bspline(size, order, end);
    }
    if (k == "monomial") {
      const double end =
          detail::json_number(detail::field(j, "domain_end", where), where + ".domain_end");
      if (j.contains("degrees")) {
        return BasisSpec::monomial(detail::json_ints(j["degrees"], where + ".degrees"), end);
      }
      const int size = detail::json_int(detail::field(j, "size", where), where + ".size");
      return BasisSpec::monomial_up_to(size, end);
    }
    throw ParseError(where + ".kind: unknown basis kind '" + k + "'");
  });
}

inline std::string render_basis(const BasisSpec& b) { return basis_to_json(b).dump(2) + "\n"; }

inline BasisSpec parse_basis(std::string_view text, const std::string& source = "basis") {
  return basis_from_json(detail::parse_json(text, source), source);
}

inline BasisSpec load_basis(const std::filesystem::path& path) {
  return parse_basis(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Models

inline std::string render_model(const FittedFolr& fit) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  j["curve_basis"] = basis_to_json(fit.curve_basis());
  j["beta_basis"] = fit.beta_basis() ? basis_to_json(*fit.beta_basis()) : Json(nullptr);
  j["tau"] = fit.model().thresholds.values();
  const auto& b = fit.model().coefficients;
  j["b"] = std::vector<double>(b.data(), b.data() + b.size());
  const auto& d = fit.diagnostics();
  Json diag;
  diag["final_nll"] = std::isfinite(d.final_nll) ? Json(d.final_nll) : Json(nullptr);
  diag["iterations"] = d.iterations;
  diag["converged"] = d.converged;
  diag["gradient_norm"] = std::isfinite(d.gradient_norm) ? Json(d.gradient_norm) : Json(nullptr);
  diag["active_set"] = d.active_set;
  diag["warnings"] = d.warnings;
  Json meta;
  meta["fit_kind"] = to_string(fit.kind());
  meta["lambda"] = fit.lambda();
  meta["seed"] = fit.seed();
  meta["standardized"] = fit.standardized();
  meta["diagnostics"] = std::move(diag);
  j["metadata"] = std::move(meta);
  return j.dump(2) + "\n";
}

/// Parses and validates a model. Thresholds must increase and the
/// coefficient count must match the beta basis.
inline FittedFolr parse_model(std::string_view text, const std::string& source = "model") {
  const Json j = detail::parse_json(text, source);
  if (!j.is_object()) throw ParseError(source + ": expected a JSON object");
  const int version =
      detail::json_int(detail::field(j, "format_version", source), source + ".format_version");
  if (version != kModelFormatVersion) {
    throw UnsupportedVersionError(source + ": unsupported model format version " +
                                  std::to_string(version) + " (supported: " +
                                  std::to_string(kModelFormatVersion) + ")");
  }
  const BasisSpec curve_basis =
      basis_from_json(detail::field(j, "curve_basis", source), source + ".curve_basis");
  const Json& bb = detail::field(j, "beta_basis", source);
  std::optional<BasisSpec> beta_basis;
  if (!bb.is_null()) beta_basis = basis_from_json(bb, source + ".beta_basis");
  const std::vector<double> tau =
      detail::json_doubles(detail::field(j, "tau", source), source + ".tau");
  const std::vector<double> b = detail::json_doubles(detail::field(j, "b", source), source + ".b");

  const Json& meta = detail::field(j, "metadata", source);
  const std::string mwhere = source + ".metadata";
  const Json& kind_j = detail::field(meta, "fit_kind", mwhere);
  if (!kind_j.is_string()) throw ParseError(mwhere + ".fit_kind: expected a string");
  const std::string kind_s = kind_j.get<std::string>();
  FitKind kind;
  if (kind_s == "mle") {
    kind = FitKind::Mle;
  } else if (kind_s == "lasso") {
    kind = FitKind::Lasso;
  } else {
    throw ParseError(mwhere + ".fit_kind: unknown fit kind '" + kind_s + "'");
  }
  const double lambda = detail::json_number(detail::field(meta, "lambda", mwhere), mwhere + ".lambda");
  const Json& seed_j = detail::field(meta, "seed", mwhere);
  if (!seed_j.is_number_unsigned() && !seed_j.is_number_integer()) {
    throw ParseError(mwhere + ".seed: expected an integer");
  }
  const auto seed = seed_j.get<std::uint64_t>();
  const Json& std_j = detail::field(meta, "standardized", mwhere);
  if (!std_j.is_boolean()) throw ParseError(mwhere + ".standardized: expected a boolean");

  const Json& dj = detail::field(meta, "diagnostics", mwhere);
  const std::string dwhere = mwhere + ".diagnostics";
  FitDiagnostics diag;
  const Json& nll = detail::field(dj, "final_nll", dwhere);
  diag.final_nll = nll.is_null() ? std::numeric_limits<double>::infinity()
                                 : detail::json_number(nll, dwhere + ".final_nll");
  diag.iterations = detail::json_int(detail::field(dj, "iterations", dwhere), dwhere + ".iterations");
  const Json& conv = detail::field(dj, "converged", dwhere);
  if (!conv.is_boolean()) throw ParseError(dwhere + ".converged: expected a boolean");
  diag.converged = conv.get<bool>();
  const Json& gn = detail::field(dj, "gradient_norm", dwhere);
  diag.gradient_norm = gn.is_null() ? std::numeric_limits<double>::infinity()
                                    : detail::json_number(gn, dwhere + ".gradient_norm");
  diag.active_set = detail::json_ints(detail::field(dj, "active_set", dwhere), dwhere + ".active_set");
  const Json& warnings = detail::field(dj, "warnings", dwhere);
  if (!warnings.is_array()) throw ParseError(dwhere + ".warnings: expected an array");
  for (const auto& w : warnings) {
    if (!w.is_string()) throw ParseError(dwhere + ".warnings: expected strings");
    diag.warnings.push_back(w.get<std::string>());
  }

  return detail::validated(source, [&] {
    Eigen::VectorXd coef = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    return FittedFolr(OrdinalModel(Thresholds(tau), std::move(coef)), curve_basis, beta_basis, kind,
                      lambda, seed, std_j.get<bool>(), diag);
  });
}

inline void save_model(const FittedFolr& fit, const std::filesystem::path& path) {
  atomic_write(path, render_model(fit));
}

inline FittedFolr load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Curves and labels

/// Rows grouped by curve_id in order of first appearance; times are sorted.
inline std::vector<RawCurve> parse_curves(std::string_view text, const std::string& source = "curves") {
  const auto lines = csv_lines(text);
  expect_header(lines, "curve_id,t,value", source);
  std::vector<RawCurve> curves;
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto [number, line] = lines[l];
    const std::string where = source + ":" + std::to_string(number);
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw ParseError(where + ": expected 3 fields (curve_id,t,value), got " +
                       std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(where + ": empty curve_id");
    const double t = parse_double(fields[1], where + " field t");
    const double v = parse_double(fields[2], where + " field value");
    auto it = index.find(fields[0]);
    if (it == index.end()) {
      it = index.emplace(std::string(fields[0]), curves.size()).first;
      curves.push_back(RawCurve{std::string(fields[0]), {}, {}});
    }
    curves[it->second].times.push_back(t);
    curves[it->second].values.push_back(v);
  }
  for (auto& c : curves) {
    std::vector<std::size_t> order(c.times.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return c.times[a] < c.times[b]; });
    RawCurve sorted{c.id, {}, {}};
    for (std::size_t i : order) {
      if (!sorted.times.empty() && sorted.times.back() == c.times[i]) {
        throw FormatError(source + ": duplicate row for curve '" + c.id + "' at t = " +
                          format_double(c.times[i]));
      }
      sorted.times.push_back(c.times[i]);
      sorted.values.push_back(c.values[i]);
    }
    c = std::move(sorted);
  }
  return curves;
}

inline std::vector<RawCurve> load_curves(const std::filesystem::path& path) {
  return parse_curves(read_file(path), path.string());
}

inline std::string render_curves(std::span<const RawCurve> curves) {
  std::string out = "curve_id,t,value\n";
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.times.size(); ++k) {
      out += c.id + "," + format_double(c.times[k]) + "," + format_double(c.values[k]) + "\n";
    }
  }
  return out;
}

struct LabeledId {
  std::string id;
  int label = 1;
};

/// With num_classes set, labels must lie in 1..K; otherwise only >= 1.
inline std::vector<LabeledId> parse_labels(std::string_view text,
                                           std::optional<int> num_classes = std::nullopt,
                                           const std::string& source = "labels") {
  const auto lines = csv_lines(text);
  expect_header(lines, "curve_id,label", source);
  std::vector<LabeledId> out;
  std::set<std::string, std::less<>> seen;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto [number, line] = lines[l];
    const std::string where = source + ":" + std::to_string(number);
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) {
      throw ParseError(where + ": expected 2 fields (curve_id,label), got " +
                       std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(where + ": empty curve_id");
    const int label = parse_int(fields[1], where + " field label");
    if (label < 1 || (num_classes && label > *num_classes)) {
      throw RangeError(where + ": label " + std::to_string(label) + " outside 1.." +
                       (num_classes ? std::to_string(*num_classes) : std::string("K")));
    }
    if (!seen.emplace(fields[0]).second) {
      throw FormatError(where + ": duplicate label for curve '" + std::string(fields[0]) + "'");
    }
    out.push_back(LabeledId{std::string(fields[0]), label});
  }
  return out;
}

inline std::vector<LabeledId> load_labels(const std::filesystem::path& path,
                                          std::optional<int> num_classes = std::nullopt) {
  return parse_labels(read_file(path), num_classes, path.string());
}

inline std::string render_labels(std::span<const std::string> ids, std::span<const int> labels) {
  if (ids.size() != labels.size()) throw DimensionError("ids and labels differ in length");
  std::string out = "curve_id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out += ids[i] + "," + std::to_string(labels[i]) + "\n";
  return out;
}

namespace detail {

inline std::string list_ids(const std::vector<std::string>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ", ";
    if (i == 20) {
      s += "... (" + std::to_string(ids.size()) + " total)";
      break;
    }
    s += ids[i];
  }
  return s;
}

}  // namespace detail

/// Labels in the order of `ids`. Every id needs a label and every label an
/// id; offenders on either side are listed in the error.
inline std::vector<int> join_labels(std::span<const std::string> ids,
                                    std::span<const LabeledId> labels) {
  std::map<std::string, int, std::less<>> by_id;
  for (const auto& l : labels) by_id.emplace(l.id, l.label);
  std::set<std::string, std::less<>> known(ids.begin(), ids.end());
  std::vector<std::string> unlabeled, orphan;
  for (const auto& id : ids) {
    if (!by_id.count(id)) unlabeled.push_back(id);
  }
  for (const auto& l : labels) {
    if (!known.count(l.id)) orphan.push_back(l.id);
  }
  if (!unlabeled.empty() || !orphan.empty()) {
    std::string msg = "curve/label join failed:";
    if (!unlabeled.empty()) msg += " curves without a label: " + detail::list_ids(unlabeled) + ";";
    if (!orphan.empty()) msg += " labels without a curve: " + detail::list_ids(orphan) + ";";
    throw JoinError(msg);
  }
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(by_id.find(id)->second);
  return out;
}

/// K given explicitly or, by default, the largest label.
inline int resolve_num_classes(std::span<const int> labels, std::optional<int> num_classes) {
  int max_label = 1;
  for (int y : labels) max_label = std::max(max_label, y);
  const int k = num_classes.value_or(max_label);
  if (k < 2) throw ValidationError("need at least 2 classes");
  for (int y : labels) {
    if (y < 1 || y > k) {
      throw RangeError("label " + std::to_string(y) + " outside 1.." + std::to_string(k));
    }
  }
  return k;
}

/// Pairs curves with labels by id, in curve order.
inline Dataset join(std::vector<RawCurve> curves, std::span<const LabeledId> labels,
                    std::optional<int> num_classes = std::nullopt) {
  std::vector<std::string> ids;
  ids.reserve(curves.size());
  for (const auto& c : curves) ids.push_back(c.id);
  Dataset d;
  d.labels = join_labels(ids, labels);
  d.num_classes = resolve_num_classes(d.labels, num_classes);
  d.curves = std::move(curves);
  return d;
}

// ---------------------------------------------------------------------------
// Coefficients

struct CoefficientTable {
  std::vector<std::string> ids;
  std::vector<FunctionalSample> samples;
};

inline std::filesystem::path basis_sidecar(const std::filesystem::path& coeffs) {
  std::filesystem::path p = coeffs;
  p += ".basis.json";
  return p;
}

inline std::string render_coefficients(const CoefficientTable& table) {
  if (table.samples.empty()) return "curve_id\n";
  const int m = table.samples.front().basis().size();
  std::string out = "curve_id";
  for (int c = 1; c <= m; ++c) out += ",c" + std::to_string(c);
  out += "\n";
  for (std::size_t i = 0; i < table.samples.size(); ++i) {
    out += table.ids[i];
    const auto& a = table.samples[i].coefficients();
    for (int c = 0; c < m; ++c) out += "," + format_double(a[c]);
    out += "\n";
  }
  return out;
}

inline CoefficientTable parse_coefficients(std::string_view text, const BasisSpec& basis,
                                           const std::string& source = "coefficients") {
  const auto lines = csv_lines(text);
  std::string header = "curve_id";
  for (int c = 1; c <= basis.size(); ++c) header += ",c" + std::to_string(c);
  expect_header(lines, header, source);
  CoefficientTable t;
  std::set<std::string, std::less<>> seen;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto [number, line] = lines[l];
    const std::string where = source + ":" + std::to_string(number);
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != basis.size() + 1) {
      throw ParseError(where + ": expected " + std::to_string(basis.size() + 1) + " fields, got " +
                       std::to_string(fields.size()));
    }
    if (!seen.emplace(fields[0]).second) {
      throw FormatError(where + ": duplicate curve_id '" + std::string(fields[0]) + "'");
    }
    Eigen::VectorXd a(basis.size());
    for (int c = 0; c < basis.size(); ++c) {
      a[c] = parse_double(fields[c + 1], where + " field c" + std::to_string(c + 1));
    }
    t.ids.emplace_back(fields[0]);
    t.samples.emplace_back(basis, std::move(a));
  }
  return t;
}

/// Reads a coefficient CSV; the basis comes from `basis_path` or, by
/// default, the sidecar written next to the CSV.
inline CoefficientTable load_coefficients(const std::filesystem::path& path,
                                          const std::optional<std::filesystem::path>& basis_path = {}) {
  const BasisSpec basis = load_basis(basis_path.value_or(basis_sidecar(path)));
  return parse_coefficients(read_file(path), basis, path.string());
}

inline void save_coefficients(const CoefficientTable& table, const std::filesystem::path& path) {
  if (table.samples.empty()) throw DimensionError("no coefficients to save");
  atomic_write(basis_sidecar(path), render_basis(table.samples.front().basis()));
  atomic_write(path, render_coefficients(table));
}

// ---------------------------------------------------------------------------
// Reports

inline std::string render_cv_report(const CvReport& r) {
  std::string out = "fold,mae,accuracy_error\n";
  for (std::size_t f = 0; f < r.per_fold.size(); ++f) {
    out += std::to_string(f + 1) + "," + format_double(r.per_fold[f].mae) + "," +
           format_double(r.per_fold[f].accuracy_error) + "\n";
  }
  out += "mean," + format_double(r.mean_mae) + "," + format_double(r.mean_accuracy_error) + "\n";
  return out;
}

inline std::string render_summary(std::span<const std::pair<Arm, CvReport>> rows) {
  std::string out = "arm,mean_mae,mean_error_rate\n";
  for (const auto& [arm, r] : rows) {
    out += std::string(to_string(arm)) + "," + format_double(r.mean_mae) + "," +
           format_double(r.mean_accuracy_error) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data specs
//
// {
//   "n_curves": 200, "seed": 7, "noise_sd": 0.05,
//   "tau": [-1, 0, 1],
//   "beta": {"basis": <basis>, "coefficients": [...]},
//   "curves": {"basis": <basis>, "coefficient_sd": 1.0,
//              "mean": [...], "class_means": [[...], ...]},      (optional keys)
//   "sampling_times": [...]  or  {"points": 121}                 (uniform on [0,T])
// }

inline SyntheticSpec parse_synthetic_spec(std::string_view text, const std::string& source = "spec") {
  const Json j = detail::parse_json(text, source);
  const auto where = [&](const std::string& k) { return source + "." + k; };
  const int n = detail::json_int(detail::field(j, "n_curves", source), where("n_curves"));
  std::uint64_t seed = 0;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw ParseError(where("seed") + ": expected an integer");
    seed = j["seed"].get<std::uint64_t>();
  }
  const double noise = j.contains("noise_sd") ? detail::json_number(j["noise_sd"], where("noise_sd")) : 0.0;
  const std::vector<double> tau = detail::json_doubles(detail::field(j, "tau", source), where("tau"));

  const Json& beta = detail::field(j, "beta", source);
  const BasisSpec beta_basis = basis_from_json(detail::field(beta, "basis", where("beta")), where("beta.basis"));
  const std::vector<double> bcoef =
      detail::json_doubles(detail::field(beta, "coefficients", where("beta")), where("beta.coefficients"));

  const Json& cj = detail::field(j, "curves", source);
  const BasisSpec curve_basis = basis_from_json(detail::field(cj, "basis", where("curves")), where("curves.basis"));
  auto to_vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  CurveGenerator gen{curve_basis, Eigen::VectorXd(), {}, 1.0};
  if (cj.contains("coefficient_sd")) gen.coefficient_sd = detail::json_number(cj["coefficient_sd"], where("curves.coefficient_sd"));
  if (cj.contains("mean")) gen.mean = to_vec(detail::json_doubles(cj["mean"], where("curves.mean")));
  if (cj.contains("class_means")) {
    const Json& cm = cj["class_means"];
    if (!cm.is_array()) throw ParseError(where("curves.class_means") + ": expected an array");
    for (std::size_t i = 0; i < cm.size(); ++i) {
      gen.class_means.push_back(
          to_vec(detail::json_doubles(cm[i], where("curves.class_means[" + std::to_string(i) + "]"))));
    }
  }

  std::vector<double> times;
  const Json& st = detail::field(j, "sampling_times", source);
  if (st.is_array()) {
    times = detail::json_doubles(st, where("sampling_times"));
  } else {
    const int points = detail::json_int(detail::field(st, "points", where("sampling_times")),
                                        where("sampling_times.points"));
    times = detail::validated(where("sampling_times"),
                              [&] { return uniform_grid(curve_basis.domain_end(), points); });
  }

  return detail::validated(source, [&] {
    SyntheticSpec spec{Thresholds(tau), FunctionalSample(beta_basis, to_vec(bcoef)), gen, n, noise,
                       times, seed};
    spec.validate();
    return spec;
  });
}

inline SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  return parse_synthetic_spec(read_file(path), path.string());
}

}  // namespace folr
