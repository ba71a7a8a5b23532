#pragma once

// Function bases on [0, T]: clamped B-splines and constant-free monomials.
//
// A BasisSpec is an immutable value. Copies share one underlying definition,
// so passing bases around by value is cheap and equality checks between
// copies of the same basis short-circuit on identity.

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "folr/detail/quadrature.hpp"
#include "folr/error.hpp"

namespace folr {

enum class BasisKind { BSpline, Monomial };

inline const char* to_string(BasisKind kind) {
  return kind == BasisKind::BSpline ? "bspline" : "monomial";
}

class BasisSpec {
 public:
  /// Clamped B-spline basis of the given order (degree + 1). The knot vector
  /// is the full one, boundary knots repeated `order` times, so the basis has
  /// knots.size() - order functions on [knots.front(), knots.back()] = [0, T].
  static BasisSpec bspline(int order, std::vector<double> knots) {
    if (order < 1) throw ValidationError("bspline order must be >= 1");
    const auto n_knots = static_cast<int>(knots.size());
    if (n_knots < 2 * order) {
      throw ValidationError("bspline needs at least 2*order knots (got " +
                            std::to_string(n_knots) + " for order " +
                            std::to_string(order) + ")");
    }
    for (double k : knots) {
      if (!std::isfinite(k)) throw ValidationError("bspline knots must be finite");
    }
    if (!std::is_sorted(knots.begin(), knots.end())) {
      throw ValidationError("bspline knots must be nondecreasing");
    }
    if (knots.front() != 0.0) throw ValidationError("bspline first knot must be 0");
    const double end = knots.back();
    if (!(end > 0.0)) throw ValidationError("bspline domain end T must be > 0");
    for (int i = 0; i < order; ++i) {
      if (knots[i] != 0.0 || knots[n_knots - 1 - i] != end) {
        throw ValidationError("bspline knots must be clamped: first and last " +
                              std::to_string(order) + " knots equal 0 and T");
      }
    }
    const int size = n_knots - order;
    for (int i = 0; i < size; ++i) {
      if (!(knots[i + order] > knots[i])) {
        throw ValidationError("bspline knot multiplicity exceeds order at knot " +
                              std::to_string(i));
      }
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = BasisKind::BSpline;
    impl->order = order;
    impl->knots = std::move(knots);
    impl->size = size;
    impl->end = end;
    return BasisSpec(std::move(impl));
  }

  /// `size` clamped B-splines of `order` with uniformly spaced interior knots.
  static BasisSpec uniform_bspline(int size, int order, double domain_end) {
    if (order < 1) throw ValidationError("bspline order must be >= 1");
    if (size < order) {
      throw ValidationError("uniform bspline basis needs size >= order (size " +
                            std::to_string(size) + ", order " + std::to_string(order) +
                            ")");
    }
    if (!(domain_end > 0.0) || !std::isfinite(domain_end)) {
      throw ValidationError("basis domain end T must be finite and > 0");
    }
    const int interior = size - order;
    std::vector<double> knots;
    knots.reserve(size + order);
    knots.insert(knots.end(), order, 0.0);
    for (int i = 1; i <= interior; ++i) {
      knots.push_back(domain_end * static_cast<double>(i) / (interior + 1));
    }
    knots.insert(knots.end(), order, domain_end);
    return bspline(order, std::move(knots));
  }

  /// Monomials t^d for each listed degree. Degrees must be strictly
  /// increasing and start at 1: a constant term would be confounded with
  /// the thresholds of the ordinal model.
  static BasisSpec monomial(std::vector<int> degrees, double domain_end) {
    if (degrees.empty()) throw ValidationError("monomial basis needs at least one degree");
    if (degrees.front() < 1) {
      throw ValidationError("monomial degrees must be >= 1 (no constant term)");
    }
    for (std::size_t i = 1; i < degrees.size(); ++i) {
      if (degrees[i] <= degrees[i - 1]) {
        throw ValidationError("monomial degrees must be strictly increasing");
      }
    }
    if (!(domain_end > 0.0) || !std::isfinite(domain_end)) {
      throw ValidationError("basis domain end T must be finite and > 0");
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = BasisKind::Monomial;
    impl->size = static_cast<int>(degrees.size());
    impl->degrees = std::move(degrees);
    impl->end = domain_end;
    return BasisSpec(std::move(impl));
  }

  /// Degrees 1..size.
  static BasisSpec monomial_up_to(int size, double domain_end) {
    if (size < 1) throw ValidationError("monomial basis size must be >= 1");
    std::vector<int> degrees(size);
    for (int i = 0; i < size; ++i) degrees[i] = i + 1;
    return monomial(std::move(degrees), domain_end);
  }

  BasisKind kind() const { return impl_->kind; }
  int size() const { return impl_->size; }
  double domain_end() const { return impl_->end; }
  /// B-spline order; 0 for monomial bases.
  int order() const { return impl_->order; }
  const std::vector<double>& knots() const { return impl_->knots; }
  const std::vector<int>& degrees() const { return impl_->degrees; }

  /// Polynomial degree of the basis functions on each piece.
  int piece_degree() const {
    return kind() == BasisKind::BSpline ? order() - 1 : degrees().back();
  }

  /// Points between which every basis function is a polynomial.
  std::vector<double> breakpoints() const {
    if (kind() == BasisKind::Monomial) return {0.0, domain_end()};
    std::vector<double> pts(knots());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  /// Closed support interval of basis function i.
  std::pair<double, double> support(int i) const {
    if (i < 0 || i >= size()) throw DimensionError("basis index out of range");
    if (kind() == BasisKind::Monomial) return {0.0, domain_end()};
    return {knots()[i], knots()[i + order()]};
  }

  /// Values (or derivatives of the given order) of all basis functions at t.
  Eigen::VectorXd eval(double t, int derivative = 0) const {
    check_point(t);
    if (derivative < 0) throw ValidationError("derivative order must be >= 0");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
    if (kind() == BasisKind::Monomial) {
      for (int m = 0; m < size(); ++m) {
        const int d = degrees()[m];
        if (derivative > d) continue;
        double coef = 1.0;
        for (int k = 0; k < derivative; ++k) coef *= d - k;
        out[m] = coef * std::pow(t, d - derivative);
      }
      return out;
    }
    const int p = order() - 1;
    if (derivative > p) return out;
    const int span = find_span(t);
    const Eigen::VectorXd local = local_basis(span, t, derivative);
    for (int j = 0; j <= p; ++j) out[span - p + j] = local[j];
    return out;
  }

  /// Value at t of the function with the given coefficients in this basis.
  double combine(std::span<const double> coefficients, double t, int derivative = 0) const {
    if (static_cast<int>(coefficients.size()) != size()) {
      throw DimensionError("coefficient count does not match basis size");
    }
    const Eigen::VectorXd v = eval(t, derivative);
    double s = 0.0;
    for (int m = 0; m < size(); ++m) s += v[m] * coefficients[m];
    return s;
  }

  friend bool operator==(const BasisSpec& a, const BasisSpec& b) {
    if (a.impl_ == b.impl_) return true;
    return a.impl_->kind == b.impl_->kind && a.impl_->end == b.impl_->end &&
           a.impl_->order == b.impl_->order && a.impl_->knots == b.impl_->knots &&
           a.impl_->degrees == b.impl_->degrees;
  }

  std::string describe() const {
    if (kind() == BasisKind::BSpline) {
      return "bspline(size=" + std::to_string(size()) + ", order=" + std::to_string(order()) +
             ", T=" + std::to_string(domain_end()) + ")";
    }
    return "monomial(size=" + std::to_string(size()) + ", T=" + std::to_string(domain_end()) +
           ")";
  }

 private:
  struct Impl {
    BasisKind kind = BasisKind::Monomial;
    int size = 0;
    double end = 1.0;
    int order = 0;
    std::vector<double> knots;
    std::vector<int> degrees;
  };

  explicit BasisSpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  void check_point(double t) const {
    if (!(t >= 0.0 && t <= domain_end())) {
      throw DomainError("evaluation point " + std::to_string(t) + " outside [0, " +
                        std::to_string(domain_end()) + "]");
    }
  }

  // Index s with knots[s] <= t < knots[s+1]; t == T maps to the last
  // nonempty span so the right endpoint is covered.
  int find_span(double t) const {
    const auto& k = knots();
    const int p = order() - 1;
    const int last = size() - 1;
    if (t >= k[last + 1]) return last;
    const auto it = std::upper_bound(k.begin() + p, k.begin() + last + 1, t);
    return static_cast<int>(it - k.begin()) - 1;
  }

  // The order() nonzero functions N_{span-p..span} (or their derivative of
  // the requested order) at t, by the triangular de Boor / Cox recursion.
  Eigen::VectorXd local_basis(int span, double t, int derivative) const {
    const auto& k = knots();
    const int p = order() - 1;
    // ndu(j, r): basis values of degree j (upper triangle) and knot
    // differences (lower triangle).
    Eigen::MatrixXd ndu(p + 1, p + 1);
    Eigen::VectorXd left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
      left[j] = t - k[span + 1 - j];
      right[j] = k[span + j] - t;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        ndu(j, r) = right[r + 1] + left[j - r];
        const double temp = ndu(r, j - 1) / ndu(j, r);
        ndu(r, j) = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      ndu(j, j) = saved;
    }
    Eigen::VectorXd out(p + 1);
    if (derivative == 0) {
      for (int j = 0; j <= p; ++j) out[j] = ndu(j, p);
      return out;
    }
    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
      int s1 = 0;
      int s2 = 1;
      a.setZero();
      a(0, 0) = 1.0;
      double d = 0.0;
      for (int kk = 1; kk <= derivative; ++kk) {
        d = 0.0;
        const int rk = r - kk;
        const int pk = p - kk;
        if (r >= kk) {
          a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
          d = a(s2, 0) * ndu(rk, pk);
        }
        const int j1 = rk >= -1 ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? kk - 1 : p - r;
        for (int j = j1; j <= j2; ++j) {
          a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
          d += a(s2, j) * ndu(rk + j, pk);
        }
        if (r <= pk) {
          a(s2, kk) = -a(s1, kk - 1) / ndu(pk + 1, r);
          d += a(s2, kk) * ndu(r, pk);
        }
        std::swap(s1, s2);
      }
      out[r] = d;
    }
    double factor = p;
    for (int kk = 1; kk < derivative; ++kk) factor *= p - kk;
    out *= factor;
    return out;
  }

  std::shared_ptr<const Impl> impl_;
};

/// A curve X(t) = sum_r a_r psi_r(t), represented by its coefficients.
class FunctionalSample {
 public:
  FunctionalSample(BasisSpec basis, Eigen::VectorXd coefficients)
      : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
    if (coefficients_.size() != basis_.size()) {
      throw DimensionError("sample has " + std::to_string(coefficients_.size()) +
                           " coefficients for a basis of size " +
                           std::to_string(basis_.size()));
    }
    if (!coefficients_.allFinite()) throw ValidationError("sample coefficients must be finite");
  }

  const BasisSpec& basis() const { return basis_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  double value(double t, int derivative = 0) const {
    return basis_.combine({coefficients_.data(), static_cast<std::size_t>(coefficients_.size())},
                          t, derivative);
  }

 private:
  BasisSpec basis_;
  Eigen::VectorXd coefficients_;
};

/// A discretely observed curve.
struct RawCurve {
  std::string id;
  std::vector<double> times;
  std::vector<double> values;

  void validate() const {
    if (times.size() != values.size()) {
      throw ValidationError("curve '" + id + "': times and values differ in length");
    }
    if (times.size() < 2) throw ValidationError("curve '" + id + "': needs >= 2 observations");
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (!std::isfinite(times[k]) || !std::isfinite(values[k])) {
        throw ValidationError("curve '" + id + "': non-finite observation");
      }
      if (k > 0 && !(times[k] > times[k - 1])) {
        throw ValidationError("curve '" + id + "': times must be strictly increasing");
      }
    }
  }
};

/// Inner products between two bases: entries(i, j) = <row_i, col_j> in L2([0,T]).
struct GramMatrix {
  Eigen::MatrixXd entries;
  BasisSpec row_basis;
  BasisSpec col_basis;
};

namespace detail {

inline void check_same_domain(const BasisSpec& a, const BasisSpec& b) {
  const double ta = a.domain_end();
  const double tb = b.domain_end();
  if (std::abs(ta - tb) > 1e-12 * std::max(ta, tb)) {
    throw DomainError("bases live on different domains: [0, " + std::to_string(ta) +
                      "] vs [0, " + std::to_string(tb) + "]");
  }
}

// Integral of (d^dr row_i)(d^dc col_j) over [0, T], Gauss-Legendre on every
// interval between consecutive breakpoints of either basis. Exact for the
// piecewise polynomial integrand.
inline Eigen::MatrixXd product_integrals(const BasisSpec& row, const BasisSpec& col,
                                         int row_derivative, int col_derivative) {
  check_same_domain(row, col);
  std::vector<double> pts = row.breakpoints();
  const std::vector<double> other = col.breakpoints();
  pts.insert(pts.end(), other.begin(), other.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const double end = std::min(row.domain_end(), col.domain_end());
  pts.back() = end;

  const int d1 = std::max(0, row.piece_degree() - row_derivative);
  const int d2 = std::max(0, col.piece_degree() - col_derivative);
  const GaussRule rule = gauss_legendre(exact_node_count(d1, d2));

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(row.size(), col.size());
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const double a = pts[s];
    const double b = pts[s + 1];
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = std::clamp(mid + half * rule.nodes[q], 0.0, end);
      const Eigen::VectorXd u = row.eval(t, row_derivative);
      const Eigen::VectorXd v = col.eval(t, col_derivative);
      out.noalias() += (half * rule.weights[q]) * u * v.transpose();
    }
  }
  return out;
}

}  // namespace detail

/// Gram matrix of L2 inner products between the functions of two bases on
/// a shared domain.
inline GramMatrix gram(const BasisSpec& row, const BasisSpec& col) {
  GramMatrix g{detail::product_integrals(row, col, 0, 0), row, col};
  if (row == col) {
    g.entries = 0.5 * (g.entries + g.entries.transpose()).eval();
  }
  return g;
}

/// Roughness penalty matrix P(i, j) = integral of psi_i'' psi_j''.
inline Eigen::MatrixXd roughness_matrix(const BasisSpec& spec) {
  Eigen::MatrixXd p = detail::product_integrals(spec, spec, 2, 2);
  return 0.5 * (p + p.transpose());
}

struct SmoothResult {
  FunctionalSample sample;
  double residual_rms = 0.0;
  /// The normal matrix needed a diagonal ridge to factorize.
  bool jittered = false;
};

/// Penalized least-squares projection of raw curves onto a basis:
/// minimizes sum_k (y_k - X(t_k))^2 + lambda * integral X''(t)^2 dt.
/// The penalty matrix is computed once and reused for every curve.
class Smoother {
 public:
  Smoother(BasisSpec spec, double roughness_lambda)
      : spec_(std::move(spec)), lambda_(roughness_lambda) {
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) {
      throw ValidationError("roughness lambda must be finite and >= 0");
    }
    if (lambda_ > 0.0) penalty_ = roughness_matrix(spec_);
  }

  const BasisSpec& basis() const { return spec_; }
  double lambda() const { return lambda_; }

  SmoothResult operator()(const RawCurve& curve) const {
    curve.validate();
    const int m = spec_.size();
    const auto n = static_cast<int>(curve.times.size());
    if (curve.times.front() < 0.0 || curve.times.back() > spec_.domain_end()) {
      throw DomainError("curve '" + curve.id + "' has times outside the basis domain [0, " +
                        std::to_string(spec_.domain_end()) + "]");
    }
    Eigen::MatrixXd design(n, m);
    Eigen::VectorXd y(n);
    for (int k = 0; k < n; ++k) {
      design.row(k) = spec_.eval(curve.times[k]).transpose();
      y[k] = curve.values[k];
    }
    if (lambda_ == 0.0) check_identifiable(curve, design);

    Eigen::MatrixXd normal = design.transpose() * design;
    if (lambda_ > 0.0) normal += lambda_ * penalty_;
    const Eigen::VectorXd rhs = design.transpose() * y;

    bool jittered = false;
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (!factorization_ok(llt)) {
      const double ridge = 1e-10 * std::max(1.0, normal.diagonal().maxCoeff());
      normal.diagonal().array() += ridge;
      llt.compute(normal);
      jittered = true;
      if (!factorization_ok(llt)) {
        throw EstimationError("curve '" + curve.id +
                              "': normal matrix is singular even after ridge jitter");
      }
    }
    Eigen::VectorXd coef = llt.solve(rhs);
    const double rms = std::sqrt((design * coef - y).squaredNorm() / n);
    return SmoothResult{FunctionalSample(spec_, std::move(coef)), rms, jittered};
  }

 private:
  void check_identifiable(const RawCurve& curve, const Eigen::MatrixXd& design) const {
    const auto n = design.rows();
    if (n < spec_.size()) {
      throw EstimationError("curve '" + curve.id + "': rank-deficient design, " +
                            std::to_string(n) + " observations for " +
                            std::to_string(spec_.size()) +
                            " basis functions and no roughness penalty");
    }
    for (int m = 0; m < spec_.size(); ++m) {
      if (design.col(m).cwiseAbs().maxCoeff() == 0.0) {
        throw EstimationError("curve '" + curve.id + "': rank-deficient design, basis function " +
                              std::to_string(m + 1) +
                              " has no observation in its support and no roughness penalty");
      }
    }
  }

  static bool factorization_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd d = llt.matrixLLT().diagonal().array().square();
    if (!d.allFinite()) return false;
    return d.minCoeff() > 1e-15 * d.maxCoeff();
  }

  BasisSpec spec_;
  double lambda_;
  Eigen::MatrixXd penalty_;
};

inline SmoothResult smooth(const RawCurve& curve, const BasisSpec& spec,
                           double roughness_lambda) {
  return Smoother(spec, roughness_lambda)(curve);
}

}  // namespace folr
