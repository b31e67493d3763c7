#pragma once

// Group-testing response model: positive-response probability, its gradient
// in (prevalence, sensitivity, specificity), the Fisher information of a
// design, and the D / Ds criteria. Everything here is templated on the scalar
// type so that tests can re-evaluate in extended precision.

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "gtdesign/errors.hpp"

namespace gtdesign {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix3X = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

/// Relative eigenvalue cutoff used for rank decisions and pseudo-inverses.
inline constexpr double kRankCutoff = 1e-12;
/// Largest residual of projecting e1 onto range(M) that still counts as "in range".
inline constexpr double kEstimabilityTolerance = 1e-10;
/// Tolerance on the sum of design weights.
inline constexpr double kWeightSumTolerance = 1e-12;

enum class Criterion { D, Ds };

inline std::string_view to_string(Criterion c) { return c == Criterion::D ? "d" : "ds"; }

inline Criterion parse_criterion(std::string_view s) {
  if (s == "d" || s == "D") return Criterion::D;
  if (s == "ds" || s == "Ds" || s == "DS") return Criterion::Ds;
  throw InvalidArgument("unknown criterion '" + std::string(s) + "' (expected d or ds)");
}

/// theta = (p0, p1, p2): prevalence, sensitivity, specificity.
template <typename Scalar>
class ParamVector {
 public:
  ParamVector(Scalar prevalence, Scalar sensitivity, Scalar specificity)
      : p0_(prevalence), p1_(sensitivity), p2_(specificity) {
    if (!(p0_ > 0 && p0_ < 1))
      throw InvalidArgument("prevalence must lie in (0, 1)");
    if (!(p1_ > Scalar(0.5) && p1_ <= 1))
      throw InvalidArgument("sensitivity must lie in (0.5, 1]");
    if (!(p2_ > Scalar(0.5) && p2_ <= 1))
      throw InvalidArgument("specificity must lie in (0.5, 1]");
  }

  explicit ParamVector(const Vector3<Scalar>& v) : ParamVector(v(0), v(1), v(2)) {}

  Scalar prevalence() const { return p0_; }
  Scalar sensitivity() const { return p1_; }
  Scalar specificity() const { return p2_; }

  /// p1 + p2 - 1, strictly positive.
  Scalar discrimination() const { return p1_ + p2_ - 1; }
  /// log(1 - p0)
  Scalar log_survival() const {
    using std::log1p;
    return log1p(-p0_);
  }
  /// (1 - p0)^x, the probability that a group of size x holds no true positive.
  Scalar survival(Scalar x) const {
    using std::exp;
    return exp(x * log_survival());
  }

  Vector3<Scalar> vector() const { return Vector3<Scalar>(p0_, p1_, p2_); }

  template <typename Other>
  ParamVector<Other> cast() const {
    return ParamVector<Other>(Other(p0_), Other(p1_), Other(p2_));
  }

 private:
  Scalar p0_;
  Scalar p1_;
  Scalar p2_;
};

template <typename Scalar>
class SizeBounds {
 public:
  SizeBounds(Scalar lower, Scalar upper) : lower_(lower), upper_(upper) {
    using std::isfinite;
    if (!(lower_ >= 1) || !(upper_ > lower_) || !isfinite(upper_))
      throw InvalidArgument("group size bounds must satisfy 1 <= x_lower < x_upper < inf");
  }

  Scalar lower() const { return lower_; }
  Scalar upper() const { return upper_; }
  Scalar width() const { return upper_ - lower_; }
  bool contains(Scalar x) const { return x >= lower_ && x <= upper_; }

 private:
  Scalar lower_;
  Scalar upper_;
};

/// Support points with positive weights summing to one.
template <typename Scalar>
class ApproximateDesign {
 public:
  ApproximateDesign(VectorX<Scalar> sizes, VectorX<Scalar> weights)
      : sizes_(std::move(sizes)), weights_(std::move(weights)) {
    using std::abs;
    if (sizes_.size() == 0 || sizes_.size() != weights_.size())
      throw InvalidSupport("design needs matching, non-empty size and weight lists");
    for (Eigen::Index i = 0; i < sizes_.size(); ++i) {
      if (!(sizes_(i) >= 1)) throw InvalidSupport("group sizes must be >= 1");
      if (i > 0 && !(sizes_(i) > sizes_(i - 1)))
        throw InvalidSupport("group sizes must be strictly increasing");
      if (!(weights_(i) > 0)) throw InvalidSupport("design weights must be positive");
    }
    if (abs(weights_.sum() - 1) > Scalar(kWeightSumTolerance))
      throw InvalidSupport("design weights must sum to 1");
  }

  static ApproximateDesign equally_weighted(VectorX<Scalar> sizes) {
    const auto k = sizes.size();
    VectorX<Scalar> w = VectorX<Scalar>::Constant(k, Scalar(1) / Scalar(k));
    return ApproximateDesign(std::move(sizes), std::move(w));
  }

  const VectorX<Scalar>& sizes() const { return sizes_; }
  const VectorX<Scalar>& weights() const { return weights_; }
  Eigen::Index size() const { return sizes_.size(); }

  bool within(const SizeBounds<Scalar>& bounds) const {
    return bounds.contains(sizes_.minCoeff()) && bounds.contains(sizes_.maxCoeff());
  }

  template <typename Other>
  ApproximateDesign<Other> cast() const {
    return ApproximateDesign<Other>(sizes_.template cast<Other>(), weights_.template cast<Other>());
  }

 private:
  VectorX<Scalar> sizes_;
  VectorX<Scalar> weights_;
};

/// Integer group sizes with integer trial counts.
class ExactDesign {
 public:
  ExactDesign(Eigen::VectorXi sizes, Eigen::VectorXi counts)
      : sizes_(std::move(sizes)), counts_(std::move(counts)) {
    if (sizes_.size() == 0 || sizes_.size() != counts_.size())
      throw InvalidSupport("exact design needs matching, non-empty size and count lists");
    for (Eigen::Index i = 0; i < sizes_.size(); ++i) {
      if (sizes_(i) < 1) throw InvalidSupport("group sizes must be positive integers");
      if (i > 0 && sizes_(i) <= sizes_(i - 1))
        throw InvalidSupport("group sizes must be strictly increasing");
      if (counts_(i) < 1) throw InvalidSupport("trial counts must be positive");
    }
    total_ = counts_.sum();
  }

  const Eigen::VectorXi& sizes() const { return sizes_; }
  const Eigen::VectorXi& counts() const { return counts_; }
  int total_trials() const { return total_; }
  Eigen::Index size() const { return sizes_.size(); }

  /// Reinterprets the design as weights counts / n.
  ApproximateDesign<double> to_approximate() const {
    return ApproximateDesign<double>(sizes_.cast<double>(),
                                     counts_.cast<double>() / static_cast<double>(total_));
  }

  friend bool operator==(const ExactDesign& a, const ExactDesign& b) {
    return a.sizes_ == b.sizes_ && a.counts_ == b.counts_;
  }

 private:
  Eigen::VectorXi sizes_;
  Eigen::VectorXi counts_;
  int total_ = 0;
};

template <typename Scalar>
struct ModelEvaluation {
  Scalar pi;                ///< probability of a positive response
  Scalar lambda;            ///< 1 / (pi (1 - pi))
  Vector3<Scalar> grad;     ///< d pi / d theta
};

template <typename Scalar>
ModelEvaluation<Scalar> evaluate_model(Scalar x, const ParamVector<Scalar>& theta) {
  if (!(x >= 1)) throw InvalidArgument("group size must be >= 1");
  const Scalar s = theta.discrimination();
  const Scalar bx = theta.survival(x);
  const Scalar bxm1 = theta.survival(x - 1);
  ModelEvaluation<Scalar> e;
  e.pi = theta.sensitivity() - s * bx;
  if (!(e.pi > 0 && e.pi < 1))
    throw DegenerateModel("response probability is numerically 0 or 1");
  e.lambda = Scalar(1) / (e.pi * (1 - e.pi));
  e.grad << x * s * bxm1, 1 - bx, -bx;
  return e;
}

/// Columns are the gradients f(x_i) at the support points.
template <typename Scalar>
Matrix3X<Scalar> gradient_matrix(const VectorX<Scalar>& sizes, const ParamVector<Scalar>& theta) {
  Matrix3X<Scalar> f(3, sizes.size());
  for (Eigen::Index i = 0; i < sizes.size(); ++i) f.col(i) = evaluate_model(sizes(i), theta).grad;
  return f;
}

/// M = sum_i w_i lambda(x_i) f(x_i) f(x_i)^T
template <typename Scalar>
Matrix3<Scalar> information_matrix(const ApproximateDesign<Scalar>& design,
                                   const ParamVector<Scalar>& theta) {
  Matrix3<Scalar> m = Matrix3<Scalar>::Zero();
  for (Eigen::Index i = 0; i < design.size(); ++i) {
    const auto e = evaluate_model(design.sizes()(i), theta);
    m.noalias() += (design.weights()(i) * e.lambda) * e.grad * e.grad.transpose();
  }
  return m;
}

/// Spectral pseudo-inverse of a symmetric matrix; eigenvalues at or below
/// rel_cutoff * max|eigenvalue| are treated as zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
symmetric_pseudo_inverse(const Eigen::MatrixBase<Derived>& m,
                         typename Derived::RealScalar rel_cutoff = kRankCutoff) {
  using Plain = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime,
                              Derived::ColsAtCompileTime>;
  Eigen::SelfAdjointEigenSolver<Plain> es(m.eval());
  const auto& ev = es.eigenvalues();
  const auto threshold = rel_cutoff * ev.cwiseAbs().maxCoeff();
  auto inv = ev;
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > threshold ? 1 / ev(i) : 0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& m,
                            typename Derived::RealScalar rel_cutoff = kRankCutoff) {
  using Plain = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime,
                              Derived::ColsAtCompileTime>;
  Eigen::SelfAdjointEigenSolver<Plain> es(m.eval(), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const auto threshold = rel_cutoff * ev.cwiseAbs().maxCoeff();
  return (ev.array() > threshold).count();
}

/// log|M|; throws CriterionUndefined when M is not numerically positive definite.
template <typename Scalar>
Scalar d_criterion(const Matrix3<Scalar>& m) {
  using std::log;
  Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  if (!(ev(2) > 0) || !(ev(0) > Scalar(kRankCutoff) * ev(2)))
    throw CriterionUndefined("information matrix is singular: theta is not estimable");
  return ev.array().log().sum();
}

struct Estimability {
  bool full = false;        ///< M nonsingular
  bool prevalence = false;  ///< e1 in range(M)
  double residual = 0;      ///< |e1 - P_range(M) e1|
};

template <typename Scalar>
Estimability estimability(const Matrix3<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> es(m);
  const auto& ev = es.eigenvalues();
  const Scalar threshold = Scalar(kRankCutoff) * ev.cwiseAbs().maxCoeff();
  Vector3<Scalar> projected = Vector3<Scalar>::Zero();
  int rank = 0;
  for (int i = 0; i < 3; ++i) {
    if (ev(i) > threshold) {
      ++rank;
      projected += es.eigenvectors()(0, i) * es.eigenvectors().col(i);
    }
  }
  Estimability out;
  out.full = rank == 3;
  out.residual = static_cast<double>((Vector3<Scalar>::UnitX() - projected).norm());
  out.prevalence = out.residual < kEstimabilityTolerance;
  return out;
}

template <typename Scalar>
Estimability estimability_check(const ApproximateDesign<Scalar>& design,
                                const ParamVector<Scalar>& theta) {
  return estimability(information_matrix(design, theta));
}

/// Q_i = lambda(x_i)^{-1} {(1-p0)^{x_(1)} - (1-p0)^{x_(2)}}^2 where x_(1) < x_(2) are the
/// two sizes other than x_i. Requires x_1 < x_2 < x_3.
template <typename Scalar>
Vector3<Scalar> ds_q_values(const Vector3<Scalar>& sizes, const ParamVector<Scalar>& theta) {
  if (!(sizes(0) < sizes(1) && sizes(1) < sizes(2)))
    throw InvalidSupport("three distinct increasing group sizes are required");
  const Vector3<Scalar> b(theta.survival(sizes(0)), theta.survival(sizes(1)),
                          theta.survival(sizes(2)));
  constexpr int other[3][2] = {{1, 2}, {0, 2}, {0, 1}};
  Vector3<Scalar> q;
  for (int i = 0; i < 3; ++i) {
    const Scalar diff = b(other[i][0]) - b(other[i][1]);
    q(i) = diff * diff / evaluate_model(sizes(i), theta).lambda;
  }
  return q;
}

/// How ds_criterion evaluates (M^-)_{11}.
enum class DsRoute {
  Automatic,      ///< closed form for well-conditioned three-point designs, else pseudo-inverse
  ClosedForm,     ///< |M_f|^{-2} sum_i Q_i / w_i, three-point designs only
  PseudoInverse,  ///< spectral pseudo-inverse of M
};

/// -log (M^-)_{11}; throws CriterionUndefined when p0 is not estimable.
template <typename Scalar>
Scalar ds_criterion(const ApproximateDesign<Scalar>& design, const ParamVector<Scalar>& theta,
                    DsRoute route = DsRoute::Automatic) {
  using std::abs;
  using std::log;
  if (route != DsRoute::PseudoInverse && design.size() == 3) {
    const Matrix3<Scalar> f = gradient_matrix(design.sizes(), theta);
    const Scalar det = f.determinant();
    const Scalar scale = f.col(0).norm() * f.col(1).norm() * f.col(2).norm();
    if (abs(det) > Scalar(kRankCutoff) * scale) {
      const Vector3<Scalar> q = ds_q_values(Vector3<Scalar>(design.sizes()), theta);
      const Scalar m11 = (q.array() / design.weights().array()).sum() / (det * det);
      return -log(m11);
    }
    if (route == DsRoute::ClosedForm)
      throw CriterionUndefined("gradient matrix is singular: p0 is not estimable");
  } else if (route == DsRoute::ClosedForm) {
    throw InvalidSupport("closed-form Ds criterion needs exactly three support points");
  }

  const Matrix3<Scalar> m = information_matrix(design, theta);
  if (!estimability(m).prevalence)
    throw CriterionUndefined("p0 is not estimable under this design");
  const Scalar m11 = symmetric_pseudo_inverse(m)(0, 0);
  if (!(m11 > 0)) throw CriterionUndefined("non-positive (M^-)_11");
  return -log(m11);
}

using Params = ParamVector<double>;
using Bounds = SizeBounds<double>;
using Design = ApproximateDesign<double>;

}  // namespace gtdesign
