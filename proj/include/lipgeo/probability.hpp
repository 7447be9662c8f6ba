// Copyright 2026 The lipgeo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exact probability primitives: finite distributions, column-stochastic
// kernels, the problem instance (P_XY plus a leakage budget), and the exact
// information functionals used to audit mechanisms. Nothing in this header
// approximates; everything downstream is checked against it.
//
// All logarithms are natural (nats).

#ifndef LIPGEO_PROBABILITY_HPP_
#define LIPGEO_PROBABILITY_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lipgeo/error.hpp"

namespace lipgeo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Input distributions are user data and held to a strict tolerance; mixtures
// are products of floating-point synthesis and get a looser one.
inline constexpr double kNormalizationTolerance = 1e-9;
inline constexpr double kMixtureTolerance = 1e-6;
inline constexpr double kPositivityFloor = 1e-12;
inline constexpr double kInvertibilityFloor = 1e-9;

namespace internal {

inline std::string Describe(const Vector& v) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) os << ", ";
    os << v(i);
  }
  os << "]";
  return os.str();
}

inline double SmallestSingularValue(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

}  // namespace internal

// A probability vector over a finite alphabet. Construction validates: every
// entry finite and >= 0, entries summing to 1 within `tolerance`.
class Distribution {
 public:
  explicit Distribution(Vector values,
                        double tolerance = kNormalizationTolerance)
      : values_(std::move(values)) {
    if (values_.size() == 0) {
      throw Error(ErrorCode::kInvalidDistribution, "empty distribution");
    }
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_(i)) || values_(i) < 0.0) {
        throw Error(ErrorCode::kInvalidDistribution,
                    "entry " + std::to_string(i) +
                        " is negative or not finite in " +
                        internal::Describe(values_));
      }
    }
    const double total = values_.sum();
    if (std::abs(total - 1.0) > tolerance) {
      throw Error(ErrorCode::kNotNormalized,
                  "entries sum to " + std::to_string(total) + " in " +
                      internal::Describe(values_));
    }
  }

  Distribution(std::initializer_list<double> values)
      : Distribution(FromList(values)) {}

  static Distribution Uniform(int size) {
    return Distribution(Vector::Constant(size, 1.0 / size));
  }

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_(i); }
  const Vector& values() const { return values_; }

  bool IsStrictlyPositive(double floor = kPositivityFloor) const {
    return values_.minCoeff() >= floor;
  }

 private:
  static Distribution FromList(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return Distribution(std::move(v));
  }

  Vector values_;
};

// Entry (i, j) is P(output = i | input = j); every column is a Distribution.
class StochasticKernel {
 public:
  explicit StochasticKernel(Matrix matrix,
                            double tolerance = kNormalizationTolerance)
      : matrix_(std::move(matrix)) {
    if (matrix_.size() == 0) {
      throw Error(ErrorCode::kInvalidDistribution, "empty kernel");
    }
    for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
      Distribution column(matrix_.col(j), tolerance);
      (void)column;
    }
  }

  int outputs() const { return static_cast<int>(matrix_.rows()); }
  int inputs() const { return static_cast<int>(matrix_.cols()); }
  const Matrix& matrix() const { return matrix_; }
  Distribution Column(int j) const { return Distribution(matrix_.col(j)); }

 private:
  Matrix matrix_;
};

// The full input to every analysis: the leakage matrix P_{X|Y} (square, K x
// K, invertible), the useful-data marginal P_Y, and the leakage budget.
class ProblemInstance {
 public:
  static ProblemInstance FromJoint(const Matrix& p_xy, double epsilon) {
    if (p_xy.rows() != p_xy.cols() || p_xy.rows() == 0) {
      throw Error(ErrorCode::kNotSquare,
                  "joint distribution is " + std::to_string(p_xy.rows()) +
                      "x" + std::to_string(p_xy.cols()));
    }
    for (Eigen::Index i = 0; i < p_xy.size(); ++i) {
      const double v = p_xy.data()[i];
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::kInvalidDistribution,
                    "joint distribution has a negative or non-finite entry");
      }
    }
    const double total = p_xy.sum();
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      throw Error(ErrorCode::kNotNormalized,
                  "joint distribution sums to " + std::to_string(total));
    }
    const Vector p_x = p_xy.rowwise().sum();
    const Vector p_y = p_xy.colwise().sum().transpose();
    CheckMarginal(p_x, "P_X");
    CheckMarginal(p_y, "P_Y");
    Matrix kernel = p_xy;
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) kernel.col(j) /= p_y(j);
    return ProblemInstance(kernel, p_y, epsilon);
  }

  static ProblemInstance FromKernel(const Matrix& p_x_given_y,
                                    const Vector& p_y, double epsilon) {
    if (p_x_given_y.rows() != p_x_given_y.cols() || p_x_given_y.rows() == 0) {
      throw Error(ErrorCode::kNotSquare,
                  "leakage matrix is " + std::to_string(p_x_given_y.rows()) +
                      "x" + std::to_string(p_x_given_y.cols()));
    }
    if (p_y.size() != p_x_given_y.cols()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "P_Y has length " + std::to_string(p_y.size()) +
                      " but the leakage matrix has " +
                      std::to_string(p_x_given_y.cols()) + " columns");
    }
    StochasticKernel checked(p_x_given_y);
    Distribution checked_y(p_y);
    (void)checked;
    (void)checked_y;
    CheckMarginal(p_y, "P_Y");
    CheckMarginal(p_x_given_y * p_y, "P_X");
    return ProblemInstance(p_x_given_y, p_y, epsilon);
  }

  ProblemInstance WithEpsilon(double epsilon) const {
    ProblemInstance copy = *this;
    copy.epsilon_ = CheckedEpsilon(epsilon);
    return copy;
  }

  int size() const { return static_cast<int>(p_y_.size()); }
  double epsilon() const { return epsilon_; }
  const Matrix& p_x_given_y() const { return p_x_given_y_; }
  const Matrix& kernel_inverse() const { return kernel_inverse_; }
  const Vector& p_y() const { return p_y_; }
  const Vector& p_x() const { return p_x_; }
  // P_XY(x, y) = P_{X|Y}(x|y) P_Y(y).
  Matrix p_xy() const { return p_x_given_y_ * p_y_.asDiagonal(); }
  Distribution px_distribution() const { return Distribution(p_x_); }
  Distribution py_distribution() const { return Distribution(p_y_); }

 private:
  ProblemInstance(Matrix p_x_given_y, Vector p_y, double epsilon)
      : p_x_given_y_(std::move(p_x_given_y)),
        p_y_(std::move(p_y)),
        epsilon_(CheckedEpsilon(epsilon)) {
    p_x_ = p_x_given_y_ * p_y_;
    const double sigma_min = internal::SmallestSingularValue(p_x_given_y_);
    if (!(sigma_min > kInvertibilityFloor)) {
      throw Error(ErrorCode::kSingularKernel,
                  "smallest singular value of P_{X|Y} is " +
                      std::to_string(sigma_min));
    }
    kernel_inverse_ = p_x_given_y_.partialPivLu().inverse();
  }

  static void CheckMarginal(const Vector& marginal, const char* name) {
    for (Eigen::Index i = 0; i < marginal.size(); ++i) {
      if (!(marginal(i) >= kPositivityFloor)) {
        throw Error(ErrorCode::kZeroMarginal,
                    std::string(name) + "(" + std::to_string(i) +
                        ") = " + std::to_string(marginal(i)));
      }
    }
  }

  static double CheckedEpsilon(double epsilon) {
    if (!std::isfinite(epsilon) || epsilon < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "leakage budget must be finite and nonnegative, got " +
                      std::to_string(epsilon));
    }
    return epsilon;
  }

  Matrix p_x_given_y_;
  Matrix kernel_inverse_;
  Vector p_y_;
  Vector p_x_;
  double epsilon_ = 0.0;
};

inline ProblemInstance InstanceFromJoint(const Matrix& p_xy, double epsilon) {
  return ProblemInstance::FromJoint(p_xy, epsilon);
}

// D(p || q) with 0 log 0 = 0.
inline double KlDivergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "KL arguments have lengths " + std::to_string(p.size()) +
                    " and " + std::to_string(q.size()));
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    if (q(i) <= 0.0) {
      throw Error(ErrorCode::kZeroReference,
                  "reference has zero mass at " + std::to_string(i));
    }
    total += p(i) * std::log(p(i) / q(i));
  }
  return std::max(total, 0.0);
}

inline double KlDivergence(const Distribution& p, const Distribution& q) {
  return KlDivergence(p.values(), q.values());
}

// I(U;Y) = sum_u P_U(u) D(P_{Y|U=u} || P_Y). The conditionals must mix back
// to P_Y.
inline double MutualInformation(const Distribution& p_u,
                                std::span<const Distribution> p_y_given_u,
                                const Distribution& p_y) {
  if (static_cast<int>(p_y_given_u.size()) != p_u.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "P_U has " + std::to_string(p_u.size()) + " outcomes but " +
                    std::to_string(p_y_given_u.size()) +
                    " conditionals were given");
  }
  Vector mixture = Vector::Zero(p_y.size());
  for (int u = 0; u < p_u.size(); ++u) {
    if (p_y_given_u[u].size() != p_y.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "conditional " + std::to_string(u) + " has wrong length");
    }
    mixture += p_u[u] * p_y_given_u[u].values();
  }
  const double residual = (mixture - p_y.values()).cwiseAbs().maxCoeff();
  if (residual > kMixtureTolerance) {
    throw Error(ErrorCode::kMixtureInconsistent,
                "sum_u P_U(u) P_{Y|U=u} differs from P_Y by " +
                    std::to_string(residual));
  }
  double total = 0.0;
  for (int u = 0; u < p_u.size(); ++u) {
    if (p_u[u] <= 0.0) continue;
    total += p_u[u] * KlDivergence(p_y_given_u[u], p_y);
  }
  return total;
}

namespace internal {

template <typename Reduce>
double LiftExtremum(std::span<const Distribution> p_x_given_u,
                    const Distribution& p_x, double init, Reduce reduce) {
  for (int x = 0; x < p_x.size(); ++x) {
    if (p_x[x] <= 0.0) {
      throw Error(ErrorCode::kZeroReference,
                  "P_X has zero mass at " + std::to_string(x));
    }
  }
  double result = init;
  for (const Distribution& posterior : p_x_given_u) {
    if (posterior.size() != p_x.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "posterior length differs from P_X");
    }
    for (int x = 0; x < p_x.size(); ++x) {
      result = reduce(result, std::log(posterior[x] / p_x[x]));
    }
  }
  return result;
}

}  // namespace internal

// max_{x,u} |log(P_{X|U}(x|u) / P_X(x))|; a mechanism meets the LIP budget
// eps iff this is <= eps.
inline double LipLeakage(std::span<const Distribution> p_x_given_u,
                         const Distribution& p_x) {
  return internal::LiftExtremum(
      p_x_given_u, p_x, 0.0,
      [](double acc, double log_lift) { return std::max(acc, std::abs(log_lift)); });
}

// One-sided: max_{x,u} log(P_{X|U}(x|u) / P_X(x)). Never exceeds LipLeakage.
inline double MaxLiftLeakage(std::span<const Distribution> p_x_given_u,
                             const Distribution& p_x) {
  return internal::LiftExtremum(
      p_x_given_u, p_x, -std::numeric_limits<double>::infinity(),
      [](double acc, double log_lift) { return std::max(acc, log_lift); });
}

}  // namespace lipgeo

#endif  // LIPGEO_PROBABILITY_HPP_
