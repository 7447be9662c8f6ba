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

// Local geometry of the privacy problem.
//
// A mechanism is described by perturbations of the prior,
//   P_{X|U=u} = P_X + eps * [sqrt(P_X)] L_u,
// with L_u orthogonal to sqrt(P_X). Under an invertible leakage matrix the
// matching useful-data conditional is
//   P_{Y|U=u} = P_Y + eps * P_{X|Y}^{-1} [sqrt(P_X)] L_u,
// and to second order I(U;Y) = 1/2 eps^2 sum_u P_U(u) |W L_u|^2 with
//   W = [sqrt(P_Y)^{-1}] P_{X|Y}^{-1} [sqrt(P_X)].
// W always has singular value 1 with right singular vector sqrt(P_X); the
// principal right singular vector L* is the utility-maximizing direction.

#ifndef LIPGEO_GEOMETRY_HPP_
#define LIPGEO_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "lipgeo/error.hpp"
#include "lipgeo/probability.hpp"

namespace lipgeo {

inline constexpr double kOrthogonalityTolerance = 1e-9;
inline constexpr double kSpectrumTieTolerance = 1e-9;
inline constexpr double kDegenerateSpectrumGap = 1e-9;

// A rescaled perturbation L_u (dimensionless, length K).
struct Direction {
  Vector l;
};

struct GeometryContext {
  Matrix w;
  Vector singular_values;  // descending
  double sigma_max = 0.0;
  Vector l_star;  // unit norm, largest-magnitude entry positive
  Vector sqrt_px;
  // Validity thresholds on eps for the first approach (c1, c2) and the second
  // approach (c1p, c2p).
  double c1 = 0.0;
  double c2 = 0.0;
  double c1p = 0.0;
  double c2p = 0.0;
  // Set when more than one singular value is within kSpectrumTieTolerance of
  // sigma_max; l_star is then the lexicographically largest candidate.
  bool spectrum_tie = false;

  int size() const { return static_cast<int>(sqrt_px.size()); }
  double first_threshold() const { return std::max(c1, c2); }
  double second_threshold() const { return std::max(c1p, c2p); }
};

inline Matrix OperatorW(const ProblemInstance& inst) {
  const Vector inv_sqrt_py = inst.p_y().cwiseSqrt().cwiseInverse();
  const Vector sqrt_px = inst.p_x().cwiseSqrt();
  return inv_sqrt_py.asDiagonal() * inst.kernel_inverse() *
         sqrt_px.asDiagonal();
}

// Flips the sign so the entry with the largest magnitude is positive (first
// such entry on exact ties).
inline Vector CanonicalSign(Vector v) {
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
  }
  if (v(arg) < 0.0) v = -v;
  return v;
}

inline GeometryContext BuildGeometry(const ProblemInstance& inst) {
  GeometryContext ctx;
  ctx.w = OperatorW(inst);
  ctx.sqrt_px = inst.p_x().cwiseSqrt();

  Eigen::JacobiSVD<Matrix> svd(ctx.w, Eigen::ComputeFullV);
  ctx.singular_values = svd.singularValues();
  ctx.sigma_max = ctx.singular_values(0);
  if (ctx.sigma_max - 1.0 < kDegenerateSpectrumGap) {
    throw Error(ErrorCode::kDegenerateSpectrum,
                "largest singular value of W is " +
                    std::to_string(ctx.sigma_max) +
                    "; no direction carries utility");
  }

  const Matrix& v = svd.matrixV();
  ctx.l_star = CanonicalSign(v.col(0));
  for (Eigen::Index i = 1; i < ctx.singular_values.size(); ++i) {
    if (ctx.sigma_max - ctx.singular_values(i) > kSpectrumTieTolerance) break;
    ctx.spectrum_tie = true;
    Vector candidate = CanonicalSign(v.col(i));
    if (std::lexicographical_compare(ctx.l_star.begin(), ctx.l_star.end(),
                                     candidate.begin(), candidate.end())) {
      ctx.l_star = candidate;
    }
  }
  ctx.l_star.normalize();

  const double min_py = inst.p_y().minCoeff();
  const Matrix& alpha = inst.kernel_inverse();
  const double max_row = (alpha.cwiseAbs() * inst.p_x()).maxCoeff();
  ctx.c1 = min_py / max_row;
  ctx.c2 = internal::SmallestSingularValue(inst.p_x_given_y()) * min_py;
  ctx.c1p = std::log1p(ctx.c1);
  ctx.c2p = std::log1p(ctx.c2);
  return ctx;
}

namespace internal {

inline void CheckDirections(const GeometryContext& ctx, const Distribution& p_u,
                            std::span<const Direction> dirs) {
  if (static_cast<int>(dirs.size()) != p_u.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "P_U has " + std::to_string(p_u.size()) + " outcomes but " +
                    std::to_string(dirs.size()) + " directions were given");
  }
  for (std::size_t u = 0; u < dirs.size(); ++u) {
    if (dirs[u].l.size() != ctx.sqrt_px.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "direction " + std::to_string(u) + " has length " +
                      std::to_string(dirs[u].l.size()));
    }
    const double dot = dirs[u].l.dot(ctx.sqrt_px);
    if (std::abs(dot) > kOrthogonalityTolerance * std::max(1.0, dirs[u].l.norm())) {
      throw Error(ErrorCode::kNotOrthogonal,
                  "direction " + std::to_string(u) +
                      " is not orthogonal to sqrt(P_X) (inner product " +
                      std::to_string(dot) + ")");
    }
  }
}

}  // namespace internal

// 1/2 eps^2 sum_u P_U(u) |W L_u|^2.
inline double ApproxMiSecondOrder(const GeometryContext& ctx,
                                  const Distribution& p_u,
                                  std::span<const Direction> dirs,
                                  double epsilon) {
  internal::CheckDirections(ctx, p_u, dirs);
  double total = 0.0;
  for (int u = 0; u < p_u.size(); ++u) {
    total += p_u[u] * (ctx.w * dirs[u].l).squaredNorm();
  }
  return 0.5 * epsilon * epsilon * total;
}

// Adds the cubic term of (1 + d) log(1 + d) = d + d^2/2 - d^3/6 + O(d^4),
// with d(y) = eps (P_{X|Y}^{-1} J_u)(y) / P_Y(y) and J_u = [sqrt(P_X)] L_u.
inline double ApproxMiThirdOrder(const GeometryContext& ctx,
                                 const ProblemInstance& inst,
                                 const Distribution& p_u,
                                 std::span<const Direction> dirs,
                                 double epsilon) {
  internal::CheckDirections(ctx, p_u, dirs);
  const double eps2 = epsilon * epsilon;
  const double eps3 = eps2 * epsilon;
  double total = 0.0;
  for (int u = 0; u < p_u.size(); ++u) {
    const Vector shift =
        inst.kernel_inverse() * ctx.sqrt_px.cwiseProduct(dirs[u].l);
    double cubic = 0.0;
    for (Eigen::Index y = 0; y < shift.size(); ++y) {
      cubic += std::pow(shift(y), 3) / (inst.p_y()(y) * inst.p_y()(y));
    }
    total += p_u[u] * (0.5 * eps2 * (ctx.w * dirs[u].l).squaredNorm() -
                       eps3 * cubic / 6.0);
  }
  return total;
}

// P_{Y|U=u} = P_Y + eps P_{X|Y}^{-1} [sqrt(P_X)] L_u for every u. Entries
// within -1e-15 of zero are clamped; anything more negative means eps is too
// large for these directions.
inline std::vector<Distribution> InducedConditionals(
    const ProblemInstance& inst, std::span<const Direction> dirs,
    double epsilon) {
  const Vector sqrt_px = inst.p_x().cwiseSqrt();
  std::vector<Distribution> out;
  out.reserve(dirs.size());
  for (std::size_t u = 0; u < dirs.size(); ++u) {
    if (dirs[u].l.size() != sqrt_px.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "direction " + std::to_string(u) + " has wrong length");
    }
    Vector q = inst.p_y() +
               epsilon * (inst.kernel_inverse() * sqrt_px.cwiseProduct(dirs[u].l));
    for (Eigen::Index y = 0; y < q.size(); ++y) {
      if (q(y) < -1e-15) {
        throw Error(ErrorCode::kInvalidInducedDistribution,
                    "P_{Y|U=" + std::to_string(u) + "}(" + std::to_string(y) +
                        ") = " + std::to_string(q(y)));
      }
      q(y) = std::max(q(y), 0.0);
    }
    out.emplace_back(std::move(q), kMixtureTolerance);
  }
  return out;
}

// Exact I(U;Y) of the mechanism induced by (P_U, {L_u}) at budget eps.
inline double ExactMiOfDirections(const ProblemInstance& inst,
                                  const Distribution& p_u,
                                  std::span<const Direction> dirs,
                                  double epsilon) {
  if (static_cast<int>(dirs.size()) != p_u.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "P_U and direction counts differ");
  }
  const std::vector<Distribution> conditionals =
      InducedConditionals(inst, dirs, epsilon);
  return MutualInformation(p_u, conditionals, inst.py_distribution());
}

}  // namespace lipgeo

#endif  // LIPGEO_GEOMETRY_HPP_
