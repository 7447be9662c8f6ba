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

// Closed-form mechanism synthesis along the principal direction L*.
//
// Each constraint family turns the privacy requirement into a per-coordinate
// box on L_u:
//
//   kLipFirst       -sqrt(P_X)/(1+eps) <= L <= sqrt(P_X)
//   kLipSecond      (e^-eps - 1)/eps sqrt(P_X) <= L <= (e^eps - 1)/eps sqrt(P_X)
//   kMaxLiftFirst   L <= sqrt(P_X)
//   kMaxLiftSecond  L <= (e^eps - 1)/eps sqrt(P_X)
//
// The first-approach boxes are sufficient for the exact constraint; the
// second-approach boxes are equivalent to it. A binary U with L_1 along +L*
// and L_2 along -L*, each scaled to touch its box, and weights chosen so that
// sum_u P_U(u) L_u = 0, attains the bounds below (exactly when K = 2).

#ifndef LIPGEO_MECHANISMS_HPP_
#define LIPGEO_MECHANISMS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lipgeo/error.hpp"
#include "lipgeo/geometry.hpp"
#include "lipgeo/probability.hpp"

namespace lipgeo {

// Coordinates of L* smaller than this impose no scaling constraint.
inline constexpr double kZeroCoordinate = 1e-12;
inline constexpr double kAuditTolerance = 1e-9;

enum class ConstraintFamily {
  kLipFirst,
  kLipSecond,
  kMaxLiftFirst,
  kMaxLiftSecond,
};

inline bool IsFirstApproach(ConstraintFamily family) {
  return family == ConstraintFamily::kLipFirst ||
         family == ConstraintFamily::kMaxLiftFirst;
}

inline bool IsMaxLift(ConstraintFamily family) {
  return family == ConstraintFamily::kMaxLiftFirst ||
         family == ConstraintFamily::kMaxLiftSecond;
}

inline std::string_view ApproachName(ConstraintFamily family) {
  return IsFirstApproach(family) ? "first" : "second";
}

inline std::string_view ConstraintName(ConstraintFamily family) {
  return IsMaxLift(family) ? "maxlift" : "lip";
}

inline std::string FamilyName(ConstraintFamily family) {
  return std::string(ConstraintName(family)) + "_" +
         std::string(ApproachName(family));
}

inline ConstraintFamily FamilyFromNames(std::string_view approach,
                                        std::string_view constraint) {
  const bool first = approach == "first";
  if (!first && approach != "second") {
    throw Error(ErrorCode::kInvalidArgument,
                "approach must be 'first' or 'second', got '" +
                    std::string(approach) + "'");
  }
  if (constraint == "lip") {
    return first ? ConstraintFamily::kLipFirst : ConstraintFamily::kLipSecond;
  }
  if (constraint == "maxlift") {
    return first ? ConstraintFamily::kMaxLiftFirst
                 : ConstraintFamily::kMaxLiftSecond;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "constraint must be 'lip' or 'maxlift', got '" +
                  std::string(constraint) + "'");
}

// (e^eps - 1)/eps, continuous at 0.
inline double UpperLiftSlope(double epsilon) {
  return epsilon == 0.0 ? 1.0 : std::expm1(epsilon) / epsilon;
}

// (e^-eps - 1)/eps, continuous at 0.
inline double LowerLiftSlope(double epsilon) {
  return epsilon == 0.0 ? -1.0 : std::expm1(-epsilon) / epsilon;
}

struct ConstraintBox {
  Vector upper;
  std::optional<Vector> lower;  // absent for the one-sided max-lift families

  bool Contains(const Vector& l, double tolerance = kAuditTolerance) const {
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      if (l(i) > upper(i) + tolerance) return false;
      if (lower && l(i) < (*lower)(i) - tolerance) return false;
    }
    return true;
  }
};

inline ConstraintBox BoxFor(ConstraintFamily family, const Vector& sqrt_px,
                            double epsilon) {
  switch (family) {
    case ConstraintFamily::kLipFirst:
      return {sqrt_px, Vector(-sqrt_px / (1.0 + epsilon))};
    case ConstraintFamily::kLipSecond:
      return {UpperLiftSlope(epsilon) * sqrt_px,
              Vector(LowerLiftSlope(epsilon) * sqrt_px)};
    case ConstraintFamily::kMaxLiftFirst:
      return {sqrt_px, std::nullopt};
    case ConstraintFamily::kMaxLiftSecond:
      return {UpperLiftSlope(epsilon) * sqrt_px, std::nullopt};
  }
  return {sqrt_px, std::nullopt};
}

// Largest t >= 0 with t * d inside the box; +inf when no coordinate binds.
inline double LargestFeasibleScale(const ConstraintBox& box, const Vector& d) {
  double t = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) > kZeroCoordinate) {
      t = std::min(t, box.upper(i) / d(i));
    } else if (d(i) < -kZeroCoordinate && box.lower) {
      t = std::min(t, (*box.lower)(i) / d(i));
    }
  }
  return t;
}

// First approach: plus/minus factors are the divisors gamma1, gamma2 >= 1 and
// the symmetric factor is gamma_max. Second approach: they are the
// multipliers lambda1, lambda2 > 0 and lambda'.
struct ScalingFactors {
  ConstraintFamily family = ConstraintFamily::kLipFirst;
  double plus_factor = 1.0;
  double minus_factor = 1.0;
  double symmetric_factor = 1.0;
  // Both +L* and -L* already satisfy the box without scaling.
  bool both_unscaled_feasible = false;

  // Multiplier actually applied to +L* (resp. -L*).
  double plus_scale() const {
    return IsFirstApproach(family) ? 1.0 / plus_factor : plus_factor;
  }
  double minus_scale() const {
    return IsFirstApproach(family) ? 1.0 / minus_factor : minus_factor;
  }
  double symmetric_scale() const {
    return IsFirstApproach(family) ? 1.0 / symmetric_factor : symmetric_factor;
  }
};

inline ScalingFactors ComputeScalingFactors(const GeometryContext& ctx,
                                            ConstraintFamily family,
                                            double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "scaling factors need 0 < eps < 1, got " +
                    std::to_string(epsilon));
  }
  if (ctx.sigma_max - 1.0 < kDegenerateSpectrumGap) {
    throw Error(ErrorCode::kDegenerateSpectrum,
                "geometry has no principal direction");
  }
  const ConstraintBox box = BoxFor(family, ctx.sqrt_px, epsilon);
  const double t_plus = LargestFeasibleScale(box, ctx.l_star);
  const double t_minus = LargestFeasibleScale(box, Vector(-ctx.l_star));

  ScalingFactors f;
  f.family = family;
  f.both_unscaled_feasible = t_plus >= 1.0 && t_minus >= 1.0;
  if (IsFirstApproach(family)) {
    f.plus_factor = std::max(1.0, 1.0 / t_plus);
    f.minus_factor = std::max(1.0, 1.0 / t_minus);
    f.symmetric_factor = std::max(f.plus_factor, f.minus_factor);
  } else {
    f.plus_factor = t_plus;
    f.minus_factor = t_minus;
    f.symmetric_factor = std::min(t_plus, t_minus);
  }
  return f;
}

struct UtilityBounds {
  double lower = 0.0;
  std::optional<double> point;
  double upper = 0.0;
  bool exact_for_k2 = false;
  // The weaker bound from a single common scaling of +-L* (gamma_max or
  // lambda').
  double symmetric_lower = 0.0;
};

inline UtilityBounds ComputeUtilityBounds(const GeometryContext& ctx,
                                          const ScalingFactors& factors,
                                          double epsilon, int k) {
  const double scale = 0.5 * epsilon * epsilon * ctx.sigma_max * ctx.sigma_max;
  UtilityBounds b;
  if (IsFirstApproach(factors.family)) {
    b.lower = scale / (factors.plus_factor * factors.minus_factor);
    b.symmetric_lower =
        scale / (factors.symmetric_factor * factors.symmetric_factor);
    b.upper = scale;
  } else {
    b.lower = scale * factors.plus_factor * factors.minus_factor;
    b.symmetric_lower =
        scale * factors.symmetric_factor * factors.symmetric_factor;
    const double e = std::expm1(epsilon);
    b.upper = 0.5 * ctx.sigma_max * ctx.sigma_max * e * e;
  }
  if (factors.family == ConstraintFamily::kMaxLiftFirst &&
      factors.both_unscaled_feasible) {
    // Uniform U with L_1 = L*, L_2 = -L* is optimal for any K.
    b.lower = scale;
    b.point = scale;
  }
  if (k == 2) {
    b.point = b.lower;
    b.exact_for_k2 = true;
  }
  return b;
}

struct Mechanism {
  ConstraintFamily family = ConstraintFamily::kLipFirst;
  double epsilon = 0.0;
  Distribution p_u;
  std::vector<Direction> directions;
  std::vector<Distribution> p_x_given_u;
  std::vector<Distribution> p_y_given_u;
  // p_xyu[u](x, y) = P_{X|Y}(x|y) P_{Y|U}(y|u) P_U(u).
  std::vector<Matrix> p_xyu;
  double exact_utility = 0.0;
  double exact_lip = 0.0;
  double exact_maxlift = 0.0;
  double approx_utility = 0.0;
  // False when eps is beyond the family's validity threshold; the mechanism
  // is still built, only the o(eps^2) accuracy guarantee lapses.
  bool in_validity_range = true;
  // Max-lift only: a direction was shortened to keep P_{Y|U} nonnegative.
  bool simplex_capped = false;

  int u_size() const { return p_u.size(); }
};

inline double ValidityThreshold(const GeometryContext& ctx,
                                ConstraintFamily family) {
  return IsFirstApproach(family) ? ctx.first_threshold()
                                 : ctx.second_threshold();
}

// Builds the full mechanism (conditionals, joint, exact audit values) from
// weights and directions.
inline Mechanism AssembleMechanism(const ProblemInstance& inst,
                                   const GeometryContext& ctx,
                                   ConstraintFamily family, double epsilon,
                                   const Distribution& p_u,
                                   std::vector<Direction> directions) {
  std::vector<Distribution> p_y_given_u =
      InducedConditionals(inst, directions, epsilon);
  std::vector<Distribution> p_x_given_u;
  std::vector<Matrix> p_xyu;
  for (int u = 0; u < p_u.size(); ++u) {
    const Vector& q = p_y_given_u[u].values();
    Vector x = inst.p_x_given_y() * q;
    x = x.cwiseMax(0.0);
    p_x_given_u.emplace_back(x, kMixtureTolerance);
    p_xyu.push_back(inst.p_x_given_y() * q.asDiagonal() * p_u[u]);
  }
  const Distribution p_x = inst.px_distribution();
  Mechanism m{
      .family = family,
      .epsilon = epsilon,
      .p_u = p_u,
      .directions = std::move(directions),
      .p_x_given_u = std::move(p_x_given_u),
      .p_y_given_u = std::move(p_y_given_u),
      .p_xyu = std::move(p_xyu),
  };
  m.exact_utility =
      MutualInformation(m.p_u, m.p_y_given_u, inst.py_distribution());
  m.exact_lip = LipLeakage(m.p_x_given_u, p_x);
  m.exact_maxlift = MaxLiftLeakage(m.p_x_given_u, p_x);
  m.approx_utility = ApproxMiSecondOrder(ctx, m.p_u, m.directions, epsilon);
  m.in_validity_range = epsilon < ValidityThreshold(ctx, family);
  return m;
}

namespace internal {

// Largest t in (0, 1] keeping P_Y + t * eps P_{X|Y}^{-1} [sqrt(P_X)] l >= 0.
inline double SimplexCap(const ProblemInstance& inst, const Vector& sqrt_px,
                         const Vector& l, double epsilon) {
  const Vector shift =
      epsilon * (inst.kernel_inverse() * sqrt_px.cwiseProduct(l));
  double t = 1.0;
  for (Eigen::Index y = 0; y < shift.size(); ++y) {
    if (shift(y) < 0.0) t = std::min(t, inst.p_y()(y) / -shift(y));
  }
  return t;
}

}  // namespace internal

// Binary-U mechanism: L_1 = s_1 L*, L_2 = -s_2 L* with P_U = [s_2, s_1] /
// (s_1 + s_2), where s = 1/gamma (first approach) or lambda (second). The
// one-sided max-lift boxes do not keep P_{Y|U} nonnegative on their own, so
// for those families each scale is additionally capped at the simplex
// boundary.
inline Mechanism BuildMechanism(const ProblemInstance& inst,
                                const GeometryContext& ctx,
                                const ScalingFactors& factors,
                                double epsilon) {
  double s1 = factors.plus_scale();
  double s2 = factors.minus_scale();
  if (!(s1 > 0.0 && s2 > 0.0) || !std::isfinite(s1) || !std::isfinite(s2)) {
    throw Error(ErrorCode::kInvalidArgument,
                "scaling factors must give finite positive scales");
  }
  bool capped = false;
  if (IsMaxLift(factors.family)) {
    const double t1 =
        internal::SimplexCap(inst, ctx.sqrt_px, s1 * ctx.l_star, epsilon);
    const double t2 =
        internal::SimplexCap(inst, ctx.sqrt_px, -s2 * ctx.l_star, epsilon);
    capped = t1 < 1.0 || t2 < 1.0;
    s1 *= t1;
    s2 *= t2;
  }
  Vector weights(2);
  weights << s2, s1;
  weights /= weights.sum();
  const Distribution p_u(weights);
  std::vector<Direction> dirs = {Direction{s1 * ctx.l_star},
                                 Direction{-s2 * ctx.l_star}};
  Mechanism m = AssembleMechanism(inst, ctx, factors.family, epsilon, p_u,
                                  std::move(dirs));
  m.simplex_capped = capped;
  return m;
}

struct AuditReport {
  double exact_utility = 0.0;
  double exact_lip = 0.0;
  double exact_maxlift = 0.0;
  double y_mixture_residual = 0.0;
  double x_mixture_residual = 0.0;
  double markov_residual = 0.0;
  double joint_residual = 0.0;
  // Only meaningful when the mechanism carries directions.
  double direction_mixture_residual = 0.0;
  double orthogonality_residual = 0.0;
  double direction_residual = 0.0;

  bool structure_invalid = false;
  bool mixture_inconsistent = false;
  bool markov_violated = false;
  bool joint_inconsistent = false;
  bool leakage_exceeded = false;
  bool epsilon_out_of_range = false;  // warning only
  std::string structure_message;

  bool passed() const {
    return !structure_invalid && !mixture_inconsistent && !markov_violated &&
           !joint_inconsistent && !leakage_exceeded;
  }

  std::vector<std::string> Flags() const {
    std::vector<std::string> flags;
    if (structure_invalid) flags.push_back("StructureInvalid");
    if (mixture_inconsistent) flags.push_back("MixtureInconsistent");
    if (markov_violated) flags.push_back("MarkovViolated");
    if (joint_inconsistent) flags.push_back("JointInconsistent");
    if (leakage_exceeded) flags.push_back("LeakageExceeded");
    if (epsilon_out_of_range) flags.push_back("EpsilonOutOfRange");
    return flags;
  }
};

// Recomputes every mechanism invariant and both exact leakages from scratch.
// Reports problems through flags; never throws.
inline AuditReport AuditMechanism(const ProblemInstance& inst,
                                  const Mechanism& mech) {
  AuditReport r;
  const int k = inst.size();
  const int n = mech.p_u.size();
  auto structure = [&](const std::string& msg) {
    r.structure_invalid = true;
    r.structure_message = msg;
    return r;
  };
  if (static_cast<int>(mech.p_y_given_u.size()) != n ||
      static_cast<int>(mech.p_x_given_u.size()) != n) {
    return structure("conditional counts do not match |U|");
  }
  for (int u = 0; u < n; ++u) {
    if (mech.p_y_given_u[u].size() != k || mech.p_x_given_u[u].size() != k) {
      return structure("conditional " + std::to_string(u) +
                       " does not have length K");
    }
  }
  if (!mech.directions.empty() && static_cast<int>(mech.directions.size()) != n) {
    return structure("direction count does not match |U|");
  }
  if (!mech.p_xyu.empty() && static_cast<int>(mech.p_xyu.size()) != n) {
    return structure("joint slice count does not match |U|");
  }

  const Distribution p_x = inst.px_distribution();
  Vector y_mix = Vector::Zero(k);
  Vector x_mix = Vector::Zero(k);
  for (int u = 0; u < n; ++u) {
    const Vector& q = mech.p_y_given_u[u].values();
    const Vector& x = mech.p_x_given_u[u].values();
    y_mix += mech.p_u[u] * q;
    x_mix += mech.p_u[u] * x;
    r.markov_residual = std::max(
        r.markov_residual, (x - inst.p_x_given_y() * q).cwiseAbs().maxCoeff());
    if (mech.p_u[u] > 0.0) {
      r.exact_utility += mech.p_u[u] * KlDivergence(q, inst.p_y());
    }
    if (!mech.p_xyu.empty()) {
      const Matrix& slice = mech.p_xyu[u];
      if (slice.rows() != k || slice.cols() != k) {
        return structure("joint slice " + std::to_string(u) + " is not KxK");
      }
      const Matrix expected =
          inst.p_x_given_y() * q.asDiagonal() * mech.p_u[u];
      r.joint_residual = std::max(r.joint_residual,
                                  (slice - expected).cwiseAbs().maxCoeff());
    }
  }
  r.y_mixture_residual = (y_mix - inst.p_y()).cwiseAbs().maxCoeff();
  r.x_mixture_residual = (x_mix - inst.p_x()).cwiseAbs().maxCoeff();

  if (!mech.directions.empty()) {
    const Vector sqrt_px = inst.p_x().cwiseSqrt();
    Vector l_mix = Vector::Zero(k);
    for (int u = 0; u < n; ++u) {
      const Vector& l = mech.directions[u].l;
      if (l.size() != k) {
        return structure("direction " + std::to_string(u) +
                         " does not have length K");
      }
      l_mix += mech.p_u[u] * l;
      r.orthogonality_residual =
          std::max(r.orthogonality_residual, std::abs(l.dot(sqrt_px)));
      const Vector predicted =
          inst.p_x() + mech.epsilon * sqrt_px.cwiseProduct(l);
      r.direction_residual =
          std::max(r.direction_residual,
                   (predicted - mech.p_x_given_u[u].values()).cwiseAbs().maxCoeff());
    }
    r.direction_mixture_residual = l_mix.cwiseAbs().maxCoeff();
  }

  r.exact_lip = LipLeakage(mech.p_x_given_u, p_x);
  r.exact_maxlift = MaxLiftLeakage(mech.p_x_given_u, p_x);

  r.mixture_inconsistent = r.y_mixture_residual > kAuditTolerance ||
                           r.x_mixture_residual > kAuditTolerance ||
                           r.direction_mixture_residual > kAuditTolerance ||
                           r.orthogonality_residual > kAuditTolerance ||
                           r.direction_residual > kAuditTolerance;
  r.markov_violated = r.markov_residual > kAuditTolerance;
  r.joint_inconsistent = r.joint_residual > kAuditTolerance;
  const double leakage = IsMaxLift(mech.family) ? r.exact_maxlift : r.exact_lip;
  r.leakage_exceeded = !(leakage <= mech.epsilon + kAuditTolerance);
  try {
    const GeometryContext ctx = BuildGeometry(inst);
    r.epsilon_out_of_range =
        !(mech.epsilon < ValidityThreshold(ctx, mech.family));
  } catch (const Error&) {
    r.epsilon_out_of_range = true;
  }
  return r;
}

}  // namespace lipgeo

#endif  // LIPGEO_MECHANISMS_HPP_
