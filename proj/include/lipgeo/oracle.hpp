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

// Ground truth for small alphabets: exhaustive grid search over mechanisms
// judged only by exact LIP leakage and exact I(U;Y), plus the comparison
// curves (strong chi^2 baseline, approximation error tables, bounds report).

#ifndef LIPGEO_ORACLE_HPP_
#define LIPGEO_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipgeo/error.hpp"
#include "lipgeo/geometry.hpp"
#include "lipgeo/mechanisms.hpp"
#include "lipgeo/parallel.hpp"
#include "lipgeo/probability.hpp"

namespace lipgeo {

inline constexpr int kMaxOracleParameters = 6;
inline constexpr int kMinOracleResolution = 10;
inline constexpr double kOracleLeakageTolerance = 1e-12;

enum class OracleGrid {
  // Grid over the LIP-feasible posteriors P_{X|U=u} and the weights P_U; the
  // last posterior is fixed by the mixture constraint, and the largest
  // feasible weight is tried exactly in addition to the grid weights.
  kPosterior,
  // Uniform grid of step 1/resolution over each column of P_{U|Y}.
  kKernel,
};

struct OracleOptions {
  int u_cardinality = 2;
  int resolution = 1000;
  OracleGrid grid = OracleGrid::kPosterior;
  int threads = 0;  // 0: ThreadCount()
};

struct OracleResult {
  StochasticKernel best_kernel;  // P_{U|Y}, |U| x K
  double best_utility = 0.0;
  double best_leakage = 0.0;
  int grid_resolution = 0;
  int u_cardinality = 0;
  OracleGrid grid = OracleGrid::kPosterior;
  std::uint64_t candidates = 0;
};

namespace internal {

struct Incumbent {
  double utility = -std::numeric_limits<double>::infinity();
  std::uint64_t ordinal = 0;
  std::vector<double> weights;   // P_U
  std::vector<Vector> y_posteriors;  // P_{Y|U=u}; ignored when weight is 0
  std::uint64_t candidates = 0;

  void Offer(double value, std::uint64_t at, const std::vector<double>& w,
             const std::vector<Vector>& q) {
    if (value > utility) {
      utility = value;
      ordinal = at;
      weights = w;
      y_posteriors = q;
    }
  }
};

// All compositions of `total` into `parts` nonnegative integers, in
// lexicographic order.
inline std::vector<std::vector<int>> Compositions(int total, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(parts, 0);
  auto recurse = [&](auto&& self, int index, int remaining) -> void {
    if (index == parts - 1) {
      current[index] = remaining;
      out.push_back(current);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      current[index] = v;
      self(self, index + 1, remaining - v);
    }
  };
  recurse(recurse, 0, total);
  return out;
}

inline bool WithinLipBudget(const Vector& x, const Vector& p_x,
                            double epsilon) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) > 0.0)) return false;
    if (std::abs(std::log(x(i) / p_x(i))) > epsilon + kOracleLeakageTolerance) {
      return false;
    }
  }
  return true;
}

inline Vector ClampTinyNegatives(Vector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) < 0.0 && v(i) > -1e-12) v(i) = 0.0;
  }
  return v;
}

struct GridPosterior {
  Vector x;  // P_{X|U=u}
  Vector q;  // P_{Y|U=u}
  double divergence = 0.0;  // D(q || P_Y)
};

// Posteriors P_{X|U=u} on a grid over the LIP box intersected with the
// simplex. The first K-1 coordinates take r+1 evenly spaced values between
// their tightened bounds (endpoints exact); the last is 1 - sum.
inline std::vector<GridPosterior> FeasiblePosteriors(
    const ProblemInstance& inst, double epsilon, int resolution) {
  const int k = inst.size();
  const Vector& p_x = inst.p_x();
  const Vector lo_box = p_x * std::exp(-epsilon);
  const Vector hi_box = (p_x * std::exp(epsilon)).cwiseMin(1.0);
  Vector lo = lo_box;
  Vector hi = hi_box;
  const double lo_sum = lo_box.sum();
  const double hi_sum = hi_box.sum();
  for (int i = 0; i < k; ++i) {
    lo(i) = std::max(lo_box(i), 1.0 - (hi_sum - hi_box(i)));
    hi(i) = std::min(hi_box(i), 1.0 - (lo_sum - lo_box(i)));
  }
  std::vector<GridPosterior> out;
  std::vector<int> index(std::max(k - 1, 0), 0);
  const Vector& p_y = inst.p_y();
  while (true) {
    Vector x(k);
    double used = 0.0;
    for (int i = 0; i < k - 1; ++i) {
      x(i) = index[i] == resolution
                 ? hi(i)
                 : lo(i) + (hi(i) - lo(i)) * index[i] / resolution;
      used += x(i);
    }
    x(k - 1) = 1.0 - used;
    if (WithinLipBudget(x, p_x, epsilon)) {
      const Vector q = ClampTinyNegatives(inst.kernel_inverse() * x);
      if (q.minCoeff() >= 0.0) {
        out.push_back({x, q, KlDivergence(q, p_y)});
      }
    }
    int pos = k - 2;
    while (pos >= 0 && index[pos] == resolution) index[pos--] = 0;
    if (pos < 0) break;
    ++index[pos];
  }
  return out;
}

inline Incumbent SearchPosteriorBranch(const ProblemInstance& inst,
                                       double epsilon, int resolution,
                                       int n,
                                       const std::vector<GridPosterior>& grid,
                                       const std::vector<std::vector<int>>& rho,
                                       int outer) {
  const int k = inst.size();
  const Vector& p_x = inst.p_x();
  const Vector& p_y = inst.p_y();
  const Vector lo_box = p_x * std::exp(-epsilon);
  const Vector hi_box = (p_x * std::exp(epsilon)).cwiseMin(1.0);
  const int free_posteriors = n - 1;
  const int g = static_cast<int>(grid.size());

  Incumbent best;
  std::uint64_t ordinal = 0;
  std::vector<int> pick(free_posteriors, 0);
  pick[0] = outer;
  std::vector<double> weights(n);
  std::vector<Vector> qs(n);

  while (true) {
    for (const std::vector<int>& parts : rho) {
      Vector m_x = Vector::Zero(k);
      Vector m_q = Vector::Zero(k);
      double d_part = 0.0;
      for (int u = 0; u < free_posteriors; ++u) {
        const double share = static_cast<double>(parts[u]) / resolution;
        const GridPosterior& post = grid[pick[u]];
        m_x += share * post.x;
        m_q += share * post.q;
        d_part += share * post.divergence;
      }
      const Vector d_x = p_x - m_x;
      const Vector d_q = p_y - m_q;
      double t_max = std::numeric_limits<double>::infinity();
      for (int i = 0; i < k; ++i) {
        if (d_x(i) > 1e-15) {
          t_max = std::min(t_max, (hi_box(i) - p_x(i)) / d_x(i));
        } else if (d_x(i) < -1e-15) {
          t_max = std::min(t_max, (lo_box(i) - p_x(i)) / d_x(i));
        }
        if (d_q(i) < -1e-15) t_max = std::min(t_max, p_y(i) / -d_q(i));
      }

      auto evaluate = [&](double s) {
        ++best.candidates;
        const std::uint64_t at = ordinal++;
        const double t = s / (1.0 - s);
        const Vector x_last = p_x + t * d_x;
        if (!WithinLipBudget(x_last, p_x, epsilon)) return false;
        const Vector q_last = ClampTinyNegatives(p_y + t * d_q);
        if (q_last.minCoeff() < 0.0) return false;
        const double utility =
            s * d_part + (1.0 - s) * KlDivergence(q_last, p_y);
        if (utility > best.utility) {
          for (int u = 0; u < free_posteriors; ++u) {
            weights[u] = s * parts[u] / resolution;
            qs[u] = grid[pick[u]].q;
          }
          weights[n - 1] = 1.0 - s;
          qs[n - 1] = q_last;
          best.Offer(utility, at, weights, qs);
        }
        return true;
      };

      for (int j = 1; j < resolution; ++j) {
        const double s = static_cast<double>(j) / resolution;
        if (s / (1.0 - s) > t_max * (1.0 + 1e-12)) break;
        evaluate(s);
      }
      if (std::isfinite(t_max) && t_max > 0.0) evaluate(t_max / (1.0 + t_max));
    }

    int pos = free_posteriors - 1;
    while (pos >= 1 && pick[pos] == g - 1) pick[pos--] = 0;
    if (pos < 1) break;
    ++pick[pos];
  }
  return best;
}

inline Incumbent SearchKernelBranch(const ProblemInstance& inst,
                                    double epsilon, int resolution, int n,
                                    const std::vector<std::vector<int>>& columns,
                                    int outer) {
  const int k = inst.size();
  const Vector& p_x = inst.p_x();
  const Vector& p_y = inst.p_y();
  const int c = static_cast<int>(columns.size());

  Incumbent best;
  std::uint64_t ordinal = 0;
  std::vector<int> pick(k, 0);
  pick[0] = outer;
  std::vector<double> weights(n);
  std::vector<Vector> qs(n, Vector::Zero(k));

  while (true) {
    ++best.candidates;
    const std::uint64_t at = ordinal++;
    bool feasible = true;
    double utility = 0.0;
    for (int u = 0; u < n && feasible; ++u) {
      double p_u = 0.0;
      for (int y = 0; y < k; ++y) {
        p_u += columns[pick[y]][u] * p_y(y);
      }
      p_u /= resolution;
      weights[u] = p_u;
      if (p_u <= 0.0) {
        qs[u] = p_y;
        continue;
      }
      Vector q(k);
      for (int y = 0; y < k; ++y) {
        q(y) = columns[pick[y]][u] * p_y(y) / (resolution * p_u);
      }
      if (!WithinLipBudget(inst.p_x_given_y() * q, p_x, epsilon)) {
        feasible = false;
        break;
      }
      utility += p_u * KlDivergence(q, p_y);
      qs[u] = q;
    }
    if (feasible) best.Offer(utility, at, weights, qs);

    int pos = k - 1;
    while (pos >= 1 && pick[pos] == c - 1) pick[pos--] = 0;
    if (pos < 1) break;
    ++pick[pos];
  }
  return best;
}

}  // namespace internal

// Exact optimum of the LIP-constrained problem over a finite grid of
// mechanisms with |U| = u_cardinality. Feasibility uses exact LIP with a
// 1e-12 tolerance. Ties go to the first candidate in enumeration order, so
// the result does not depend on the thread count.
inline OracleResult ExhaustiveSearch(const ProblemInstance& inst,
                                     const OracleOptions& options) {
  const int k = inst.size();
  const int n = options.u_cardinality;
  const int r = options.resolution;
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument, "|U| must be at least 2");
  }
  if (r < kMinOracleResolution) {
    throw Error(ErrorCode::kInvalidArgument,
                "resolution must be at least " +
                    std::to_string(kMinOracleResolution));
  }
  if (k * (n - 1) > kMaxOracleParameters) {
    throw Error(ErrorCode::kTooManyParameters,
                std::to_string(k * (n - 1)) + " free parameters exceed " +
                    std::to_string(kMaxOracleParameters));
  }
  const double epsilon = inst.epsilon();
  const int threads = options.threads > 0 ? options.threads : ThreadCount();

  std::vector<internal::Incumbent> branches;
  if (options.grid == OracleGrid::kPosterior) {
    const std::vector<internal::GridPosterior> grid =
        internal::FeasiblePosteriors(inst, epsilon, r);
    if (grid.empty()) {
      throw Error(ErrorCode::kNoFeasiblePoint, "no feasible grid posterior");
    }
    const std::vector<std::vector<int>> rho =
        internal::Compositions(r, n - 1);
    branches.resize(grid.size());
    ParallelFor(static_cast<int>(grid.size()), threads, [&](int i) {
      branches[i] =
          internal::SearchPosteriorBranch(inst, epsilon, r, n, grid, rho, i);
    });
  } else {
    const std::vector<std::vector<int>> columns = internal::Compositions(r, n);
    branches.resize(columns.size());
    ParallelFor(static_cast<int>(columns.size()), threads, [&](int i) {
      branches[i] =
          internal::SearchKernelBranch(inst, epsilon, r, n, columns, i);
    });
  }

  const internal::Incumbent* winner = nullptr;
  std::uint64_t candidates = 0;
  for (const internal::Incumbent& b : branches) {
    candidates += b.candidates;
    if (b.utility > -std::numeric_limits<double>::infinity() &&
        (winner == nullptr || b.utility > winner->utility)) {
      winner = &b;
    }
  }
  if (winner == nullptr) {
    throw Error(ErrorCode::kNoFeasiblePoint,
                "no grid candidate satisfies the budget");
  }

  // Rebuild P_{U|Y} and re-audit it from the kernel alone.
  Matrix kernel(n, k);
  for (int u = 0; u < n; ++u) {
    for (int y = 0; y < k; ++y) {
      kernel(u, y) =
          winner->weights[u] * winner->y_posteriors[u](y) / inst.p_y()(y);
    }
  }
  for (int y = 0; y < k; ++y) kernel.col(y) /= kernel.col(y).sum();

  const Vector p_u = kernel * inst.p_y();
  std::vector<Distribution> p_y_given_u;
  std::vector<Distribution> p_x_given_u;
  Vector weights(n);
  for (int u = 0; u < n; ++u) {
    weights(u) = p_u(u);
    Vector q = p_u(u) > 0.0
                   ? Vector(kernel.row(u).transpose().cwiseProduct(inst.p_y()) /
                            p_u(u))
                   : inst.p_y();
    q /= q.sum();
    p_x_given_u.emplace_back(inst.p_x_given_y() * q, kMixtureTolerance);
    p_y_given_u.emplace_back(std::move(q), kMixtureTolerance);
  }
  const Distribution p_u_dist(weights / weights.sum(), kMixtureTolerance);
  std::vector<Distribution> active;
  for (int u = 0; u < n; ++u) {
    if (p_u(u) > 0.0) active.push_back(p_x_given_u[u]);
  }

  OracleResult result{
      .best_kernel = StochasticKernel(kernel),
      .best_utility = MutualInformation(p_u_dist, p_y_given_u,
                                        inst.py_distribution()),
      .best_leakage = LipLeakage(active, inst.px_distribution()),
      .grid_resolution = r,
      .u_cardinality = n,
      .grid = options.grid,
      .candidates = candidates,
  };
  return result;
}

inline OracleResult ExhaustiveSearch(const ProblemInstance& inst,
                                     int u_cardinality, int resolution) {
  return ExhaustiveSearch(inst, OracleOptions{.u_cardinality = u_cardinality,
                                              .resolution = resolution});
}

// Approximate optimum under the strong chi^2 criterion: 1/2 eps^2 sigma_max^2.
inline double Chi2Baseline(const GeometryContext& ctx, double epsilon) {
  return 0.5 * epsilon * epsilon * ctx.sigma_max * ctx.sigma_max;
}

struct ApproximationErrorRow {
  double epsilon = 0.0;
  ConstraintFamily family = ConstraintFamily::kLipFirst;
  double exact = 0.0;
  double second_order = 0.0;
  double third_order = 0.0;
  double err2 = 0.0;
  double err3 = 0.0;
};

// For each eps, builds the first- and second-approach LIP mechanisms and
// compares exact I(U;Y) with both local approximations.
inline std::vector<ApproximationErrorRow> ApproximationErrorReport(
    const ProblemInstance& inst, const GeometryContext& ctx,
    std::span<const double> epsilons) {
  std::vector<ApproximationErrorRow> rows;
  for (double eps : epsilons) {
    for (ConstraintFamily family :
         {ConstraintFamily::kLipFirst, ConstraintFamily::kLipSecond}) {
      ApproximationErrorRow row{.epsilon = eps, .family = family};
      if (eps > 0.0) {
        const Mechanism m = BuildMechanism(
            inst, ctx, ComputeScalingFactors(ctx, family, eps), eps);
        row.exact = m.exact_utility;
        row.second_order = ApproxMiSecondOrder(ctx, m.p_u, m.directions, eps);
        row.third_order =
            ApproxMiThirdOrder(ctx, inst, m.p_u, m.directions, eps);
        row.err2 = std::abs(row.exact - row.second_order);
        row.err3 = std::abs(row.exact - row.third_order);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

struct MechanismSummary {
  double exact_utility = 0.0;
  double exact_lip = 0.0;
  double exact_maxlift = 0.0;
};

struct BoundsReport {
  double epsilon = 0.0;
  UtilityBounds p1;
  UtilityBounds p2;
  UtilityBounds p1_prime;
  UtilityBounds p2_prime;
  double chi2_baseline = 0.0;
  std::optional<OracleResult> oracle;
  // Absent when the construction is invalid at this eps.
  std::optional<MechanismSummary> mech1;
  std::optional<MechanismSummary> mech2;
  bool in_validity_range = false;
};

inline BoundsReport ComputeBoundsReport(
    const ProblemInstance& inst, const GeometryContext& ctx, double epsilon,
    const std::optional<OracleOptions>& oracle = std::nullopt) {
  BoundsReport report;
  report.epsilon = epsilon;
  const int k = inst.size();
  auto bounds = [&](ConstraintFamily family) {
    return ComputeUtilityBounds(
        ctx, ComputeScalingFactors(ctx, family, epsilon), epsilon, k);
  };
  report.p1 = bounds(ConstraintFamily::kLipFirst);
  report.p2 = bounds(ConstraintFamily::kLipSecond);
  report.p1_prime = bounds(ConstraintFamily::kMaxLiftFirst);
  report.p2_prime = bounds(ConstraintFamily::kMaxLiftSecond);
  report.chi2_baseline = Chi2Baseline(ctx, epsilon);
  report.in_validity_range = epsilon < ctx.second_threshold();

  auto summarize =
      [&](ConstraintFamily family) -> std::optional<MechanismSummary> {
    try {
      const Mechanism m = BuildMechanism(
          inst, ctx, ComputeScalingFactors(ctx, family, epsilon), epsilon);
      return MechanismSummary{m.exact_utility, m.exact_lip, m.exact_maxlift};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidInducedDistribution) throw;
      return std::nullopt;
    }
  };
  report.mech1 = summarize(ConstraintFamily::kLipFirst);
  report.mech2 = summarize(ConstraintFamily::kLipSecond);
  if (oracle) {
    report.oracle = ExhaustiveSearch(inst.WithEpsilon(epsilon), *oracle);
  }
  return report;
}

}  // namespace lipgeo

#endif  // LIPGEO_ORACLE_HPP_
