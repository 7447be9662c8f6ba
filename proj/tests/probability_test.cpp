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

#include "lipgeo/probability.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace lipgeo {
namespace {

using ::lipgeo::testing::Example1;

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lipgeo::Error thrown";
  return ErrorCode::kParseError;
}

Matrix M2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Vector V2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

TEST(DistributionTest, AcceptsNormalizedVector) {
  const Distribution d{0.2, 0.3, 0.5};
  EXPECT_EQ(d.size(), 3);
  EXPECT_DOUBLE_EQ(d[2], 0.5);
  EXPECT_TRUE(d.IsStrictlyPositive());
}

TEST(DistributionTest, RejectsNegativeEntry) {
  EXPECT_EQ(CodeOf([] { Distribution{-0.1, 1.1}; }),
            ErrorCode::kInvalidDistribution);
}

TEST(DistributionTest, RejectsNonFiniteEntry) {
  EXPECT_EQ(CodeOf([] {
              Distribution{std::numeric_limits<double>::quiet_NaN(), 1.0};
            }),
            ErrorCode::kInvalidDistribution);
}

TEST(DistributionTest, RejectsWrongTotal) {
  EXPECT_EQ(CodeOf([] { Distribution{0.6, 0.6}; }), ErrorCode::kNotNormalized);
}

TEST(DistributionTest, ToleranceIsRespected) {
  EXPECT_NO_THROW(Distribution(V2(0.5, 0.5 + 5e-10)));
  EXPECT_EQ(CodeOf([] { Distribution(V2(0.5, 0.5 + 5e-9)); }),
            ErrorCode::kNotNormalized);
}

TEST(DistributionTest, ZeroEntryIsNotStrictlyPositive) {
  EXPECT_FALSE(Distribution({0.0, 1.0}).IsStrictlyPositive());
}

TEST(DistributionTest, Uniform) {
  const Distribution d = Distribution::Uniform(4);
  EXPECT_DOUBLE_EQ(d[3], 0.25);
}

TEST(StochasticKernelTest, ChecksEveryColumn) {
  EXPECT_NO_THROW(StochasticKernel(M2(0.25, 0.4, 0.75, 0.6)));
  EXPECT_EQ(CodeOf([] { StochasticKernel(M2(0.25, 0.4, 0.75, 0.7)); }),
            ErrorCode::kNotNormalized);
}

TEST(ProblemInstanceTest, Example1Marginals) {
  const ProblemInstance inst = Example1();
  EXPECT_NEAR(inst.p_x()(0), 0.3625, 1e-15);
  EXPECT_NEAR(inst.p_x()(1), 0.6375, 1e-15);
  EXPECT_EQ(inst.size(), 2);
  EXPECT_DOUBLE_EQ(inst.epsilon(), 0.01);
  EXPECT_NEAR((inst.p_x_given_y() * inst.kernel_inverse() -
               Matrix::Identity(2, 2))
                  .norm(),
              0.0, 1e-14);
}

TEST(ProblemInstanceTest, FromJointMatchesFromKernel) {
  const ProblemInstance a = Example1();
  const ProblemInstance b = ProblemInstance::FromJoint(a.p_xy(), 0.01);
  EXPECT_NEAR((a.p_x_given_y() - b.p_x_given_y()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((a.p_y() - b.p_y()).norm(), 0.0, 1e-15);
}

TEST(ProblemInstanceTest, Errors) {
  EXPECT_EQ(CodeOf([] { ProblemInstance::FromJoint(Matrix::Constant(2, 3, 1.0 / 6), 0.1); }),
            ErrorCode::kNotSquare);
  EXPECT_EQ(CodeOf([] { ProblemInstance::FromJoint(M2(0.5, 0.5, 0.5, 0.5), 0.1); }),
            ErrorCode::kNotNormalized);
  // Zero column: P_Y(1) = 0.
  EXPECT_EQ(CodeOf([] { ProblemInstance::FromJoint(M2(0.5, 0.0, 0.5, 0.0), 0.1); }),
            ErrorCode::kZeroMarginal);
  // Identical columns.
  EXPECT_EQ(CodeOf([] {
              ProblemInstance::FromKernel(M2(0.3, 0.3, 0.7, 0.7), V2(0.5, 0.5), 0.1);
            }),
            ErrorCode::kSingularKernel);
  EXPECT_EQ(CodeOf([] {
              ProblemInstance::FromKernel(M2(0.25, 0.4, 0.75, 0.6), V2(0.5, 0.5), -0.1);
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] {
              ProblemInstance::FromKernel(M2(0.25, 0.4, 0.75, 0.6),
                                          Vector::Constant(3, 1.0 / 3), 0.1);
            }),
            ErrorCode::kLengthMismatch);
}

TEST(ProblemInstanceTest, ZeroBudgetIsAllowed) {
  EXPECT_NO_THROW(Example1(0.0));
  EXPECT_DOUBLE_EQ(Example1().WithEpsilon(0.0).epsilon(), 0.0);
}

TEST(KlDivergenceTest, FrozenValue) {
  const double shift = 0.024169;
  EXPECT_NEAR(KlDivergence(V2(0.25 - shift, 0.75 + shift), V2(0.25, 0.75)),
              0.00159317211032189827, 1e-15);
}

TEST(KlDivergenceTest, IdenticalIsZeroAndZeroLogZero) {
  EXPECT_EQ(KlDivergence(V2(0.3, 0.7), V2(0.3, 0.7)), 0.0);
  EXPECT_NEAR(KlDivergence(V2(0.0, 1.0), V2(0.5, 0.5)), std::log(2.0), 1e-15);
}

TEST(KlDivergenceTest, ZeroReference) {
  EXPECT_EQ(CodeOf([] { KlDivergence(V2(0.5, 0.5), V2(1.0, 0.0)); }),
            ErrorCode::kZeroReference);
}

TEST(MutualInformationTest, IndependentIsZero) {
  const Distribution p_y{0.25, 0.75};
  const std::vector<Distribution> cond = {p_y, p_y};
  EXPECT_EQ(MutualInformation(Distribution{0.5, 0.5}, cond, p_y), 0.0);
}

TEST(MutualInformationTest, DeterministicChannelGivesEntropy) {
  const Distribution p_y{0.25, 0.75};
  const std::vector<Distribution> cond = {Distribution{1.0, 0.0},
                                          Distribution{0.0, 1.0}};
  const double h = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
  EXPECT_NEAR(MutualInformation(Distribution{0.25, 0.75}, cond, p_y), h,
              1e-15);
}

TEST(MutualInformationTest, RejectsInconsistentMixture) {
  const Distribution p_y{0.25, 0.75};
  const std::vector<Distribution> cond = {Distribution{0.5, 0.5},
                                          Distribution{0.5, 0.5}};
  EXPECT_EQ(CodeOf([&] { MutualInformation(Distribution{0.5, 0.5}, cond, p_y); }),
            ErrorCode::kMixtureInconsistent);
  EXPECT_EQ(CodeOf([&] {
              MutualInformation(Distribution{0.2, 0.3, 0.5}, cond, p_y);
            }),
            ErrorCode::kLengthMismatch);
}

TEST(LeakageTest, LipAndMaxLift) {
  const Distribution p_x{0.5, 0.5};
  const std::vector<Distribution> post = {Distribution{0.6, 0.4},
                                          Distribution{0.4, 0.6}};
  EXPECT_NEAR(LipLeakage(post, p_x), std::abs(std::log(0.8)), 1e-15);
  EXPECT_NEAR(MaxLiftLeakage(post, p_x), std::log(1.2), 1e-15);
  EXPECT_LE(MaxLiftLeakage(post, p_x), LipLeakage(post, p_x));
}

TEST(LeakageTest, PriorHasNoLeakage) {
  const Distribution p_x{0.3625, 0.6375};
  const std::vector<Distribution> post = {p_x};
  EXPECT_EQ(LipLeakage(post, p_x), 0.0);
  EXPECT_EQ(MaxLiftLeakage(post, p_x), 0.0);
}

TEST(LeakageTest, ZeroPriorIsRejected) {
  const std::vector<Distribution> post = {Distribution{0.5, 0.5}};
  EXPECT_EQ(CodeOf([&] { LipLeakage(post, Distribution{1.0, 0.0}); }),
            ErrorCode::kZeroReference);
}

}  // namespace
}  // namespace lipgeo
