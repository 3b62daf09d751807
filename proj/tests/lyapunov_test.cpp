#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "coopstab/dynamics.hpp"
#include "coopstab/error.hpp"
#include "coopstab/lyapunov.hpp"
#include "coopstab/switching.hpp"

using namespace coopstab;

namespace {

const Eigen::Vector3d kLBar(3.0, -3.2, 1.6);

SamplePlan lorenz_plan(double step) {
  SamplePlan plan;
  plan.state_lower = Eigen::Vector2d(-3, -3);
  plan.state_upper = Eigen::Vector2d(3, 3);
  plan.state_step = step;
  plan.input_lower = -2.0;
  plan.input_upper = 2.0;
  plan.input_step = step;
  plan.disturbances = box_vertices(Eigen::Vector3d::Constant(-0.2), Eigen::Vector3d::Constant(0.2));
  return plan;
}

InputSystem lorenz_field(const AgentModel& a) {
  return [&a](const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d) { return a.f(z, e, d); };
}

// x' = -x + u with V = x^2 / 2: dV/dt = -x^2 + x u <= -V + u^2 / 2.
SupplyPair scalar_pair() {
  SupplyPair p;
  p.value = [](const Eigen::VectorXd& x) { return 0.5 * x(0) * x(0); };
  p.gradient = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0)); };
  p.alpha1 = p.alpha2 = [](double s) { return 0.5 * s * s; };
  p.lambda = 1.0;
  p.beta = Polynomial{0.0, 0.0, 0.5};
  return p;
}

}  // namespace

TEST(Gradient, LorenzAnalyticMatchesCentralDifferences) {
  const auto a = make_lorenz_agent(kLBar);
  std::vector<Eigen::VectorXd> pts;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) pts.emplace_back(Eigen::Vector2d(u(rng), u(rng)));
  EXPECT_LT(gradient_mismatch(a.iss()->value, a.iss()->gradient, pts), 1e-6);
  // A wrong gradient is caught.
  const GradientField wrong = [](const Eigen::VectorXd& z) { return Eigen::VectorXd(z); };
  EXPECT_GT(gradient_mismatch(a.iss()->value, wrong, pts), 1e-2);
}

TEST(SupplyInequality, LorenzQuadraticBoundHolds) {
  const auto a = make_lorenz_agent(kLBar);
  const auto& iss = *a.iss();
  const auto r = verify_supply_inequality(lorenz_field(a), iss.value, iss.gradient, 4.6,
                                          [&](double e) { return iss.supply(e); }, lorenz_plan(0.1));
  EXPECT_TRUE(r.holds) << r.worst_margin << " at " << r.witness_state.transpose() << " e=" << r.witness_input;
  EXPECT_GE(r.worst_margin, 0.0);
  EXPECT_EQ(r.samples, 61u * 61u * 41u * 8u);
  EXPECT_EQ(r.scope, "holds on samples only");
}

TEST(SupplyInequality, LorenzFailsAtRateTen) {
  const auto a = make_lorenz_agent(kLBar);
  const auto& iss = *a.iss();
  const auto r = verify_supply_inequality(lorenz_field(a), iss.value, iss.gradient, 10.0,
                                          [&](double e) { return iss.supply(e); }, lorenz_plan(0.25));
  EXPECT_FALSE(r.holds);
  EXPECT_LT(r.worst_margin, 0.0);
  ASSERT_EQ(r.witness_state.size(), 2);
  // Re-evaluate the witness independently.
  const double v = iss.value(r.witness_state);
  const double vdot = iss.gradient(r.witness_state).dot(a.f(r.witness_state, r.witness_input, r.witness_disturbance));
  EXPECT_GT(vdot, -10.0 * v + iss.supply(r.witness_input));
}

TEST(SupplyInequality, OriginMarginIsExactlyZero) {
  const auto a = make_lorenz_agent(kLBar);
  const auto& iss = *a.iss();
  SamplePlan plan;
  plan.state_lower = plan.state_upper = Eigen::Vector2d::Zero();
  plan.disturbances = {Eigen::Vector3d(0.2, -0.2, 0.2)};
  const auto r = verify_supply_inequality(lorenz_field(a), iss.value, iss.gradient, 4.6,
                                          [&](double e) { return iss.supply(e); }, plan);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.worst_margin, 0.0);
  EXPECT_EQ(r.samples, 1u);
}

TEST(TwoCase, RandomizedPointwiseChecks) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<Polynomial> rhos{Polynomial{1.0}, Polynomial{0.0, 1.0}, Polynomial{1.0, 0.0, 1.0},
                                     Polynomial{0.3, 2.0, 0.0, 0.5}};
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto& rho = rhos[static_cast<std::size_t>(k) % rhos.size()];
    const double v = 10.0 * std::pow(u(rng), 2);
    const double beta = 10.0 * std::pow(u(rng), 2);
    const double lambda = 0.1 + 5.0 * u(rng);
    const double m = two_case_margin(rho, v, beta, lambda);
    const double scale = std::abs(rho(v) * lambda * v) + std::abs(rho(v) * beta) +
                         std::abs(rho(2.0 * beta / lambda) * beta);
    if (m < -1e-12 * scale) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(TransformedDecay, ScalarAndLorenzRandomized) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), ue(-2.0, 2.0), ud(-0.2, 0.2);
  const auto lor = make_lorenz_agent(kLBar);
  const auto& iss = *lor.iss();
  SupplyPair lp;
  lp.value = iss.value;
  lp.gradient = iss.gradient;
  lp.alpha1 = iss.alpha1;
  lp.alpha2 = iss.alpha2;
  lp.lambda = iss.lambda;
  lp.beta = iss.supply;
  const ScaledLyapunov lv(lp, Polynomial{1.0, 0.0, 1.0});
  const ScaledLyapunov sv(scalar_pair(), Polynomial{0.5, 1.0, 0.0, 2.0});
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    if (k % 2 == 0) {
      const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, ux(rng));
      const double u = ue(rng);
      const double vdot = sv.gradient(x).dot(Eigen::VectorXd::Constant(1, -x(0) + u));
      const double rhs = -sv.decay_rate() * sv.value(x) + sv.beta_bar()(u);
      if (vdot > rhs + 1e-12 * (std::abs(vdot) + std::abs(rhs))) ++violations;
    } else {
      const Eigen::VectorXd z = Eigen::Vector2d(ux(rng), ux(rng));
      const double e = ue(rng);
      const Eigen::VectorXd d = Eigen::Vector3d(ud(rng), ud(rng), ud(rng));
      const double vdot = lv.gradient(z).dot(lor.f(z, e, d));
      const double rhs = -lv.decay_rate() * lv.value(z) + lv.beta_bar()(e);
      if (vdot > rhs + 1e-12 * (std::abs(vdot) + std::abs(rhs))) ++violations;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(ScaledLyapunov, IdentityRescalingKeepsPair) {
  const ScaledLyapunov s(scalar_pair(), Polynomial{1.0});
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.7);
  EXPECT_DOUBLE_EQ(s.value(x), scalar_pair().value(x));
  EXPECT_EQ(s.beta_bar(), scalar_pair().beta);
  EXPECT_DOUBLE_EQ(s.decay_rate(), 0.5);
}

TEST(ScaledLyapunov, LinearRhoOnQuadratic) {
  SupplyPair p;
  p.value = [](const Eigen::VectorXd& x) { return x(0) * x(0); };
  p.alpha1 = p.alpha2 = [](double s) { return s * s; };
  p.lambda = 2.0;
  p.beta = Polynomial{0.0, 0.0, 1.0};
  const auto s = transform_supply(p, Polynomial{0.0, 1.0});
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.3);
  EXPECT_NEAR(s.value(x), std::pow(1.3, 4) / 2.0, 1e-14);
  EXPECT_EQ(s.beta_bar(), (Polynomial{0.0, 0.0, 0.0, 0.0, 1.0}));
  EXPECT_NEAR(s.gradient(x)(0), 2.0 * std::pow(1.3, 3), 1e-6);
  EXPECT_THROW(transform_supply(p, Polynomial{1.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(transform_supply(p, Polynomial{}), std::invalid_argument);
}

TEST(ScaledLyapunov, LorenzWithQuadraticRhoVerifies) {
  const auto a = make_lorenz_agent(kLBar);
  const auto& iss = *a.iss();
  SupplyPair p{iss.value, iss.gradient, iss.alpha1, iss.alpha2, iss.lambda, iss.supply};
  const auto s = transform_supply(p, Polynomial{1.0, 0.0, 1.0});
  EXPECT_EQ(s.antiderivative().degree(), 3);
  const auto r = verify_supply_inequality(
      lorenz_field(a), [&](const Eigen::VectorXd& z) { return s.value(z); },
      [&](const Eigen::VectorXd& z) { return s.gradient(z); }, 2.3,
      [&](double e) { return s.beta_bar()(e); }, lorenz_plan(0.25));
  EXPECT_TRUE(r.holds) << r.worst_margin;
}

TEST(ChooseRho, EqualTargetNeedsOnlyConstant) {
  const auto a1 = [](double s) { return s * s; };
  const Polynomial rho = choose_rho(a1, a1, 0.0, 10.0);
  EXPECT_TRUE(is_sn(rho));
  for (double s = 0.01; s <= 10.0; s += 0.01) EXPECT_GE(rho(a1(s)) * a1(s), a1(s));
  EXPECT_GE(rho(0.0), 1.0);
}

TEST(ChooseRho, QuarticTarget) {
  const auto a1 = [](double s) { return s * s; };
  const auto t = [](double s) { return std::pow(s, 4); };
  const Polynomial rho = choose_rho(a1, t, 0.0, 10.0);
  EXPECT_TRUE(is_sn(rho));
  // rho(s) = s is a valid choice; the returned rho must also dominate.
  for (double s = 0.0; s <= 10.0; s += 0.005) EXPECT_GE(rho(a1(s)) * a1(s), t(s) * (1.0 - 1e-14));
}

TEST(ChooseRho, UnboundedRatioRejected) {
  EXPECT_THROW(choose_rho([](double s) { return s * s; }, [](double s) { return s; }, 0.0, 10.0),
               std::domain_error);
}

TEST(IsSn, Cases) {
  EXPECT_TRUE(is_sn(Polynomial{1.0}));
  EXPECT_TRUE(is_sn(Polynomial{0.0, 1.0}));
  EXPECT_FALSE(is_sn(Polynomial{}));
  EXPECT_FALSE(is_sn(Polynomial{1.0, -0.5}));
}

TEST(SamplePlan, DescribeNamesTheGrid) {
  auto plan = lorenz_plan(0.1);
  plan.random_points = 50;
  plan.seed = 9;
  const std::string d = plan.describe();
  EXPECT_NE(d.find("8"), std::string::npos);
  EXPECT_NE(d.find("9"), std::string::npos);
}

TEST(Mu0, SingleMemberAndConstantRatio) {
  const ScalarField u1 = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  const ScalarField u2 = [](const Eigen::VectorXd& x) { return 2.0 * x.squaredNorm(); };
  std::vector<Eigen::VectorXd> samples{Eigen::Vector2d(1, 0), Eigen::Vector2d(0.3, -2), Eigen::Vector2d::Zero()};
  EXPECT_DOUBLE_EQ(estimate_mu0({{u1}, 1.0}, samples).value, 1.0);
  const auto m = estimate_mu0({{u1, u2}, 1.0}, samples);
  EXPECT_DOUBLE_EQ(m.value, 2.0);
  EXPECT_EQ(m.p, 2);
  EXPECT_EQ(m.q, 1);
  const ScalarField zero = [](const Eigen::VectorXd&) { return 0.0; };
  EXPECT_THROW(estimate_mu0({{u1, zero}, 1.0}, samples), ValidationError);
}

TEST(Monitor, ZeroTrajectoryPasses) {
  Trajectory tr;
  for (int k = 0; k <= 100; ++k) {
    tr.times.push_back(0.1 * k);
    tr.states.push_back(Eigen::VectorXd::Zero(2));
    tr.sigma.push_back(0);
  }
  const ScalarField u = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  const auto r = monitor_trajectory(tr, {{u, u}, 1.0}, periodic_two_phase(4.0, 10.0));
  for (double v : r.u) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(r.decaying);
  EXPECT_FALSE(r.flagged);
  EXPECT_EQ(r.jumps.size(), 4u);
}

TEST(Monitor, JumpRatiosAndGrowthFlag) {
  Trajectory tr;
  for (int k = 0; k <= 100; ++k) {
    tr.times.push_back(0.1 * k);
    tr.states.push_back(Eigen::VectorXd::Constant(1, std::exp(0.05 * k)));
  }
  const ScalarField u1 = [](const Eigen::VectorXd& x) { return x(0) * x(0); };
  const ScalarField u2 = [](const Eigen::VectorXd& x) { return 3.0 * x(0) * x(0); };
  const auto r = monitor_trajectory(tr, {{u1, u2}, 1.0}, periodic_two_phase(4.0, 10.0));
  EXPECT_TRUE(r.flagged);
  ASSERT_EQ(r.jumps.size(), 4u);
  EXPECT_NEAR(r.jumps[0].ratio, 3.0, 1e-12);
  EXPECT_NEAR(r.jumps[1].ratio, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.max_jump_ratio, 3.0, 1e-12);
  EXPECT_NEAR(r.intervals.front().max_log_rate, 1.0, 1e-9);
  tr.times.front() = 0.5;
  EXPECT_THROW(monitor_trajectory(tr, {{u1, u2}, 1.0}, periodic_two_phase(4.0, 10.0)), std::invalid_argument);
}
