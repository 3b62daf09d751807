#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "coopstab/controller.hpp"
#include "coopstab/dynamics.hpp"

using namespace coopstab;

namespace {

Eigen::MatrixXd h1() {
  Eigen::MatrixXd h(3, 3);
  h << 2, 0, -1, -1, 1, 0, -1, 0, 2;
  return h;
}

Eigen::MatrixXd h2() {
  Eigen::MatrixXd h(3, 3);
  h << 1, 0, 0, 0, 2, -1, -1, -1, 2;
  return h;
}

CouplingConstants unit_constants() {
  CouplingConstants cc;
  cc.d_max = cc.d_min = 1.0;
  cc.lambda1_tilde = 1.0;
  cc.h_norm_sq_max = 1.0;
  return cc;
}

Box box1(double lo, double hi) { return {Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)}; }

}  // namespace

TEST(VirtualOutput, Examples) {
  EXPECT_EQ(virtual_output(h1(), Eigen::Vector3d::Zero()), Eigen::VectorXd::Zero(3));
  EXPECT_EQ(virtual_output(h1(), Eigen::Vector3d::Ones()), Eigen::VectorXd(Eigen::Vector3d(1, 0, 1)));
  EXPECT_THROW(virtual_output(h1(), Eigen::Vector2d::Ones()), std::invalid_argument);
}

TEST(SwitchedController, BenchmarkGainAtUnitOutput) {
  const auto c = SwitchedController::uniform(12.0, Polynomial{1.0, 0.0, 1.0}, 3);
  EXPECT_EQ(c.control(0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(c.control(0, 1.0), -24.0);
  const Eigen::VectorXd u = c.evaluate(Eigen::Vector3d(1.0, 0.0, -0.5));
  EXPECT_DOUBLE_EQ(u(0), -24.0);
  EXPECT_DOUBLE_EQ(u(1), 0.0);
  EXPECT_DOUBLE_EQ(u(2), 12.0 * (std::pow(0.5, 4) + 1.0) * 0.5);
}

TEST(SwitchedController, OddAndSignOpposing) {
  const auto c = SwitchedController::uniform(3.0, Polynomial{1.0, 0.2, 0.05}, 1);
  for (double ev = -5.0; ev <= 5.0; ev += 0.1) {
    EXPECT_DOUBLE_EQ(c.control(0, -ev), -c.control(0, ev));
    EXPECT_LE(c.control(0, ev) * ev, 0.0);
  }
}

TEST(SwitchedController, RejectsBadWeights) {
  EXPECT_THROW(SwitchedController::uniform(0.0, Polynomial{1.0}, 2), std::invalid_argument);
  EXPECT_THROW(SwitchedController::uniform(1.0, Polynomial{0.5}, 2), std::invalid_argument);
  EXPECT_THROW(SwitchedController::uniform(1.0, Polynomial{1.0, -0.1}, 2), std::invalid_argument);
  EXPECT_TRUE(omega_violation(Polynomial{1.0, 0.1}) == std::nullopt);
  EXPECT_TRUE(omega_violation(Polynomial{}).has_value());
}

TEST(GainBound, TrivialArithmetic) {
  EXPECT_DOUBLE_EQ(gain_lower_bound(unit_constants(), 1.0, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(gain_slack(unit_constants(), 3.0, 1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(gain_slack(unit_constants(), 5.0, 1.0, 1.0), 2.0);
}

TEST(GainBound, DegenerateCoupling) {
  auto cc = unit_constants();
  cc.lambda1_tilde = 0.0;
  try {
    gain_lower_bound(cc, 1.0, 1.0);
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "degenerate coupling");
  }
  EXPECT_THROW(synthesize_gain(cc, 1.0, 1.0, {h1()}, std::vector<AgentBounds>(3)),
               std::domain_error);
}

TEST(ManualGain, BenchmarkControllerAccepted) {
  const auto c = SwitchedController::uniform(12.0, Polynomial{1.0, 0.0, 1.0}, 3);
  const auto r = manual_gain_report(c, unit_constants());
  EXPECT_EQ(r.mode, "manual");
  EXPECT_TRUE(r.invariants_hold);
  EXPECT_EQ(r.k_chosen, 12.0);
  EXPECT_FALSE(r.k_min.has_value());
  const auto with = manual_gain_report(c, unit_constants(), 1.0, 1.0);
  ASSERT_TRUE(with.k_min.has_value());
  EXPECT_DOUBLE_EQ(*with.k_min, 3.0);
  EXPECT_DOUBLE_EQ(*with.k_slack, 9.0);
}

TEST(BoundSplit, LinearCouplingRecoversTwoTwo) {
  BoundSplitOptions opt;
  opt.degree = 1;
  opt.margin = 0.0;
  const auto s = bound_split(
      [](const Eigen::VectorXd& z, double e, const Eigen::VectorXd&) { return z(0) + e; },
      box1(-1.0, 1.0), -1.0, 1.0, {}, opt);
  EXPECT_NEAR(s.gamma_sq.coefficient(1), 2.0, 1e-9);
  EXPECT_NEAR(s.chi_sq.coefficient(1), 2.0, 1e-9);
  EXPECT_EQ(s.gamma_sq.coefficient(0), 0.0);
  EXPECT_GE(s.min_validation_slack, -1e-12);
}

TEST(BoundSplit, ZeroCouplingGivesZeroPair) {
  const auto s = bound_split([](const Eigen::VectorXd&, double, const Eigen::VectorXd&) { return 0.0; },
                             box1(-1.0, 1.0), -1.0, 1.0, {});
  EXPECT_TRUE(s.gamma_sq.is_zero());
  EXPECT_TRUE(s.chi_sq.is_zero());
}

TEST(BoundSplit, LorenzCouplingDominatesIndependentSamples) {
  const auto agent = make_lorenz_agent(Eigen::Vector3d(3.0, -3.2, 1.6));
  const Eigen::Vector3d bound = Eigen::Vector3d::Constant(0.2);
  const auto dv = box_vertices(-bound, bound);
  const Box zb{Eigen::Vector2d(-3, -3), Eigen::Vector2d(3, 3)};
  const auto g = [&agent](const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d) {
    return agent.g(z, e, d);
  };
  const auto s = bound_split(g, zb, -2.0, 2.0, dv);
  EXPECT_EQ(s.validation_samples, 10000u);
  EXPECT_TRUE(s.gamma_sq.has_nonnegative_coefficients());
  EXPECT_TRUE(s.chi_sq.has_nonnegative_coefficients());
  // Oracle with a different seed and the full d-box interior.
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uz(-3.0, 3.0), ue(-2.0, 2.0), ud(-0.2, 0.2);
  for (int k = 0; k < 10000; ++k) {
    const Eigen::Vector2d z(uz(rng), uz(rng));
    const double e = ue(rng);
    const Eigen::Vector3d d(ud(rng), ud(rng), ud(rng));
    const double gv = g(z, e, d);
    ASSERT_GE(s.gamma(z) + s.chi(e) - gv * gv, -1e-12 * (1.0 + gv * gv)) << z.transpose() << " " << e;
  }
}

TEST(BoundSplit, MalformedBoxes) {
  const auto g = [](const Eigen::VectorXd&, double e, const Eigen::VectorXd&) { return e; };
  EXPECT_THROW(bound_split(g, box1(1.0, -1.0), -1.0, 1.0, {}), std::invalid_argument);
  EXPECT_THROW(bound_split(g, box1(-1.0, 1.0), 1.0, -1.0, {}), std::invalid_argument);
}

TEST(SynthesizeGain, EnvelopeAndSlackInvariants) {
  std::vector<Eigen::MatrixXd> hs{h1(), h2()};
  std::vector<MMatrixCertificate> certs;
  for (const auto& h : hs) certs.push_back(synthesize_diagonal_certificate(h));
  const auto cc = coupling_constants(certs, hs, 1.0, 1.0);
  std::vector<AgentBounds> bounds(3, AgentBounds{Polynomial{0.0, 3.0, 0.5}, Polynomial{0.0, 1.0, 2.0}});
  const auto r = synthesize_gain(cc, 0.5, 0.7, hs, bounds);
  EXPECT_EQ(r.mode, "numeric");
  EXPECT_EQ(r.certification, "certified on box only");
  EXPECT_TRUE(r.invariants_hold);
  ASSERT_TRUE(r.k_slack && r.k_min);
  EXPECT_GE(*r.k_slack, 0.0);
  EXPECT_GE(r.k_chosen, *r.k_min);
  EXPECT_NEAR(*r.epsilon2, cc.h_norm_sq_max / 0.7, 1e-15);
  for (const auto& env : r.agents) {
    EXPECT_GE(env.min_slack, 0.0);
    EXPECT_GE(env.min_delta, 1.0);
    EXPECT_FALSE(omega_violation(env.omega).has_value());
  }
  // A requested gain above k_min is honoured.
  GainSynthesisOptions opt;
  opt.k_request = 1e3;
  EXPECT_EQ(synthesize_gain(cc, 0.5, 0.7, hs, bounds, opt).k_chosen, 1e3);
}

TEST(SynthesizeGain, RhoTildeBoundsCrossTermInVirtualCoordinates) {
  // Oracle: for random e_v, sum_i c_i(e_i^2) with e = H^{-1} e_v must not
  // exceed sum_j rho_tilde_j(e_vj^2) e_vj^2.
  std::vector<Eigen::MatrixXd> hs{h1(), h2()};
  std::vector<MMatrixCertificate> certs;
  for (const auto& h : hs) certs.push_back(synthesize_diagonal_certificate(h));
  const auto cc = coupling_constants(certs, hs, 1.0, 1.0);
  std::vector<AgentBounds> bounds{{Polynomial{0.0, 1.0, 0.2}, Polynomial{0.0, 0.5}},
                                  {Polynomial{0.0, 2.0}, Polynomial{0.0, 0.1, 0.3}},
                                  {Polynomial{0.0, 0.0, 1.0}, Polynomial{0.0, 1.0}}};
  const double c0 = 0.9;
  const auto r = synthesize_gain(cc, 0.5, c0, hs, bounds);
  const double eps2 = *r.epsilon2;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& h : hs) {
    const Eigen::MatrixXd a = h.inverse();
    for (int k = 0; k < 2000; ++k) {
      const Eigen::Vector3d ev(u(rng), u(rng), u(rng));
      const Eigen::Vector3d e = a * ev;
      double lhs = 0.0, rhs = 0.0;
      for (int i = 0; i < 3; ++i) {
        const Polynomial c = (cc.h_norm_sq_max / eps2) * bounds[i].chi_sq + bounds[i].pi_bar_sq;
        lhs += c(e(i) * e(i));
        rhs += r.agents[i].rho_tilde_sq(ev(i) * ev(i)) * ev(i) * ev(i);
      }
      ASSERT_LE(lhs, rhs * (1.0 + 1e-12));
    }
  }
}
