#include <gtest/gtest.h>

#include "coopstab/closed_loop.hpp"
#include "coopstab/dynamics.hpp"

using namespace coopstab;

namespace {

const Eigen::Vector3d kLBar(3.0, -3.2, 1.6);

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

ClosedLoopSystem benchmark_loop() {
  std::vector<AgentModel> agents(3, make_lorenz_agent(kLBar));
  const Eigen::VectorXd d = Eigen::Vector3d(-0.2, 0.1, -0.2).replicate(3, 1);
  return ClosedLoopSystem(agents, TopologySet::from_matrices({h1(), h2()}),
                          SwitchedController::uniform(12.0, Polynomial{1.0, 0.0, 1.0}, 3),
                          periodic_two_phase(6.0, 60.0),
                          DisturbanceBox(Eigen::VectorXd::Constant(9, -0.2),
                                         Eigen::VectorXd::Constant(9, 0.2), d));
}

}  // namespace

TEST(LorenzRhs, OriginIsEquilibrium) {
  EXPECT_EQ(lorenz_rhs(Eigen::Vector2d::Zero(), 0.0, 0.0, kLBar, Eigen::Vector3d::Zero()),
            Eigen::Vector3d::Zero());
}

TEST(LorenzRhs, HandEvaluatedPoints) {
  const Eigen::Vector3d a = lorenz_rhs(Eigen::Vector2d(1, 0), 0.0, 0.0, kLBar, Eigen::Vector3d::Zero());
  EXPECT_DOUBLE_EQ(a(0), -3.0);
  EXPECT_DOUBLE_EQ(a(1), 0.0);
  EXPECT_DOUBLE_EQ(a(2), 1.6);
  const Eigen::Vector3d b = lorenz_rhs(Eigen::Vector2d(0, 0), 1.0, 0.0, kLBar, Eigen::Vector3d::Zero());
  EXPECT_DOUBLE_EQ(b(0), 3.0);
  EXPECT_DOUBLE_EQ(b(1), 0.0);
  EXPECT_DOUBLE_EQ(b(2), -1.0);
}

TEST(LorenzRhs, InputEntersThroughB) {
  const Eigen::Vector3d r =
      lorenz_rhs(Eigen::Vector2d::Zero(), 0.0, 2.0, kLBar, Eigen::Vector3d::Zero(), 1.5);
  EXPECT_DOUBLE_EQ(r(2), 3.0);
}

TEST(LorenzRhs, SignConstraintsEnforced) {
  EXPECT_THROW(lorenz_rhs(Eigen::Vector2d::Zero(), 0, 0, Eigen::Vector3d(-1, -3, 1),
                          Eigen::Vector3d::Zero()),
               std::invalid_argument);
  EXPECT_THROW(make_lorenz_agent(Eigen::Vector3d(3.0, 0.1, 1.6)), std::invalid_argument);
  // The box must keep L2 < 0 at every vertex.
  EXPECT_THROW(make_lorenz_agent(Eigen::Vector3d(3.0, -0.1, 1.6), 1.0, 0.2),
               std::invalid_argument);
}

TEST(AgentModel, LorenzAgentMatchesRhs) {
  const auto agent = make_lorenz_agent(kLBar);
  const Eigen::Vector2d z(0.7, -1.3);
  const Eigen::Vector3d d(-0.2, 0.1, -0.2);
  const double e = 0.4;
  const Eigen::Vector3d ref = lorenz_rhs(z, e, -0.5, kLBar, d);
  EXPECT_NEAR((agent.f(z, e, d) - ref.head<2>()).norm(), 0.0, 1e-15);
  EXPECT_NEAR(agent.e_dot(z, e, d, -0.5), ref(2), 1e-15);
  EXPECT_EQ(agent.origin_residual({d}), 0.0);
}

TEST(AgentModel, NegativeBIsNormalized) {
  const auto agent = make_linear_scalar_agent(1.0, 1.0, 0.0, 0.0, -2.0);
  EXPECT_EQ(agent.b(), 2.0);
  EXPECT_EQ(agent.input_sign(), -1.0);
}

TEST(DisturbanceBox, VerticesAndSchedule) {
  const DisturbanceBox box(Eigen::Vector2d(-1, -2), Eigen::Vector2d(1, 2), {5.0},
                           {Eigen::Vector2d(0.5, 0.0), Eigen::Vector2d(-0.5, 1.0)});
  EXPECT_EQ(box.vertices().size(), 4u);
  EXPECT_EQ(box.value_at(4.999), Eigen::VectorXd(Eigen::Vector2d(0.5, 0.0)));
  EXPECT_EQ(box.value_at(5.0), Eigen::VectorXd(Eigen::Vector2d(-0.5, 1.0)));
  EXPECT_TRUE(box.contains_zero());
  EXPECT_THROW(DisturbanceBox(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1),
                              Eigen::VectorXd(Eigen::Vector2d(2.0, 0.0))),
               std::invalid_argument);
}

TEST(ClosedLoop, OriginMapsToZero) {
  const auto sys = benchmark_loop();
  EXPECT_EQ(closed_loop_rhs(sys, 0.0, Eigen::VectorXd::Zero(9)).norm(), 0.0);
  EXPECT_EQ(closed_loop_rhs(sys, 4.0, Eigen::VectorXd::Zero(9)).norm(), 0.0);
}

TEST(ClosedLoop, BenchmarkInitialDerivativeComposes) {
  const auto sys = benchmark_loop();
  Eigen::VectorXd x(9);
  x << 2.6, -0.7, -2.8, 0.9, -1.4, 1.8, 0.3, 0.2, -0.1;
  const Eigen::VectorXd dx = closed_loop_rhs(sys, 0.0, x);
  ASSERT_TRUE(dx.allFinite());
  const Eigen::Vector3d e(0.3, 0.2, -0.1);
  const Eigen::Vector3d ev = h1() * e;
  const Eigen::Vector3d d(-0.2, 0.1, -0.2);
  const Eigen::Vector2d zs[3] = {{2.6, -0.7}, {-2.8, 0.9}, {-1.4, 1.8}};
  for (int i = 0; i < 3; ++i) {
    const double l3 = 1.6 + d(2);
    const double g = l3 * zs[i](0) - e(i) - zs[i](0) * zs[i](1);
    const double ubar = -12.0 * (std::pow(ev(i), 4) + 1.0) * ev(i);
    EXPECT_NEAR(dx(6 + i), g + ubar, 1e-13);
    const Eigen::Vector3d ref = lorenz_rhs(zs[i], e(i), ubar, kLBar, d);
    EXPECT_NEAR(dx(2 * i), ref(0), 1e-13);
    EXPECT_NEAR(dx(2 * i + 1), ref(1), 1e-13);
  }
}

TEST(ClosedLoop, UsesActiveTopology) {
  const auto sys = benchmark_loop();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(9);
  x.tail(3) << 1.0, 1.0, 1.0;
  // H1 (1,1,1) = (1,0,1) and H2 (1,1,1) = (1,1,0).
  const Eigen::VectorXd a = closed_loop_rhs(sys, 0.0, x);
  const Eigen::VectorXd b = closed_loop_rhs(sys, 3.0, x);
  EXPECT_NEAR(a(7), -1.0, 1e-15);
  EXPECT_NEAR(b(7), -1.0 - 24.0, 1e-13);
  EXPECT_NEAR(b(8), -1.0, 1e-15);
}

TEST(ClosedLoop, RejectsInconsistentParts) {
  std::vector<AgentModel> two(2, make_lorenz_agent(kLBar));
  const Eigen::VectorXd d = Eigen::VectorXd::Zero(6);
  EXPECT_THROW(ClosedLoopSystem(two, TopologySet::from_matrices({h1()}),
                                SwitchedController::uniform(1.0, Polynomial{1.0}, 2),
                                SwitchingSignal::constant(1),
                                DisturbanceBox(d.array() - 1.0, d.array() + 1.0, d)),
               std::invalid_argument);
  std::vector<AgentModel> three(3, make_lorenz_agent(kLBar));
  const Eigen::VectorXd d9 = Eigen::VectorXd::Zero(9);
  EXPECT_THROW(ClosedLoopSystem(three, TopologySet::from_matrices({h1()}),
                                SwitchedController::uniform(1.0, Polynomial{1.0}, 3),
                                periodic_two_phase(6.0, 60.0),
                                DisturbanceBox(d9.array() - 1.0, d9.array() + 1.0, d9)),
               std::invalid_argument);
}
