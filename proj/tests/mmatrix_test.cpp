#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "coopstab/mmatrix.hpp"

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

// Independent positive-definiteness oracle: Sylvester's criterion on the
// leading principal minors.
bool leading_minors_positive(const Eigen::MatrixXd& s) {
  for (Eigen::Index k = 1; k <= s.rows(); ++k)
    if (!(s.topLeftCorner(k, k).determinant() > 0.0)) return false;
  return true;
}

}  // namespace

TEST(IsMMatrix, IdentityAnySize) {
  for (int n = 1; n <= 6; ++n) EXPECT_TRUE(is_m_matrix(Eigen::MatrixXd::Identity(n, n)).is_m_matrix);
}

TEST(IsMMatrix, BenchmarkH1EigenvaluesOneOneThree) {
  const auto c = is_m_matrix(h1());
  EXPECT_TRUE(c.is_m_matrix);
  std::vector<double> re;
  for (Eigen::Index i = 0; i < c.eigenvalues.size(); ++i) {
    re.push_back(c.eigenvalues(i).real());
    EXPECT_NEAR(c.eigenvalues(i).imag(), 0.0, 1e-6);
  }
  std::sort(re.begin(), re.end());
  // Double root at 1: the perturbation is O(sqrt(eps)).
  EXPECT_NEAR(re[0], 1.0, 1e-7);
  EXPECT_NEAR(re[1], 1.0, 1e-7);
  EXPECT_NEAR(re[2], 3.0, 1e-12);
}

TEST(IsMMatrix, PositiveOffDiagonalRejected) {
  Eigen::MatrixXd h(2, 2);
  h << 1, 1, 0, 1;
  const auto c = is_m_matrix(h);
  EXPECT_FALSE(c.is_m_matrix);
  EXPECT_FALSE(c.diagnostics.empty());
}

TEST(IsMMatrix, NonSquareThrows) {
  EXPECT_THROW(is_m_matrix(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST(IsMMatrix, DiagonallyDominantRandomMatricesPass) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 7;
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i) {
      double off = 0.0;
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        h(i, j) = -u(rng);
        off += -h(i, j);
      }
      h(i, i) = off + 0.01 + u(rng);
    }
    ASSERT_TRUE(is_m_matrix(h).is_m_matrix);
  }
}

TEST(Certificate, IdentityAcceptedForBenchmarkMatrices) {
  for (const auto& h : {h1(), h2()}) {
    const auto cert = synthesize_diagonal_certificate(h);
    EXPECT_EQ(cert.method, "identity");
    EXPECT_EQ(cert.d_diag, Eigen::VectorXd::Ones(3));
    EXPECT_GT(cert.min_eig, kEigenTol);
    const Eigen::MatrixXd s = h + h.transpose();
    EXPECT_TRUE(leading_minors_positive(s));
    EXPECT_NEAR(s.determinant(), 20.0, 1e-12);
  }
  const Eigen::MatrixXd s2 = h2() + h2().transpose();
  EXPECT_NEAR(s2.topLeftCorner(1, 1).determinant(), 2.0, 1e-12);
  EXPECT_NEAR(s2.topLeftCorner(2, 2).determinant(), 8.0, 1e-12);
}

TEST(Certificate, ZeroEigenvalueRejected) {
  Eigen::MatrixXd h(2, 2);
  h << 0, 0, 0, 1;
  try {
    synthesize_diagonal_certificate(h);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("not an M-matrix"), std::string::npos);
  }
}

TEST(Certificate, ConstructiveStepWhenIdentityFails) {
  // Strongly nonsymmetric M-matrix: H + H^T is indefinite.
  Eigen::MatrixXd h(2, 2);
  h << 1, -10, 0, 1;
  EXPECT_LE(symmetrized_min_eig(h, Eigen::VectorXd::Ones(2)), 0.0);
  const auto cert = synthesize_diagonal_certificate(h);
  EXPECT_NE(cert.method, "identity");
  EXPECT_TRUE((cert.d_diag.array() > 0.0).all());
  const Eigen::MatrixXd d = cert.d_diag.asDiagonal();
  EXPECT_TRUE(leading_minors_positive(d * h + h.transpose() * d));
}

TEST(Certificate, EveryReturnedCertificateRechecks) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 5;
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i) {
      double off = 0.0;
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        h(i, j) = u(rng) < 0.5 ? -5.0 * u(rng) : 0.0;
        off -= h(i, j);
      }
      h(i, i) = off + 0.05;
    }
    if (!is_m_matrix(h).is_m_matrix) continue;
    const auto cert = synthesize_diagonal_certificate(h);
    const Eigen::MatrixXd d = cert.d_diag.asDiagonal();
    const Eigen::MatrixXd s = d * h + h.transpose() * d;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    ASSERT_GT(es.eigenvalues().minCoeff(), kEigenTol);
  }
}

TEST(CouplingConstants, BenchmarkPairWithIdentity) {
  const std::vector<Eigen::MatrixXd> hs{h1(), h2()};
  std::vector<MMatrixCertificate> certs;
  for (const auto& h : hs) certs.push_back(synthesize_diagonal_certificate(h));
  const auto cc = coupling_constants(certs, hs, 1.0, 1.0);
  EXPECT_EQ(cc.d_max, 1.0);
  EXPECT_EQ(cc.d_min, 1.0);
  double expected = 1e300;
  for (const auto& h : hs) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h + h.transpose());
    expected = std::min(expected, es.eigenvalues().minCoeff());
  }
  EXPECT_NEAR(cc.lambda1_tilde, expected, 1e-12);
  double hn = 0.0;
  for (const auto& h : hs) hn = std::max(hn, std::pow(h.jacobiSvd().singularValues()(0), 2));
  EXPECT_NEAR(cc.h_norm_sq_max, hn, 1e-12);
}

TEST(CouplingConstants, IdentityTrivialCases) {
  const std::vector<Eigen::MatrixXd> hs{Eigen::MatrixXd::Identity(3, 3)};
  const std::vector<MMatrixCertificate> certs{synthesize_diagonal_certificate(hs[0])};
  const auto cc = coupling_constants(certs, hs, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(cc.d_max, 1.0);
  EXPECT_DOUBLE_EQ(cc.d_min, 1.0);
  EXPECT_DOUBLE_EQ(cc.lambda1_tilde, 2.0);
  EXPECT_DOUBLE_EQ(cc.h_norm_sq_max, 1.0);
  EXPECT_DOUBLE_EQ(coupling_constants(certs, hs, 0.5, 1.0).lambda1_tilde, 0.5);
  EXPECT_THROW(coupling_constants(certs, hs, 0.0, 1.0), std::invalid_argument);
}

TEST(CouplingConstants, MonotoneInBMin) {
  const std::vector<Eigen::MatrixXd> hs{h1(), h2()};
  std::vector<MMatrixCertificate> certs;
  for (const auto& h : hs) certs.push_back(synthesize_diagonal_certificate(h));
  double prev = 0.0;
  for (double bm = 0.1; bm <= 2.0; bm += 0.1) {
    const double l = coupling_constants(certs, hs, bm, 2.0).lambda1_tilde;
    EXPECT_GE(l, prev);
    prev = l;
  }
}
