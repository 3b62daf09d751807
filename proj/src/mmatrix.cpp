#include "coopstab/mmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace coopstab {

MMatrixCheck is_m_matrix(const Eigen::MatrixXd& h, double tol, double tol_offdiag) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw std::invalid_argument("is_m_matrix: matrix must be square and nonempty");
  }
  MMatrixCheck check;
  const Eigen::Index n = h.rows();
  check.max_off_diagonal = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      check.max_off_diagonal = std::max(check.max_off_diagonal, h(i, j));
      if (h(i, j) > tol_offdiag) {
        std::ostringstream os;
        os << "positive off-diagonal entry H(" << i << "," << j << ") = " << h(i, j);
        check.diagnostics.push_back(os.str());
      }
    }
  }
  if (n == 1) check.max_off_diagonal = 0.0;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(h, /*computeEigenvectors=*/false);
  check.eigenvalues = solver.eigenvalues();
  check.min_real_part = check.eigenvalues.real().minCoeff();
  if (std::abs(check.min_real_part) <= tol) {
    check.diagnostics.push_back("zero eigenvalue");
  } else if (check.min_real_part < 0.0) {
    std::ostringstream os;
    os << "eigenvalue with negative real part " << check.min_real_part;
    check.diagnostics.push_back(os.str());
  }
  check.is_m_matrix = check.diagnostics.empty();
  return check;
}

double symmetrized_min_eig(const Eigen::MatrixXd& h, const Eigen::VectorXd& d) {
  const Eigen::MatrixXd dh = d.asDiagonal() * h;
  const Eigen::MatrixXd sym = dh + dh.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

namespace {

MMatrixCertificate make_certificate(const Eigen::VectorXd& d, double min_eig,
                                    const MMatrixCheck& check, const char* method) {
  MMatrixCertificate cert;
  cert.d_diag = d;
  cert.min_eig = min_eig;
  cert.eigen_real_parts = check.eigenvalues.real();
  cert.method = method;
  return cert;
}

}  // namespace

MMatrixCertificate synthesize_diagonal_certificate(const Eigen::MatrixXd& h,
                                                   const CertificateOptions& options) {
  const MMatrixCheck check = is_m_matrix(h, options.tol);
  if (!check.is_m_matrix) {
    std::string why = check.diagnostics.empty() ? "" : " (" + check.diagnostics.front() + ")";
    throw std::invalid_argument("not an M-matrix" + why);
  }
  const Eigen::Index n = h.rows();

  Eigen::VectorXd best = Eigen::VectorXd::Ones(n);
  double best_eig = symmetrized_min_eig(h, best);
  if (best_eig > options.tol) return make_certificate(best, best_eig, check, "identity");

  // For a nonsingular M-matrix both H^{-1} 1 and H^{-T} 1 are entrywise
  // positive, and diag(v / u) is a diagonal Lyapunov scaling.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd u = lu.solve(ones);
  const Eigen::VectorXd v = lu.transpose().solve(ones);
  if ((u.array() > 0.0).all() && (v.array() > 0.0).all() && u.allFinite() && v.allFinite()) {
    Eigen::VectorXd d = (v.array() / u.array()).matrix();
    d /= d.maxCoeff();
    const double eig = symmetrized_min_eig(h, d);
    if (eig > options.tol) return make_certificate(d, eig, check, "constructive");
    if (eig > best_eig) {
      best = d;
      best_eig = eig;
    }
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> step(0.0, 1.0);
  double scale = 0.5;
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd candidate = best;
    for (Eigen::Index i = 0; i < n; ++i) candidate(i) *= std::exp(scale * step(rng));
    candidate /= candidate.maxCoeff();
    const double eig = symmetrized_min_eig(h, candidate);
    if (eig > best_eig) {
      best = candidate;
      best_eig = eig;
      if (best_eig > options.tol) return make_certificate(best, best_eig, check, "random_search");
    } else if ((it + 1) % 200 == 0) {
      scale = std::max(scale * 0.7, 1e-3);
    }
  }
  std::ostringstream os;
  os << "diagonal certificate search exhausted after " << options.max_iterations
     << " iterations; best min eigenvalue " << best_eig;
  throw CertificateSearchError(os.str(), best_eig);
}

CouplingConstants coupling_constants(std::span<const MMatrixCertificate> certificates,
                                     std::span<const Eigen::MatrixXd> h_matrices, double b_min,
                                     double b_max) {
  if (!(b_min > 0.0)) throw std::invalid_argument("coupling_constants: b_min must be positive");
  if (b_max < b_min) throw std::invalid_argument("coupling_constants: b_max < b_min");
  if (certificates.empty() || certificates.size() != h_matrices.size()) {
    throw std::invalid_argument("coupling_constants: need one certificate per matrix");
  }
  CouplingConstants cc;
  cc.b_min = b_min;
  cc.b_max = b_max;
  cc.d_max = -std::numeric_limits<double>::infinity();
  cc.d_min = std::numeric_limits<double>::infinity();
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < certificates.size(); ++p) {
    const auto& cert = certificates[p];
    if (!(cert.d_diag.array() > 0.0).all()) {
      throw std::invalid_argument("coupling_constants: certificate has a nonpositive entry");
    }
    cc.d_max = std::max(cc.d_max, cert.d_diag.maxCoeff());
    cc.d_min = std::min(cc.d_min, cert.d_diag.minCoeff());
    min_eig = std::min(min_eig, symmetrized_min_eig(h_matrices[p], cert.d_diag));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(h_matrices[p]);
    const double norm = svd.singularValues()(0);
    cc.h_norm_sq_max = std::max(cc.h_norm_sq_max, norm * norm);
  }
  cc.lambda1_tilde = b_min * b_min * min_eig;
  return cc;
}

}  // namespace coopstab
