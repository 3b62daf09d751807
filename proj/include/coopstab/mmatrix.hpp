#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace coopstab {

inline constexpr double kEigenTol = 1e-9;
inline constexpr double kOffDiagonalTol = 1e-12;

struct MMatrixCheck {
  bool is_m_matrix = false;
  double max_off_diagonal = 0.0;
  double min_real_part = 0.0;
  Eigen::VectorXcd eigenvalues;
  std::vector<std::string> diagnostics;
};

/// Nonpositive off-diagonal entries (up to `tol_offdiag`) and every
/// eigenvalue with real part above `tol`. Throws std::invalid_argument on a
/// non-square input.
MMatrixCheck is_m_matrix(const Eigen::MatrixXd& h, double tol = kEigenTol,
                         double tol_offdiag = kOffDiagonalTol);

/// Positive diagonal D with D H + H^T D positive definite.
struct MMatrixCertificate {
  Eigen::VectorXd d_diag;
  double min_eig = 0.0;  // lambda_min(D H + H^T D)
  Eigen::VectorXd eigen_real_parts;  // of H itself
  std::string method;  // "identity", "constructive" or "random_search"
};

struct CertificateOptions {
  double tol = kEigenTol;
  std::uint64_t seed = 1;
  int max_iterations = 20000;
};

/// Thrown when every search stage fails; carries the best value seen.
class CertificateSearchError : public std::runtime_error {
 public:
  CertificateSearchError(const std::string& what, double best_min_eig)
      : std::runtime_error(what), best_min_eig_(best_min_eig) {}
  double best_min_eig() const { return best_min_eig_; }

 private:
  double best_min_eig_;
};

/// lambda_min(diag(d) H + H^T diag(d)).
double symmetrized_min_eig(const Eigen::MatrixXd& h, const Eigen::VectorXd& d);

/// Tries D = I, then D = diag(v_i / u_i) with u = H^{-1} 1 and v = H^{-T} 1,
/// then a seeded random search over positive diagonals. Every candidate is
/// accepted only after a numeric positive-definiteness check.
MMatrixCertificate synthesize_diagonal_certificate(
    const Eigen::MatrixXd& h, const CertificateOptions& options = {});

struct CouplingConstants {
  double d_max = 0.0;
  double d_min = 0.0;
  double lambda1_tilde = 0.0;  // b_min^2 * min_p lambda_min(D_p H_p + H_p^T D_p)
  double h_norm_sq_max = 0.0;  // max_p ||H_p||_2^2
  double b_min = 1.0;
  double b_max = 1.0;
};

CouplingConstants coupling_constants(std::span<const MMatrixCertificate> certificates,
                                     std::span<const Eigen::MatrixXd> h_matrices,
                                     double b_min, double b_max);

}  // namespace coopstab
