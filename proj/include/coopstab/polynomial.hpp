#pragma once

#include <initializer_list>
#include <string>
#include <vector>

namespace coopstab {

/// Real univariate polynomial, coefficients stored in ascending powers.
///
/// Most functions in this library that the analysis needs to be smooth and
/// monotone (the controller weights, the supply-pair rescaling, the fitted
/// bounds) are polynomials with nonnegative coefficients, for which
/// monotonicity on [0, inf) is checkable by inspection.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients);
  Polynomial(std::initializer_list<double> coefficients);

  static Polynomial constant(double c);
  static Polynomial monomial(int degree, double c = 1.0);

  double operator()(double x) const;

  /// Degree of the highest nonzero coefficient; -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return degree() < 0; }
  double coefficient(int power) const;
  const std::vector<double>& coefficients() const { return coeffs_; }

  Polynomial derivative() const;
  /// Antiderivative vanishing at zero.
  Polynomial antiderivative() const;
  /// this(inner(x)).
  Polynomial compose(const Polynomial& inner) const;
  /// this(x^2), i.e. the even polynomial obtained by substituting a square.
  Polynomial of_square() const;

  bool has_nonnegative_coefficients() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial& a, const Polynomial& b);

  std::string to_string(const char* var = "x") const;

 private:
  void trim();
  std::vector<double> coeffs_;
};

/// Coefficient-wise maximum; dominates both arguments on [0, inf) when both
/// have nonnegative coefficients.
Polynomial coefficientwise_max(const Polynomial& a, const Polynomial& b);

}  // namespace coopstab
