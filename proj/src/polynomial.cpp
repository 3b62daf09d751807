#include "coopstab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coopstab {

Polynomial::Polynomial(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) {
  trim();
}

Polynomial::Polynomial(std::initializer_list<double> coefficients) : coeffs_(coefficients) {
  trim();
}

Polynomial Polynomial::constant(double c) { return Polynomial(std::vector<double>{c}); }

Polynomial Polynomial::monomial(int degree, double c) {
  std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1, 0.0);
  coeffs.back() = c;
  return Polynomial(std::move(coeffs));
}

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

int Polynomial::degree() const { return static_cast<int>(coeffs_.size()) - 1; }

double Polynomial::coefficient(int power) const {
  if (power < 0 || power >= static_cast<int>(coeffs_.size())) return 0.0;
  return coeffs_[power];
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<double> out(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) out[k - 1] = coeffs_[k] * static_cast<double>(k);
  return Polynomial(std::move(out));
}

Polynomial Polynomial::antiderivative() const {
  if (coeffs_.empty()) return {};
  std::vector<double> out(coeffs_.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out[k + 1] = coeffs_[k] / static_cast<double>(k + 1);
  return Polynomial(std::move(out));
}

Polynomial Polynomial::compose(const Polynomial& inner) const {
  Polynomial acc;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = acc * inner;
    acc += Polynomial::constant(*it);
  }
  return acc;
}

Polynomial Polynomial::of_square() const {
  if (coeffs_.empty()) return {};
  std::vector<double> out(2 * coeffs_.size() - 1, 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out[2 * k] = coeffs_[k];
  return Polynomial(std::move(out));
}

bool Polynomial::has_nonnegative_coefficients() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c >= 0.0; });
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), 0.0);
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  trim();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.coeffs_.empty() || b.coeffs_.empty()) return {};
  std::vector<double> out(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(out));
}

bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

std::string Polynomial::to_string(const char* var) const {
  if (coeffs_.empty()) return "0";
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_[k] == 0.0) continue;
    if (!first) os << (coeffs_[k] < 0 ? " - " : " + ");
    else if (coeffs_[k] < 0) os << "-";
    os << std::abs(coeffs_[k]);
    if (k >= 1) os << "*" << var;
    if (k >= 2) os << "^" << k;
    first = false;
  }
  return os.str();
}

Polynomial coefficientwise_max(const Polynomial& a, const Polynomial& b) {
  const std::size_t n = std::max(a.coefficients().size(), b.coefficients().size());
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = std::max(a.coefficient(static_cast<int>(k)), b.coefficient(static_cast<int>(k)));
  return Polynomial(std::move(out));
}

}  // namespace coopstab
