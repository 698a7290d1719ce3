#include "lagnet/polynomial.hpp"

#include <memory>

#include "lagnet/error.hpp"

namespace lagnet {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// c · Π_k x_k^{e_k} with the exponent of variable `d1` (and `d2`) lowered by differentiation.
double term_derivative(const Monomial& t, const Vec& x, int d1, int d2) {
  std::vector<int> e = t.exponents;
  double factor = t.coefficient;
  for (int d : {d1, d2}) {
    if (d < 0) continue;
    if (e[d] == 0) return 0.0;
    factor *= e[d];
    --e[d];
  }
  for (std::size_t k = 0; k < e.size(); ++k) factor *= ipow(x(static_cast<Eigen::Index>(k)), e[k]);
  return factor;
}

}  // namespace

Polynomial::Polynomial(int dim, std::vector<Monomial> terms) : dim_(dim), terms_(std::move(terms)) {
  if (dim_ <= 0) throw Error(ErrorKind::Dimension, "polynomial dimension must be positive");
  for (const auto& t : terms_) {
    if (static_cast<int>(t.exponents.size()) != dim_) {
      throw Error(ErrorKind::Dimension, "monomial exponent vector has " +
                                            std::to_string(t.exponents.size()) +
                                            " entries, expected " + std::to_string(dim_));
    }
    for (int e : t.exponents) {
      if (e < 0) throw Error(ErrorKind::InvalidArgument, "negative exponent in monomial");
    }
  }
}

double Polynomial::value(const Vec& x) const {
  double v = 0.0;
  for (const auto& t : terms_) v += term_derivative(t, x, -1, -1);
  return v;
}

Vec Polynomial::gradient(const Vec& x) const {
  Vec g = Vec::Zero(dim_);
  for (const auto& t : terms_)
    for (int d = 0; d < dim_; ++d) g(d) += term_derivative(t, x, d, -1);
  return g;
}

Mat Polynomial::hessian(const Vec& x) const {
  Mat H = Mat::Zero(dim_, dim_);
  for (const auto& t : terms_)
    for (int a = 0; a < dim_; ++a)
      for (int b = a; b < dim_; ++b) H(a, b) += term_derivative(t, x, a, b);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < a; ++b) H(a, b) = H(b, a);
  return H;
}

ScalarFunction Polynomial::as_function() const {
  auto self = std::make_shared<const Polynomial>(*this);
  return {[self](const Vec& x) { return self->value(x); },
          [self](const Vec& x) { return self->gradient(x); },
          [self](const Vec& x) { return self->hessian(x); }};
}

}  // namespace lagnet
