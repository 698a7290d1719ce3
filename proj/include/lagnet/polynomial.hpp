#pragma once

#include <vector>

#include "lagnet/problem.hpp"

namespace lagnet {

struct Monomial {
  double coefficient = 0.0;
  std::vector<int> exponents;
};

/// Sum of monomials in n variables, with exact first and second derivatives.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int dim, std::vector<Monomial> terms);

  int dim() const { return dim_; }
  const std::vector<Monomial>& terms() const { return terms_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  ScalarFunction as_function() const;

 private:
  int dim_ = 0;
  std::vector<Monomial> terms_;
};

}  // namespace lagnet
