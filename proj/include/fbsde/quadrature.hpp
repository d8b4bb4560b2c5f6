#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "fbsde/forward.hpp"
#include "fbsde/model.hpp"

namespace fbsde {

/// Physicists' Gauss-Hermite rule: nodes are the roots of H_M, weight e^{-a^2}.
struct GaussHermiteRule {
  int order = 0;
  std::vector<double> nodes;    // ascending, symmetric about 0
  std::vector<double> weights;  // positive, summing to sqrt(pi)
};

/// Throws OrderOutOfRange unless 1 <= order <= 64.
GaussHermiteRule gh_rule(int order);

/// Tensor-product Gauss-Hermite stencil for a d-dimensional Brownian
/// increment. With dW = sqrt(dt) * unit(j),
///   E[g(dW)] ~= sum_j weight(j) * g(dW),
/// where unit(j) = sqrt(2) * a_j and weight(j) = pi^{-d/2} prod_i w_{j_i}.
class GaussianStencil {
 public:
  GaussianStencil(const GaussHermiteRule& rule, int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  const Vec& unit(std::size_t j) const { return units_[j]; }
  double weight(std::size_t j) const { return weights_[j]; }

 private:
  int dim_;
  std::vector<Vec> units_;
  std::vector<double> weights_;
};

/// Calls visit(x_next, dw, weight) for every stencil point, where
/// x_next = x + psi(t, x, dt, dw). Points are visited in a fixed order.
template <class Visitor>
void for_each_sample(const ForwardStep& fwd, const GaussianStencil& stencil, double t, const Vec& x, double dt,
                     Visitor&& visit) {
  const double root_dt = std::sqrt(dt);
  for (std::size_t j = 0; j < stencil.size(); ++j) {
    const Vec dw = root_dt * stencil.unit(j);
    const Vec x_next = x + fwd.psi(t, x, dt, dw);
    visit(x_next, dw, stencil.weight(j));
  }
}

using SampleFn = std::function<Eigen::VectorXd(const Vec& x_next)>;

/// E[g(X^{n+1}) | X^n = x]. Throws NonFiniteSample if g is not finite at a
/// quadrature point.
Eigen::VectorXd cond_expect(const SampleFn& g, const Vec& x, double t, double dt, const ForwardStep& fwd,
                            const GaussHermiteRule& rule);

/// E[g(X^{n+1}) dW^T | X^n = x] as an m x d matrix.
Eigen::MatrixXd cond_expect_dw(const SampleFn& g, const Vec& x, double t, double dt, const ForwardStep& fwd,
                               const GaussHermiteRule& rule);

}  // namespace fbsde
