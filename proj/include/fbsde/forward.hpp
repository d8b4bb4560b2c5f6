#pragma once

#include "fbsde/model.hpp"

namespace fbsde {

/// One-step forward discretization X^{n+1} = X^n + psi(t_n, X^n, dt, dW).
///
/// Milstein and weak order-2 Taylor are one-dimensional schemes. For d > 1
/// they are accepted only when every correction term vanishes (constant
/// diffusion, and for weak order 2 also constant drift), where they coincide
/// with Euler. Construction throws MissingDerivative otherwise, or when a
/// derivative the variant needs is not supplied by the problem.
class ForwardStep {
 public:
  ForwardStep(const FbsdeProblem& problem, ForwardScheme variant);

  ForwardScheme variant() const { return variant_; }
  const FbsdeProblem& problem() const { return *problem_; }

  /// The scheme increment psi.
  Vec psi(double t, const Vec& x, double dt, const Vec& dw) const;

  /// Integral of the Malliavin derivative D_s X^{n+1} over (t_n, t_{n+1}].
  /// D_s X^{n+1} does not depend on s there, so this is dt times it.
  Mat malliavin_integral(double t, const Vec& x, double dt, const Vec& dw) const;

 private:
  struct Coefficients1d {
    double b, sigma, b_x, sigma_x, b_t, sigma_t, b_xx, sigma_xx;
  };
  Coefficients1d coefficients_1d(double t, double x) const;

  const FbsdeProblem* problem_;
  ForwardScheme variant_;
  // Variant actually evaluated; multi-d problems whose corrections vanish
  // run the Euler formulas.
  ForwardScheme effective_;
};

Vec psi(const ForwardStep& step, double t, const Vec& x, double dt, const Vec& dw);
Mat malliavin_integral(const ForwardStep& step, double t, const Vec& x, double dt, const Vec& dw);

/// A = I + (d_x b) dt + sum_j (d_x sigma_j) dW_j, the one-step linearized flow.
Mat amatrix(const FbsdeProblem& problem, double t, const Vec& x, double dt, const Vec& dw);

}  // namespace fbsde
