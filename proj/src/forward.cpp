#include "fbsde/forward.hpp"

#include "fbsde/error.hpp"

namespace fbsde {

namespace {

[[noreturn]] void missing(std::string_view what, ForwardScheme v) {
  throw Error(ErrorCode::MissingDerivative,
              std::string(to_string(v)) + " forward scheme needs " + std::string(what));
}

}  // namespace

ForwardStep::ForwardStep(const FbsdeProblem& problem, ForwardScheme variant)
    : problem_(&problem), variant_(variant), effective_(variant) {
  const FbsdeProblem& p = problem;
  if (variant == ForwardScheme::Euler) return;

  if (p.dim_x > 1) {
    if (!p.constant_diffusion) missing("a constant diffusion when d > 1", variant);
    if (variant == ForwardScheme::WeakTaylor2 && !p.constant_drift) {
      missing("a constant drift when d > 1", variant);
    }
    effective_ = ForwardScheme::Euler;
    return;
  }

  if (!p.constant_diffusion && !p.diffusion_dx) missing("d sigma / dx", variant);
  if (variant == ForwardScheme::WeakTaylor2) {
    if (!p.constant_drift && (!p.drift_dx || !p.drift_dt || !p.drift_dxx)) {
      missing("b_x, b_t and b_xx", variant);
    }
    if (!p.constant_diffusion && (!p.diffusion_dt || !p.diffusion_dxx)) {
      missing("sigma_t and sigma_xx", variant);
    }
  }
}

ForwardStep::Coefficients1d ForwardStep::coefficients_1d(double t, double x) const {
  const FbsdeProblem& p = *problem_;
  Vec xv(1);
  xv(0) = x;
  Coefficients1d c{};
  c.b = p.drift(t, xv)(0);
  c.sigma = p.diffusion(t, xv)(0, 0);
  if (!p.constant_diffusion) {
    c.sigma_x = p.diffusion_dx(t, xv)[0](0, 0);
    if (effective_ == ForwardScheme::WeakTaylor2) {
      c.sigma_t = p.diffusion_dt(t, x);
      c.sigma_xx = p.diffusion_dxx(t, x);
    }
  }
  if (!p.constant_drift && effective_ == ForwardScheme::WeakTaylor2) {
    c.b_x = p.drift_dx(t, xv)(0, 0);
    c.b_t = p.drift_dt(t, x);
    c.b_xx = p.drift_dxx(t, x);
  }
  return c;
}

Vec ForwardStep::psi(double t, const Vec& x, double dt, const Vec& dw) const {
  if (effective_ == ForwardScheme::Euler) {
    return problem_->drift(t, x) * dt + problem_->diffusion(t, x) * dw;
  }
  const Coefficients1d c = coefficients_1d(t, x(0));
  const double xi = dw(0);
  double inc = c.b * dt + c.sigma * xi + 0.5 * c.sigma * c.sigma_x * (xi * xi - dt);
  if (effective_ == ForwardScheme::WeakTaylor2) {
    inc += 0.5 * (c.sigma_t + c.sigma * c.b_x + c.b * c.sigma_x + 0.5 * c.sigma * c.sigma * c.sigma_xx) * dt * xi;
    inc += 0.5 * (c.b_t + c.b * c.b_x + 0.5 * c.sigma * c.sigma * c.b_xx) * dt * dt;
  }
  Vec out(1);
  out(0) = inc;
  return out;
}

Mat ForwardStep::malliavin_integral(double t, const Vec& x, double dt, const Vec& dw) const {
  if (effective_ == ForwardScheme::Euler) return problem_->diffusion(t, x) * dt;
  const Coefficients1d c = coefficients_1d(t, x(0));
  double d = c.sigma + c.sigma * c.sigma_x * dw(0);
  if (effective_ == ForwardScheme::WeakTaylor2) {
    d += 0.5 * dt * (c.sigma_t + c.sigma * c.b_x + c.b * c.sigma_x + 0.5 * c.sigma * c.sigma * c.sigma_xx);
  }
  Mat out(1, 1);
  out(0, 0) = d * dt;
  return out;
}

Vec psi(const ForwardStep& step, double t, const Vec& x, double dt, const Vec& dw) {
  return step.psi(t, x, dt, dw);
}

Mat malliavin_integral(const ForwardStep& step, double t, const Vec& x, double dt, const Vec& dw) {
  return step.malliavin_integral(t, x, dt, dw);
}

Mat amatrix(const FbsdeProblem& problem, double t, const Vec& x, double dt, const Vec& dw) {
  const int d = problem.dim_x;
  Mat a = Mat::Identity(d, d);
  if (!problem.constant_drift) {
    if (!problem.drift_dx) throw Error(ErrorCode::MissingDerivative, "A matrix needs d b / dx");
    a += problem.drift_dx(t, x) * dt;
  }
  if (!problem.constant_diffusion) {
    if (!problem.diffusion_dx) throw Error(ErrorCode::MissingDerivative, "A matrix needs d sigma / dx");
    const DiffusionJacobian jac = problem.diffusion_dx(t, x);
    for (int j = 0; j < d; ++j) a += jac[static_cast<std::size_t>(j)] * dw(j);
  }
  return a;
}

}  // namespace fbsde
