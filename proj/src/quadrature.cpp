#include "fbsde/quadrature.hpp"

#include <algorithm>
#include <numbers>

#include "fbsde/error.hpp"

namespace fbsde {

GaussHermiteRule gh_rule(int order) {
  if (order < 1 || order > 64) {
    throw Error(ErrorCode::OrderOutOfRange, "Gauss-Hermite order " + std::to_string(order) + " outside [1, 64]");
  }
  // Newton iteration on the orthonormal Hermite recurrence with the usual
  // asymptotic starting guesses for the largest roots.
  const int n = order;
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[static_cast<std::size_t>(i - 2)];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (n % 2 == 1 && i == half - 1) z = 0.0;
    x[static_cast<std::size_t>(i)] = z;
    x[static_cast<std::size_t>(n - 1 - i)] = -z;
    w[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
    w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
  }
  // The loop fills largest roots first.
  std::reverse(x.begin(), x.end());
  std::reverse(w.begin(), w.end());
  return GaussHermiteRule{order, std::move(x), std::move(w)};
}

GaussianStencil::GaussianStencil(const GaussHermiteRule& rule, int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorCode::InvalidConfig, "stencil dimension must be 1 or 2");
  const std::size_t m = rule.nodes.size();
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= m;
  const double norm = std::pow(std::numbers::pi, -0.5 * dim);
  units_.reserve(total);
  weights_.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vec u(dim);
    double wgt = norm;
    std::size_t rem = flat;
    for (int i = dim; i-- > 0;) {
      const std::size_t k = rem % m;
      rem /= m;
      u(i) = std::numbers::sqrt2 * rule.nodes[k];
      wgt *= rule.weights[k];
    }
    units_.push_back(u);
    weights_.push_back(wgt);
  }
}

namespace {

void check_finite(const Eigen::VectorXd& v, const Vec& x_next) {
  if (!v.allFinite()) {
    std::string where;
    for (int i = 0; i < x_next.size(); ++i) where += (i ? ", " : "") + std::to_string(x_next(i));
    throw Error(ErrorCode::NonFiniteSample, "integrand not finite at x = (" + where + ")");
  }
}

}  // namespace

Eigen::VectorXd cond_expect(const SampleFn& g, const Vec& x, double t, double dt, const ForwardStep& fwd,
                            const GaussHermiteRule& rule) {
  const GaussianStencil stencil(rule, static_cast<int>(x.size()));
  Eigen::VectorXd acc;
  for_each_sample(fwd, stencil, t, x, dt, [&](const Vec& x_next, const Vec&, double w) {
    const Eigen::VectorXd v = g(x_next);
    check_finite(v, x_next);
    if (acc.size() == 0) acc = Eigen::VectorXd::Zero(v.size());
    acc += w * v;
  });
  return acc;
}

Eigen::MatrixXd cond_expect_dw(const SampleFn& g, const Vec& x, double t, double dt, const ForwardStep& fwd,
                               const GaussHermiteRule& rule) {
  const GaussianStencil stencil(rule, static_cast<int>(x.size()));
  Eigen::MatrixXd acc;
  for_each_sample(fwd, stencil, t, x, dt, [&](const Vec& x_next, const Vec& dw, double w) {
    const Eigen::VectorXd v = g(x_next);
    check_finite(v, x_next);
    if (acc.size() == 0) acc = Eigen::MatrixXd::Zero(v.size(), x.size());
    acc += w * v * dw.transpose();
  });
  return acc;
}

}  // namespace fbsde
