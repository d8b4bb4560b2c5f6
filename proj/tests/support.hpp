#pragma once

// Shared helpers for the unit tests: small hand-built problems, a seeded
// random source and a for_all driver for property checks.

#include <cstdint>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "fbsde/interp.hpp"
#include "fbsde/model.hpp"
#include "fbsde/quadrature.hpp"

namespace fbsde::test {

struct Rng {
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  std::mt19937_64 gen;
};

// Runs body(rng, case_index) for `cases` cases drawn from one seed, so a
// failing case is reproducible from the printed index.
template <class Body>
void for_all(int cases, std::uint64_t seed, Body&& body) {
  Rng rng(seed);
  for (int i = 0; i < cases; ++i) body(rng, i);
}

inline Vec vec1(double a) {
  Vec v(1);
  v(0) = a;
  return v;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Mat mat1(double a) {
  Mat m(1, 1);
  m(0, 0) = a;
  return m;
}

// dX = b dt + s dW in d dimensions, b and s constant, f = 0, Phi = 0.
inline FbsdeProblem constant_sde(int d, double b, double s) {
  FbsdeProblem p;
  p.id = "constant";
  p.dim_x = d;
  p.constant_drift = true;
  p.constant_diffusion = true;
  p.drift = [d, b](double, const Vec&) { return Vec(Vec::Constant(d, b)); };
  p.diffusion = [d, s](double, const Vec&) { return Mat(s * Mat::Identity(d, d)); };
  p.drift_dx = [d](double, const Vec&) { return Mat(Mat::Zero(d, d)); };
  p.diffusion_dx = [d](double, const Vec&) { return DiffusionJacobian{Mat::Zero(d, d), Mat::Zero(d, d)}; };
  p.gen_f1 = [](double, const Vec&, double, const RowVec&) { return 0.0; };
  p.gen_f2 = [](double, const Vec&, double, const RowVec&) { return 0.0; };
  p.terminal = [](const Vec&) { return 0.0; };
  p.terminal_dx = [d](const Vec&) { return RowVec(RowVec::Zero(d)); };
  return p;
}

// One-dimensional autonomous SDE from scalar coefficient functions and
// their x-derivatives.
struct Coeffs1d {
  std::function<double(double)> b, b_x, b_xx, s, s_x, s_xx;
};

inline FbsdeProblem sde_1d(const Coeffs1d& c) {
  FbsdeProblem p = constant_sde(1, 0.0, 1.0);
  p.id = "sde1d";
  p.constant_drift = false;
  p.constant_diffusion = false;
  p.drift = [c](double, const Vec& x) { return vec1(c.b(x(0))); };
  p.diffusion = [c](double, const Vec& x) { return mat1(c.s(x(0))); };
  p.drift_dx = [c](double, const Vec& x) { return mat1(c.b_x(x(0))); };
  p.diffusion_dx = [c](double, const Vec& x) { return DiffusionJacobian{mat1(c.s_x(x(0))), Mat()}; };
  p.drift_dt = [](double, double) { return 0.0; };
  p.diffusion_dt = [](double, double) { return 0.0; };
  p.drift_dxx = [c](double, double x) { return c.b_xx(x); };
  p.diffusion_dxx = [c](double, double x) { return c.s_xx(x); };
  return p;
}

inline std::function<double(double)> constant_fn(double v) {
  return [v](double) { return v; };
}

// Golub-Welsch on the Jacobi matrix of the physicists' Hermite weight; an
// oracle independent of the library's Newton-based rule.
inline GaussHermiteRule golub_welsch(int m) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussHermiteRule r;
  r.order = m;
  for (int i = 0; i < m; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    r.weights.push_back(std::sqrt(std::numbers::pi) * v * v);
  }
  return r;
}

// Five-point central differences.
inline double d1(const std::function<double(double)>& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

inline double d2(const std::function<double(double)>& f, double x, double h) {
  return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h);
}

// State-dependent 1-d dynamics with a nonlinear f1 and f2 = 0.
inline FbsdeProblem nonlinear_f1_problem() {
  auto p = sde_1d({[](double x) { return 0.3 - 0.5 * x; }, constant_fn(-0.5), constant_fn(0.0),
                   [](double x) { return 0.6 + 0.2 * std::sin(x); }, [](double x) { return 0.2 * std::cos(x); },
                   [](double x) { return -0.2 * std::sin(x); }});
  p.gen_f1 = [](double t, const Vec& x, double y, const RowVec& z) {
    return 0.4 * std::sin(y) + 0.3 * z(0) + 0.1 * x(0) * std::cos(t);
  };
  p.gen_f2 = [](double, const Vec&, double, const RowVec&) { return 0.0; };
  return p;
}

// Independently coded one-step oracle for the problem above: Euler forward
// map, Golub-Welsch quadrature, A-matrix Z and a Newton solve for the
// implicit Euler equation.
struct EulerOracle {
  const FbsdeProblem& p;
  const SplineInterpolant& next;
  double t, dt;
  GaussHermiteRule rule = golub_welsch(8);

  struct Moments {
    double ey = 0, ef = 0, z = 0;
  };

  Moments moments(double x) const {
    const double b = 0.3 - 0.5 * x, s = 0.6 + 0.2 * std::sin(x), s_x = 0.2 * std::cos(x);
    double ey = 0, ey_dw = 0, ef = 0, ef_dw = 0, corr = 0;
    for (int j = 0; j < rule.order; ++j) {
      const double w = rule.weights[j] / std::sqrt(std::numbers::pi);
      const double dw = std::sqrt(2.0 * dt) * rule.nodes[j];
      const double x1 = x + b * dt + s * dw;
      double v[2];
      next.eval(vec1(x1), v);
      const double f = 0.4 * std::sin(v[0]) + 0.3 * v[1] + 0.1 * x1 * std::cos(t + dt);
      const double s1 = 0.6 + 0.2 * std::sin(x1);
      const double a = 1.0 - 0.5 * dt + s_x * dw;
      ey += w * v[0];
      ey_dw += w * v[0] * dw;
      ef += w * f;
      ef_dw += w * f * dw;
      corr += w * (v[1] - v[1] / s1 * a * s);
    }
    return {ey, ef, ey_dw / dt + ef_dw - 0.5 * corr};
  }

  double implicit_euler(double x, double z) const {
    const Moments m = moments(x);
    double y = m.ey;
    for (int k = 0; k < 50; ++k) {
      const double g = y - m.ey - dt * (0.4 * std::sin(y) + 0.3 * z + 0.1 * x * std::cos(t));
      const double dg = 1.0 - dt * 0.4 * std::cos(y);
      y -= g / dg;
    }
    return y;
  }

  double explicit_euler(double x) const {
    const Moments m = moments(x);
    return m.ey + dt * m.ef;
  }
};

}  // namespace fbsde::test
