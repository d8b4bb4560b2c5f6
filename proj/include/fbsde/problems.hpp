#pragma once

#include <string_view>
#include <utility>

#include "fbsde/model.hpp"

namespace fbsde {

/// One-factor Heston variance process driving the mean-variance hedging
/// opportunity process. Defaults are the benchmark parameters.
struct HestonParams {
  double mu = 0.3;
  double kappa = 0.5;
  double theta = 0.8;
  double sigma = 0.2;
  double rho = 0.8;
  double x0 = 1.0;
  double horizon = 1.0;
};

struct HestonConstants {
  double A, B, C, D, F;
};

/// A = -mu^2, B = -kappa - 2 rho sigma mu, C = sigma^2 (1 - 2 rho^2) / 2,
/// D = sqrt(B^2 - 4AC), F = kappa theta. DegenerateParameters if C = 0 or
/// B^2 - 4AC <= 0.
HestonConstants heston_constants(const HestonParams& p);

/// (chi0(t), chi1(t)) with Y(t, x) = exp(chi0(t) + chi1(t) x).
std::pair<double, double> heston_chi(double t, const HestonParams& p);

/// The Riccati BSDE written against the single Brownian motion driving the
/// variance: f1 = -y mu^2 x - 2 mu sqrt(x) rho z, f2 = -(rho z)^2 / y.
/// sqrt(x) is evaluated at max(x, box.lo). BoxTouchesZero if box.lo <= 0;
/// DegenerateParameters if the Feller condition fails.
FbsdeProblem heston_problem(const HestonParams& p = {}, Interval box = {0.1, 2.5});

/// (Z^1, Z^2) = (rho z, sqrt(1 - rho^2) z).
std::pair<double, double> heston_recover_components(double z, double rho);

/// Two-dimensional problem with Y = e^{-t} sin(x1 + 2 x2), f1(y) = y and
/// f2 = (5/2) sigma^2 e^{-2t} y / (y^2 + (z . s)^2), s = (3/sigma, -1/sigma).
/// An empty box means x0 +- 1 per axis.
FbsdeProblem sine2d_problem(double sigma = 0.2, Vec x0 = Vec::Constant(2, 0.5), Box box = {});

/// f = 0, b = 0, sigma = 1, Phi(x) = 2x + 1: Y = 2x + 1, Z = 2.
FbsdeProblem linear_problem();

/// "heston", "sine2d" or "linear" with default parameters.
FbsdeProblem make_problem(std::string_view id);

}  // namespace fbsde
