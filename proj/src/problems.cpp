#include "fbsde/problems.hpp"

#include <algorithm>
#include <cmath>

#include "fbsde/error.hpp"

namespace fbsde {

namespace {

Mat scalar_mat(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return m;
}

Vec scalar_vec(double v) {
  Vec x(1);
  x(0) = v;
  return x;
}

}  // namespace

HestonConstants heston_constants(const HestonParams& p) {
  HestonConstants k{};
  k.A = -p.mu * p.mu;
  k.B = -p.kappa - 2.0 * p.rho * p.sigma * p.mu;
  const double skew = 1.0 - 2.0 * p.rho * p.rho;
  k.C = 0.5 * p.sigma * p.sigma * skew;
  k.F = p.kappa * p.theta;
  if (std::abs(skew) <= 1e-12 || k.C == 0.0) {
    throw Error(ErrorCode::DegenerateParameters, "C = sigma^2 (1 - 2 rho^2) / 2 vanishes");
  }
  const double disc = k.B * k.B - 4.0 * k.A * k.C;
  if (!(disc > 0.0)) throw Error(ErrorCode::DegenerateParameters, "B^2 - 4AC must be positive");
  k.D = std::sqrt(disc);
  return k;
}

std::pair<double, double> heston_chi(double t, const HestonParams& p) {
  const HestonConstants k = heston_constants(p);
  const double tau = p.horizon - t;
  const double decay = std::exp(-k.D * tau / 2.0);
  const double growth = std::exp(k.D * tau / 2.0);
  const double den = (k.B + k.D) * decay - (k.B - k.D) * growth;
  const double num = (k.B + k.D) * decay + (k.B - k.D) * growth;
  const double chi0 = k.F * (-k.B / (2.0 * k.C) * tau - std::log(den / (2.0 * k.D)) / k.C);
  const double chi1 = -k.B / (2.0 * k.C) + k.D / (2.0 * k.C) * num / den;
  return {chi0, chi1};
}

FbsdeProblem heston_problem(const HestonParams& p, Interval box) {
  if (!(box.lo > 0.0)) throw Error(ErrorCode::BoxTouchesZero, "Heston box must stay above x = 0");
  if (!(2.0 * p.kappa * p.theta >= p.sigma * p.sigma)) {
    throw Error(ErrorCode::DegenerateParameters, "Feller condition 2 kappa theta >= sigma^2 violated");
  }
  if (p.mu <= 0.0 || p.kappa <= 0.0 || p.theta <= 0.0 || p.sigma <= 0.0 || std::abs(p.rho) > 1.0) {
    throw Error(ErrorCode::DegenerateParameters, "Heston parameters out of range");
  }
  (void)heston_constants(p);

  const double lo = box.lo;
  const auto root = [lo](double x) { return std::sqrt(std::max(x, lo)); };
  const double mu = p.mu, kappa = p.kappa, theta = p.theta, sig = p.sigma, rho = p.rho;

  FbsdeProblem prob;
  prob.id = "heston";
  prob.dim_x = 1;
  prob.horizon = p.horizon;
  prob.drift = [=](double, const Vec& x) { return scalar_vec(kappa * (theta - x(0))); };
  prob.diffusion = [=](double, const Vec& x) { return scalar_mat(sig * root(x(0))); };
  prob.drift_dx = [=](double, const Vec&) { return scalar_mat(-kappa); };
  prob.diffusion_dx = [=](double, const Vec& x) {
    DiffusionJacobian j;
    j[0] = scalar_mat(sig / (2.0 * root(x(0))));
    return j;
  };
  prob.drift_dt = [](double, double) { return 0.0; };
  prob.drift_dxx = [](double, double) { return 0.0; };
  prob.diffusion_dt = [](double, double) { return 0.0; };
  prob.diffusion_dxx = [=](double, double x) {
    const double r = root(x);
    return -sig / (4.0 * r * r * r);
  };
  prob.f1_affine_in_y = true;
  prob.gen_f1 = [=](double, const Vec& x, double y, const RowVec& z) {
    return -y * mu * mu * x(0) - 2.0 * mu * root(x(0)) * rho * z(0);
  };
  prob.gen_f2 = [=](double, const Vec&, double y, const RowVec& z) {
    const double rz = rho * z(0);
    return -rz * rz / y;
  };
  prob.terminal = [](const Vec&) { return 1.0; };
  prob.terminal_dx = [](const Vec&) { return RowVec::Zero(1); };
  prob.analytic = AnalyticSolution{
      [p](double t, const Vec& x) {
        const auto [c0, c1] = heston_chi(t, p);
        return std::exp(c0 + c1 * x(0));
      },
      [p](double t, const Vec& x) {
        const auto [c0, c1] = heston_chi(t, p);
        RowVec z(1);
        z(0) = c1 * std::exp(c0 + c1 * x(0)) * p.sigma * std::sqrt(x(0));
        return z;
      }};
  prob.default_box = {box};
  prob.default_x0 = scalar_vec(p.x0);
  return prob;
}

std::pair<double, double> heston_recover_components(double z, double rho) {
  return {rho * z, std::sqrt(1.0 - rho * rho) * z};
}

FbsdeProblem sine2d_problem(double sigma, Vec x0, Box box) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma must be positive");
  if (x0.size() != 2) throw Error(ErrorCode::InvalidConfig, "x0 must be two-dimensional");
  if (box.empty()) box = {{x0(0) - 1.0, x0(0) + 1.0}, {x0(1) - 1.0, x0(1) + 1.0}};

  const double horizon = 1.0;
  const double s1 = 3.0 / sigma, s2 = -1.0 / sigma;
  FbsdeProblem prob;
  prob.id = "sine2d";
  prob.dim_x = 2;
  prob.horizon = horizon;
  prob.constant_drift = true;
  prob.constant_diffusion = true;
  prob.drift = [](double, const Vec&) { return Vec::Zero(2); };
  prob.diffusion = [sigma](double, const Vec&) { return Mat(sigma * Mat::Identity(2, 2)); };
  prob.drift_dx = [](double, const Vec&) { return Mat::Zero(2, 2); };
  prob.diffusion_dx = [](double, const Vec&) { return DiffusionJacobian{Mat::Zero(2, 2), Mat::Zero(2, 2)}; };
  prob.f1_affine_in_y = true;
  prob.gen_f1 = [](double, const Vec&, double y, const RowVec&) { return y; };
  prob.gen_f2 = [=](double t, const Vec&, double y, const RowVec& z) {
    const double zs = z(0) * s1 + z(1) * s2;
    return 2.5 * sigma * sigma * std::exp(-2.0 * t) * y / (y * y + zs * zs);
  };
  prob.terminal = [=](const Vec& x) { return std::exp(-horizon) * std::sin(x(0) + 2.0 * x(1)); };
  prob.terminal_dx = [=](const Vec& x) {
    const double c = std::exp(-horizon) * std::cos(x(0) + 2.0 * x(1));
    RowVec g(2);
    g << c, 2.0 * c;
    return g;
  };
  prob.analytic = AnalyticSolution{
      [](double t, const Vec& x) { return std::exp(-t) * std::sin(x(0) + 2.0 * x(1)); },
      [sigma](double t, const Vec& x) {
        const double c = sigma * std::exp(-t) * std::cos(x(0) + 2.0 * x(1));
        RowVec z(2);
        z << c, 2.0 * c;
        return z;
      }};
  prob.default_box = box;
  prob.default_x0 = x0;
  return prob;
}

FbsdeProblem linear_problem() {
  FbsdeProblem prob;
  prob.id = "linear";
  prob.dim_x = 1;
  prob.horizon = 1.0;
  prob.constant_drift = true;
  prob.constant_diffusion = true;
  prob.drift = [](double, const Vec&) { return Vec::Zero(1); };
  prob.diffusion = [](double, const Vec&) { return Mat::Identity(1, 1); };
  prob.drift_dx = [](double, const Vec&) { return Mat::Zero(1, 1); };
  prob.diffusion_dx = [](double, const Vec&) { return DiffusionJacobian{Mat::Zero(1, 1), Mat()}; };
  prob.f1_affine_in_y = true;
  prob.f2_affine_in_y = true;
  prob.gen_f1 = [](double, const Vec&, double, const RowVec&) { return 0.0; };
  prob.gen_f2 = [](double, const Vec&, double, const RowVec&) { return 0.0; };
  prob.terminal = [](const Vec& x) { return 2.0 * x(0) + 1.0; };
  prob.terminal_dx = [](const Vec&) { return RowVec::Constant(1, 2.0); };
  prob.analytic = AnalyticSolution{[](double, const Vec& x) { return 2.0 * x(0) + 1.0; },
                                   [](double, const Vec&) { return RowVec::Constant(1, 2.0); }};
  prob.default_box = {{-2.0, 3.0}};
  prob.default_x0 = Vec::Constant(1, 0.5);
  return prob;
}

FbsdeProblem make_problem(std::string_view id) {
  if (id == "heston") return heston_problem();
  if (id == "sine2d") return sine2d_problem();
  if (id == "linear") return linear_problem();
  throw Error(ErrorCode::InvalidConfig, "unknown problem '" + std::string(id) + "'");
}

}  // namespace fbsde
