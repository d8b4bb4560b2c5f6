#include <doctest.h>

#include <cmath>

#include "fbsde/error.hpp"
#include "fbsde/problems.hpp"
#include "support.hpp"

using namespace fbsde;
using namespace fbsde::test;

namespace {

// Extended-precision evaluation of the Riccati closed form, coded from the
// definitions independently of the library.
struct LongChi {
  long double c0, c1;
};

LongChi long_chi(long double t, const HestonParams& p) {
  const long double mu = p.mu, kappa = p.kappa, theta = p.theta, sig = p.sigma, rho = p.rho;
  const long double A = -mu * mu;
  const long double B = -kappa - 2.0L * rho * sig * mu;
  const long double C = 0.5L * sig * sig * (1.0L - 2.0L * rho * rho);
  const long double F = kappa * theta;
  const long double D = std::sqrt(B * B - 4.0L * A * C);
  const long double tau = p.horizon - t;
  const long double e_minus = std::exp(-D * tau / 2.0L), e_plus = std::exp(D * tau / 2.0L);
  const long double den = (B + D) * e_minus - (B - D) * e_plus;
  const long double num = (B + D) * e_minus + (B - D) * e_plus;
  return {F * (-B / (2.0L * C) * tau - std::log(den / (2.0L * D)) / C), -B / (2.0L * C) + D / (2.0L * C) * num / den};
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected fbsde::Error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("heston constants at the benchmark parameters") {
  const auto k = heston_constants(HestonParams{});
  CHECK(k.A == doctest::Approx(-0.09).epsilon(1e-15));
  CHECK(k.B == doctest::Approx(-0.596).epsilon(1e-15));
  CHECK(k.C == doctest::Approx(-0.0056).epsilon(1e-13));
  CHECK(k.F == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(k.D == doctest::Approx(0.594306318324145).epsilon(1e-14));
  const long double d = std::sqrt(0.355216L - 0.002016L);
  CHECK(std::abs(k.D - static_cast<double>(d)) <= 1e-15);
}

TEST_CASE("chi against the extended-precision oracle") {
  const HestonParams p;
  for (double t : {0.0, 0.1, 0.37, 0.5, 0.9, 0.999}) {
    const auto [c0, c1] = heston_chi(t, p);
    const auto ref = long_chi(t, p);
    CHECK(std::abs(c0 - static_cast<double>(ref.c0)) <= 1e-13 * std::max(1.0, std::abs(c0)));
    CHECK(std::abs(c1 - static_cast<double>(ref.c1)) <= 1e-13 * std::max(1.0, std::abs(c1)));
  }
  // reference Y0 at x0 = 1
  const auto ref = long_chi(0.0L, p);
  const double y0 = static_cast<double>(std::exp(ref.c0 + ref.c1));
  CHECK(heston_problem().analytic->y(0.0, vec1(1.0)) == doctest::Approx(y0).epsilon(1e-14));
}

TEST_CASE("chi vanishes at the horizon") {
  for_all(20, 61, [](Rng& rng, int) {
    HestonParams p;
    p.mu = rng.uniform(0.1, 0.5);
    p.kappa = rng.uniform(0.2, 2.0);
    p.sigma = rng.uniform(0.1, 0.4);
    p.rho = rng.uniform(-0.6, 0.6);
    p.horizon = rng.uniform(0.5, 2.0);
    const auto [c0, c1] = heston_chi(p.horizon, p);
    CHECK(std::abs(c0) <= 1e-12);
    CHECK(std::abs(c1) <= 1e-12);
  });
  const auto [c0, c1] = heston_chi(1.0, HestonParams{});
  CHECK(std::abs(c0) <= 1e-12);
  CHECK(std::abs(c1) <= 1e-12);
}

TEST_CASE("chi is smooth on [0, T]") {
  const HestonParams p;
  double prev0 = heston_chi(0.0, p).first, prev1 = heston_chi(0.0, p).second;
  for (int i = 1; i <= 1000; ++i) {
    const auto [c0, c1] = heston_chi(i / 1000.0, p);
    CHECK(std::abs(c0 - prev0) < 1e-3);
    CHECK(std::abs(c1 - prev1) < 1e-3);
    prev0 = c0;
    prev1 = c1;
  }
}

TEST_CASE("zero mean level gives zero chi0") {
  HestonParams p;
  p.theta = 0.0;
  for (double t : {0.0, 0.3, 0.8, 1.0}) CHECK(heston_chi(t, p).first == 0.0);
}

TEST_CASE("degenerate heston settings") {
  HestonParams p;
  p.rho = 1.0 / std::sqrt(2.0);
  CHECK(code_of([&] { (void)heston_constants(p); }) == ErrorCode::DegenerateParameters);
  CHECK(code_of([] { (void)heston_problem(HestonParams{}, {0.0, 2.0}); }) == ErrorCode::BoxTouchesZero);
  HestonParams feller;
  feller.sigma = 1.0;  // 2 kappa theta = 0.8 < 1
  CHECK(code_of([&] { (void)heston_problem(feller); }) == ErrorCode::DegenerateParameters);
}

TEST_CASE("recovering the two hedging components") {
  CHECK(heston_recover_components(2.0, 0.0) == std::pair{0.0, 2.0});
  CHECK(heston_recover_components(2.0, 1.0) == std::pair{2.0, 0.0});
  const auto [a, b] = heston_recover_components(1.0, 0.8);
  CHECK(a == doctest::Approx(0.8));
  CHECK(b == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("heston generator split and analytic pair") {
  const auto prob = heston_problem();
  const double mu = 0.3, rho = 0.8;
  for_all(20, 62, [&](Rng& rng, int) {
    const double x = rng.uniform(0.2, 2.4), y = rng.uniform(0.5, 1.5), z = rng.uniform(-0.2, 0.2);
    RowVec zz(1);
    zz(0) = z;
    CHECK(prob.gen_f1(0.3, vec1(x), y, zz) == doctest::Approx(-y * mu * mu * x - 2 * mu * std::sqrt(x) * rho * z));
    CHECK(prob.gen_f2(0.3, vec1(x), y, zz) == doctest::Approx(-(rho * z) * (rho * z) / y));
  });
  for (double x : {0.1, 1.0, 2.5}) CHECK(std::abs(prob.analytic->y(1.0, vec1(x)) - 1.0) <= 1e-12);

  // Z = sigma sqrt(x) dY/dx, checked by a central difference at (0, x0)
  const auto y_of = [&](double x) { return prob.analytic->y(0.0, vec1(x)); };
  CHECK(prob.analytic->z(0.0, vec1(1.0))(0) == doctest::Approx(0.2 * d1(y_of, 1.0, 1e-3)).epsilon(1e-10));
}

TEST_CASE("heston analytic pair satisfies the generator identity") {
  // -Y_t - kappa (theta - x) Y_x - sigma^2 x Y_xx / 2 = f(t, x, Y, Z)
  const auto prob = heston_problem();
  const double kappa = 0.5, theta = 0.8, sig = 0.2;
  for_all(100, 63, [&](Rng& rng, int) {
    const double t = rng.uniform(0.02, 0.98), x = rng.uniform(0.2, 2.4);
    const auto y_t = [&](double s) { return prob.analytic->y(s, vec1(x)); };
    const auto y_x = [&](double s) { return prob.analytic->y(t, vec1(s)); };
    const double lhs =
        -d1(y_t, t, 1e-3) - kappa * (theta - x) * d1(y_x, x, 1e-3) - 0.5 * sig * sig * x * d2(y_x, x, 1e-3);
    const double rhs = prob.generator(t, vec1(x), prob.analytic->y(t, vec1(x)), prob.analytic->z(t, vec1(x)));
    CHECK(std::abs(lhs - rhs) <= 1e-8);
  });
}

TEST_CASE("two-dimensional example analytic pair satisfies the generator identity") {
  // -Y_t - sigma^2 (Y_11 + Y_22) / 2 = f(t, x, Y, Z)
  const auto prob = sine2d_problem();
  const double sig = 0.2;
  for_all(100, 64, [&](Rng& rng, int) {
    const double t = rng.uniform(0.02, 0.98), a = rng.uniform(-0.4, 1.4), b = rng.uniform(-0.4, 1.4);
    const auto y_t = [&](double s) { return prob.analytic->y(s, vec2(a, b)); };
    const auto y_1 = [&](double s) { return prob.analytic->y(t, vec2(s, b)); };
    const auto y_2 = [&](double s) { return prob.analytic->y(t, vec2(a, s)); };
    const double lhs = -d1(y_t, t, 1e-3) - 0.5 * sig * sig * (d2(y_1, a, 1e-3) + d2(y_2, b, 1e-3));
    const Vec x = vec2(a, b);
    const double rhs = prob.generator(t, x, prob.analytic->y(t, x), prob.analytic->z(t, x));
    CHECK(std::abs(lhs - rhs) <= 1e-8);
    // Z = sigma grad Y
    CHECK(prob.analytic->z(t, x)(0) == doctest::Approx(sig * d1(y_1, a, 1e-3)).epsilon(1e-9).scale(1e-9));
    CHECK(prob.analytic->z(t, x)(1) == doctest::Approx(sig * d1(y_2, b, 1e-3)).epsilon(1e-9).scale(1e-9));
  });
}

TEST_CASE("two-dimensional example generator split") {
  const auto prob = sine2d_problem();
  RowVec z(2);
  z << 1.0, 0.0;  // z . s = 15
  CHECK(prob.gen_f2(0.0, vec2(0, 0), 1.0, z) == doctest::Approx(2.5 * 0.04 / (1.0 + 225.0)));
  z << 0.0, 1.0;  // z . s = -5
  CHECK(prob.gen_f2(0.5, vec2(0, 0), 2.0, z) == doctest::Approx(2.5 * 0.04 * std::exp(-1.0) * 2.0 / (4.0 + 25.0)));
  CHECK(prob.gen_f1(0.5, vec2(0.3, 0.1), 0.7, z) == 0.7);
  CHECK(prob.default_box.size() == 2);
  CHECK(prob.default_box[0].lo == doctest::Approx(-0.5));
  CHECK(prob.default_box[1].hi == doctest::Approx(1.5));
  CHECK(code_of([] { (void)sine2d_problem(0.0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("linear problem") {
  const auto p = linear_problem();
  CHECK(p.analytic->y(0.0, vec1(0.5)) == 2.0);
  CHECK(p.analytic->z(0.3, vec1(-1.0))(0) == 2.0);
  CHECK(make_problem("linear").id == "linear");
  CHECK(make_problem("heston").id == "heston");
  CHECK(make_problem("sine2d").dim_x == 2);
  CHECK(code_of([] { (void)make_problem("nope"); }) == ErrorCode::InvalidConfig);
}
