#include <doctest.h>

#include <cmath>

#include "fbsde/error.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/quadrature.hpp"
#include "support.hpp"

using namespace fbsde;
using namespace fbsde::test;

namespace {

// sigma(x) = x, b = const
FbsdeProblem proportional_noise(double b) {
  return sde_1d({constant_fn(b), constant_fn(0.0), constant_fn(0.0), [](double x) { return x; }, constant_fn(1.0),
                 constant_fn(0.0)});
}

}  // namespace

TEST_CASE("euler increment with unit noise") {
  const auto p = constant_sde(1, 0.0, 1.0);
  const ForwardStep fwd(p, ForwardScheme::Euler);
  CHECK(psi(fwd, 0.0, vec1(2.0), 0.1, vec1(0.3))(0) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("milstein correction vanishes when dw^2 equals dt") {
  const auto p = proportional_noise(0.0);
  const ForwardStep fwd(p, ForwardScheme::Milstein);
  CHECK(psi(fwd, 0.0, vec1(1.0), 0.25, vec1(0.5))(0) == doctest::Approx(0.5).epsilon(1e-15));
  // and is 0.5 sigma sigma_x (dw^2 - dt) otherwise
  CHECK(psi(fwd, 0.0, vec1(1.0), 0.25, vec1(0.1))(0) == doctest::Approx(0.1 + 0.5 * (0.01 - 0.25)).epsilon(1e-15));
}

TEST_CASE("weak order 2 with constant coefficients equals euler") {
  for_all(50, 41, [](Rng& rng, int) {
    const double b = rng.uniform(-1, 1), s = rng.uniform(0.1, 2);
    const auto p = sde_1d({constant_fn(b), constant_fn(0.0), constant_fn(0.0), constant_fn(s), constant_fn(0.0),
                           constant_fn(0.0)});
    const ForwardStep wt2(p, ForwardScheme::WeakTaylor2), euler(p, ForwardScheme::Euler);
    const Vec x = vec1(rng.uniform(-2, 2)), dw = vec1(rng.uniform(-1, 1));
    const double dt = rng.uniform(0.001, 0.5);
    CHECK(psi(wt2, 0.0, x, dt, dw)(0) == doctest::Approx(psi(euler, 0.0, x, dt, dw)(0)).epsilon(1e-15));
    CHECK(malliavin_integral(wt2, 0.0, x, dt, dw)(0, 0) ==
          doctest::Approx(malliavin_integral(euler, 0.0, x, dt, dw)(0, 0)).epsilon(1e-15));
  });
}

TEST_CASE("weak order 2 terms on a non-trivial coefficient set") {
  // b = 1 - x, sigma = x: sigma b_x + b sigma_x = -x + 1 - x, b b_x = x - 1
  const auto p = sde_1d({[](double x) { return 1 - x; }, constant_fn(-1.0), constant_fn(0.0),
                         [](double x) { return x; }, constant_fn(1.0), constant_fn(0.0)});
  const ForwardStep fwd(p, ForwardScheme::WeakTaylor2);
  const double x = 0.7, dt = 0.1, w = 0.2;
  const double expected = (1 - x) * dt + x * w + 0.5 * x * (w * w - dt) + 0.5 * (-x + (1 - x)) * dt * w +
                          0.5 * ((1 - x) * -1.0) * dt * dt;
  CHECK(psi(fwd, 0.0, vec1(x), dt, vec1(w))(0) == doctest::Approx(expected).epsilon(1e-15));
  const double d = x + x * w + 0.5 * dt * (-x + (1 - x));
  CHECK(malliavin_integral(fwd, 0.0, vec1(x), dt, vec1(w))(0, 0) == doctest::Approx(d * dt).epsilon(1e-15));
}

TEST_CASE("increments at zero noise are order dt") {
  const auto p = sde_1d({[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                         [](double x) { return -std::sin(x); }, [](double x) { return 1 + 0.5 * x * x; },
                         [](double x) { return x; }, constant_fn(1.0)});
  for (auto v : {ForwardScheme::Euler, ForwardScheme::Milstein, ForwardScheme::WeakTaylor2}) {
    const ForwardStep fwd(p, v);
    for_all(20, 42, [&](Rng& rng, int) {
      const double x = rng.uniform(-2, 2);
      double prev_ratio = 0.0;
      for (double dt : {1e-2, 1e-4, 1e-6}) {
        const double inc = psi(fwd, 0.0, vec1(x), dt, vec1(0.0))(0);
        const double ratio = inc / dt;
        CHECK(std::abs(ratio) < 10.0);
        if (dt < 1e-2) CHECK(ratio == doctest::Approx(prev_ratio).epsilon(1e-1).scale(1.0));
        prev_ratio = ratio;
      }
      CHECK(psi(fwd, 0.0, vec1(x), 0.0, vec1(0.0))(0) == 0.0);
    });
  }
}

TEST_CASE("malliavin integrals") {
  SUBCASE("euler with unit noise") {
    const auto p = constant_sde(1, 0.0, 1.0);
    const ForwardStep fwd(p, ForwardScheme::Euler);
    CHECK(malliavin_integral(fwd, 0.0, vec1(0.0), 0.25, vec1(0.7))(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("milstein with proportional noise") {
    const auto p = proportional_noise(0.0);
    const ForwardStep fwd(p, ForwardScheme::Milstein);
    CHECK(malliavin_integral(fwd, 0.0, vec1(2.0), 0.25, vec1(0.1))(0, 0) == doctest::Approx(0.55).epsilon(1e-15));
  }
  SUBCASE("constant diffusion, any variant") {
    for (auto v : {ForwardScheme::Euler, ForwardScheme::Milstein, ForwardScheme::WeakTaylor2}) {
      const auto p = constant_sde(2, 0.0, 0.4);
      const ForwardStep fwd(p, v);
      const Mat m = malliavin_integral(fwd, 0.0, vec2(1, 2), 0.2, vec2(0.3, -0.1));
      CHECK((m - 0.4 * 0.2 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-16);
    }
  }
  SUBCASE("euler is sigma dt bit for bit") {
    const auto p = sde_1d({constant_fn(0.3), constant_fn(0.0), constant_fn(0.0), [](double x) { return 1 + x * x; },
                           [](double x) { return 2 * x; }, constant_fn(2.0)});
    const ForwardStep fwd(p, ForwardScheme::Euler);
    for_all(50, 43, [&](Rng& rng, int) {
      const double x = rng.uniform(-3, 3), dt = rng.uniform(0, 1);
      CHECK(malliavin_integral(fwd, 0.0, vec1(x), dt, vec1(rng.uniform(-1, 1)))(0, 0) == (1 + x * x) * dt);
    });
  }
}

TEST_CASE("A matrix") {
  SUBCASE("constant coefficients") {
    const auto p = constant_sde(2, 1.0, 0.3);
    CHECK(amatrix(p, 0.0, vec2(1, 1), 0.1, vec2(0.2, 0.3)) == Mat::Identity(2, 2));
  }
  SUBCASE("mean reverting drift") {
    const auto p = sde_1d({[](double x) { return -x; }, constant_fn(-1.0), constant_fn(0.0), constant_fn(1.0),
                           constant_fn(0.0), constant_fn(0.0)});
    CHECK(amatrix(p, 0.0, vec1(0.4), 0.25, vec1(0.3))(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("proportional noise") {
    auto p = proportional_noise(0.5);
    p.constant_drift = true;
    CHECK(amatrix(p, 0.0, vec1(3.0), 0.25, vec1(0.2))(0, 0) == doctest::Approx(1.2).epsilon(1e-15));
  }
}

TEST_CASE("identity map moments under euler") {
  const auto p = sde_1d({[](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
                         [](double x) { return -std::cos(x); }, [](double x) { return 1 + 0.1 * x; }, constant_fn(0.1),
                         constant_fn(0.0)});
  const ForwardStep fwd(p, ForwardScheme::Euler);
  for_all(20, 44, [&](Rng& rng, int) {
    const double x = rng.uniform(-1, 1), dt = rng.uniform(0.01, 0.3);
    const auto e = cond_expect([](const Vec& y) { return Eigen::VectorXd::Constant(1, y(0)); }, vec1(x), 0.0, dt, fwd,
                               gh_rule(3));
    CHECK(e(0) == doctest::Approx(x + std::cos(x) * dt).epsilon(1e-14));
  });
}

TEST_CASE("missing derivatives are reported") {
  auto code = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidConfig;
  };
  auto p = proportional_noise(0.0);
  p.diffusion_dx = nullptr;
  CHECK(code([&] { ForwardStep(p, ForwardScheme::Milstein); }) == ErrorCode::MissingDerivative);
  CHECK(code([&] { (void)amatrix(p, 0.0, vec1(1.0), 0.1, vec1(0.1)); }) == ErrorCode::MissingDerivative);
  CHECK_NOTHROW(ForwardStep(p, ForwardScheme::Euler));

  auto q = proportional_noise(0.0);
  q.diffusion_dxx = nullptr;
  CHECK(code([&] { ForwardStep(q, ForwardScheme::WeakTaylor2); }) == ErrorCode::MissingDerivative);
  CHECK_NOTHROW(ForwardStep(q, ForwardScheme::Milstein));

  // two dimensions with state-dependent noise: only euler
  auto r = constant_sde(2, 0.0, 1.0);
  r.constant_diffusion = false;
  CHECK(code([&] { ForwardStep(r, ForwardScheme::Milstein); }) == ErrorCode::MissingDerivative);
  auto s = constant_sde(2, 0.0, 1.0);
  s.constant_drift = false;
  CHECK(code([&] { ForwardStep(s, ForwardScheme::WeakTaylor2); }) == ErrorCode::MissingDerivative);
  CHECK_NOTHROW(ForwardStep(s, ForwardScheme::Milstein));
}
