#include <doctest.h>

#include <cmath>
#include <random>

#include "edgefl/error.hpp"
#include "edgefl/numerics.hpp"
#include "oracles.hpp"

using namespace edgefl;
using numerics::Branch;
using numerics::lambert_w;

TEST_CASE("lambert_w reference values") {
  CHECK(lambert_w(Branch::kPrincipal, 0.0) == 0.0);
  CHECK(lambert_w(Branch::kPrincipal, std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lambert_w(Branch::kPrincipal, -numerics::kInvE) == -1.0);
  CHECK(lambert_w(Branch::kSecondary, -numerics::kInvE) == -1.0);

  const double omega = oracle::bisect([](double w) { return w * std::exp(w) - 1.0; }, 0.0, 1.0);
  CHECK(std::abs(lambert_w(Branch::kPrincipal, 1.0) - omega) < 1e-12);
  CHECK(std::abs(omega - 0.567143290409783873) < 1e-12);

  const double w_m1 = oracle::bisect([](double w) { return w * std::exp(w) + 0.1; }, -10.0, -1.0);
  CHECK(std::abs(lambert_w(Branch::kSecondary, -0.1) - w_m1) < 1e-12);
  CHECK(std::abs(w_m1 - (-3.577152063957297)) < 1e-9);
}

TEST_CASE("lambert_w domain errors") {
  CHECK_THROWS_AS(lambert_w(Branch::kPrincipal, -0.5), Error);
  CHECK_THROWS_AS(lambert_w(Branch::kSecondary, 0.0), Error);
  CHECK_THROWS_AS(lambert_w(Branch::kSecondary, 0.5), Error);
  CHECK_THROWS_AS(lambert_w(Branch::kPrincipal, std::nan("")), Error);
}

TEST_CASE("lambert_w agrees with bisection across both branches") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double x0 = -numerics::kInvE + 1e-9 + u(rng) * 50.0;
    const double w0 = oracle::bisect([&](double w) { return w * std::exp(w) - x0; }, -1.0, 10.0);
    CHECK(std::abs(lambert_w(Branch::kPrincipal, x0) - w0) < 1e-10 * std::max(1.0, std::abs(w0)));

    const double x1 = -numerics::kInvE * (1e-9 + u(rng) * (1.0 - 2e-9));
    const double w1 = oracle::bisect([&](double w) { return w * std::exp(w) - x1; }, -60.0, -1.0);
    CHECK(std::abs(lambert_w(Branch::kSecondary, x1) - w1) < 1e-10 * std::max(1.0, std::abs(w1)));
  }
}

TEST_CASE("lambert_w near the branch point and in the tails") {
  for (double d : {1e-15, 1e-12, 1e-9, 1e-6, 1e-3}) {
    const double x = -numerics::kInvE + d;
    for (Branch b : {Branch::kPrincipal, Branch::kSecondary}) {
      const double w = lambert_w(b, x);
      CHECK(std::abs(w * std::exp(w) - x) < 1e-15);
      CHECK((b == Branch::kPrincipal ? w >= -1.0 : w <= -1.0));
    }
  }
  for (double x : {1e-300, 1e-20, 1e3, 1e100, 1e300}) {
    const double w = lambert_w(Branch::kPrincipal, x);
    CHECK(std::abs(w + std::log(w) - std::log(x)) < 1e-12 * std::max(1.0, std::log(x)));
  }
  const double w = lambert_w(Branch::kSecondary, -1e-300);
  CHECK(std::abs(w + std::log(-w) - std::log(1e-300)) < 1e-12 * 700);
}

TEST_CASE("bracketed_root") {
  CHECK(numerics::bracketed_root([](double x) { return x - 2.0; }, 0.0, 5.0, 1e-10) ==
        doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(numerics::bracketed_root([](double x) { return x * std::exp(x) - 1.0; }, 0.0, 1.0, 1e-12) -
                 0.567143290409783873) < 1e-12);
  try {
    numerics::bracketed_root([](double x) { return x * x; }, 1.0, 2.0, 1e-10);
    FAIL("expected no-bracket error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoBracket);
  }
  CHECK_THROWS_AS(numerics::bracketed_root([](double x) { return x; }, 1.0, -1.0, 1e-10), Error);
}
