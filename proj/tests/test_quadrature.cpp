#include <cmath>
#include <numbers>
#include <vector>

#include "cellload/quadrature.hpp"
#include "doctest.h"

using namespace cellload;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("integrate_finite reproduces elementary integrals") {
    CHECK(integrate_finite([](double) { return 1.0; }, 0.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-14));
    auto rayleigh = integrate_finite([](double x) { return x * std::exp(-0.5 * x * x); }, 0.0, 10.0);
    CHECK(rayleigh.value == doctest::Approx(1.0).epsilon(1e-12));
    const double R = 2.0;
    auto chi = integrate_finite([R](double x) { return 2.0 * x / (R * R); }, 0.0, R);
    CHECK(chi.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(chi.evaluations >= 21);
}

TEST_CASE("integrate_semi_infinite handles exponential and power tails") {
    CHECK(integrate_semi_infinite([](double x) { return std::exp(-x); }, 0.0).value ==
          doctest::Approx(1.0).epsilon(1e-10));
    // alpha = 4, t = 1: \int_1^inf du / (1 + u^2) = pi/4 by the arctan antiderivative.
    auto r = integrate_semi_infinite([](double u) { return 1.0 / (1.0 + u * u); }, 1.0);
    CHECK(r.value == doctest::Approx(kPi / 4.0).epsilon(1e-10));
}

TEST_CASE("error estimates bound the true error on a closed-form suite") {
    struct Case {
        Integrand f;
        double a, b;
        bool semi;
        double exact;
    };
    const std::vector<Case> cases = {
        {[](double x) { return x * x; }, 0, 1, false, 1.0 / 3.0},
        {[](double x) { return std::pow(x, 7); }, -1, 2, false, (256.0 - 1.0) / 8.0},
        {[](double x) { return 3 * x * x - 2 * x + 5; }, -2, 3, false, 35.0 - 5.0 + 25.0},
        {[](double x) { return std::sin(x); }, 0, kPi, false, 2.0},
        {[](double x) { return std::cos(x); }, 0, kPi / 2, false, 1.0},
        {[](double x) { return std::exp(x); }, 0, 1, false, std::exp(1.0) - 1.0},
        {[](double x) { return std::exp(-x * x); }, -6, 6, false, std::sqrt(kPi) * std::erf(6.0)},
        {[](double x) { return std::exp(-x * x / 2) / std::sqrt(2 * kPi); }, 0, 3, false, 0.5 * std::erf(3 / std::sqrt(2.0))},
        {[](double x) { return std::sqrt(x); }, 0, 1, false, 2.0 / 3.0},
        {[](double x) { return 1.0 / std::sqrt(x); }, 0, 1, false, 2.0},
        {[](double x) { return std::log(x); }, 0, 1, false, -1.0},
        {[](double x) { return 1.0 / (1.0 + x * x); }, -1, 1, false, kPi / 2},
        {[](double x) { return std::abs(x - 0.3); }, 0, 1, false, 0.5 * (0.09 + 0.49)},
        {[](double x) { return std::exp(-50 * (x - 0.5) * (x - 0.5)); }, 0, 1, false, std::sqrt(kPi / 50) * std::erf(0.5 * std::sqrt(50.0))},
        {[](double x) { return std::exp(-x); }, 0, 0, true, 1.0},
        {[](double x) { return std::exp(-x * x); }, 0, 0, true, std::sqrt(kPi) / 2},
        {[](double x) { return 1.0 / (x * x); }, 1, 0, true, 1.0},
        {[](double x) { return std::pow(x, -1.5); }, 1, 0, true, 2.0},
        {[](double x) { return x * std::exp(-x); }, 0, 0, true, 1.0},
        {[](double x) { return 1.0 / (1.0 + x * x); }, 0, 0, true, kPi / 2},
    };
    REQUIRE(cases.size() == 20);
    for (const auto& c : cases) {
        auto r = c.semi ? integrate_semi_infinite(c.f, c.a) : integrate_finite(c.f, c.a, c.b);
        const double actual = std::abs(r.value - c.exact);
        CHECK(actual <= r.error_estimate + 1e-13);
        CHECK(actual <= std::max(1e-10, 1e-8 * std::abs(c.exact)) * 10);
    }
}

TEST_CASE("integration is linear within tolerance") {
    auto f = [](double x) { return std::exp(-x) * std::cos(3 * x); };
    auto g = [](double x) { return x / (1 + x * x * x); };
    auto combo = [&](double x) { return 2.5 * f(x) - 0.75 * g(x); };
    const double lhs = integrate_semi_infinite(combo, 0.0).value;
    const double rhs = 2.5 * integrate_semi_infinite(f, 0.0).value - 0.75 * integrate_semi_infinite(g, 0.0).value;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));
}

TEST_CASE("non-convergence raises with the best estimate attached") {
    QuadSpec tight{1e-14, 1e-300, 3};
    try {
        integrate_finite([](double x) { return std::sin(200 * x); }, 0.0, 10.0, tight);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(std::isfinite(e.best_estimate()));
        CHECK(e.error_estimate() > 0.0);
    }
}

TEST_CASE("QuadSpec rejects non-positive tolerances") {
    CHECK_THROWS_AS(integrate_finite([](double) { return 1.0; }, 0, 1, QuadSpec{0.0, 1e-10, 10}), ValidationError);
    CHECK_THROWS_AS(integrate_finite([](double) { return 1.0; }, 0, 1, QuadSpec{1e-8, -1.0, 10}), ValidationError);
    CHECK_THROWS_AS(integrate_finite([](double) { return 1.0; }, 0, 1, QuadSpec{1e-8, 1e-10, 0}), ValidationError);
}

TEST_CASE("integrate_nested handles constant and dependent bounds") {
    const std::vector<AxisLimits> unit = {[](std::span<const double>) { return std::pair{0.0, 1.0}; },
                                          [](std::span<const double>) { return std::pair{0.0, 1.0}; }};
    auto one = integrate_nested([](std::span<const double>) { return 1.0; }, unit);
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));

    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<AxisLimits> polar = {[](std::span<const double>) { return std::pair{0.0, 2 * kPi}; },
                                           [inf](std::span<const double>) { return std::pair{0.0, inf}; }};
    auto disc = integrate_nested([](std::span<const double> v) { return v[1] * std::exp(-0.5 * v[1] * v[1]); }, polar);
    CHECK(disc.value == doctest::Approx(2 * kPi).epsilon(1e-9));

    // Triangle {0 <= y <= x <= 1}: \int\int x y = 1/8; a third axis z in [0, x+y].
    const std::vector<AxisLimits> tri = {[](std::span<const double>) { return std::pair{0.0, 1.0}; },
                                         [](std::span<const double> o) { return std::pair{0.0, o[0]}; },
                                         [](std::span<const double> o) { return std::pair{0.0, o[0] + o[1]}; }};
    auto vol = integrate_nested([](std::span<const double>) { return 1.0; }, tri);
    // \int_0^1 \int_0^x (x + y) dy dx = \int_0^1 1.5 x^2 dx = 0.5
    CHECK(vol.value == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(vol.value - 0.5) <= vol.error_estimate + 1e-15);
}

TEST_CASE("complex batches integrate component-wise") {
    auto f = [](double x) {
        ComplexBatch b(2);
        b.v[0] = {std::cos(x), std::sin(x)};
        b.v[1] = {x, -2 * x};
        return b;
    };
    auto r = integrate_adaptive<ComplexBatch>(f, 0.0, kPi, QuadSpec{});
    CHECK(r.value.v[0].real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(r.value.v[0].real()) < 1e-10);
    CHECK(r.value.v[0].imag() == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.value.v[1].real() == doctest::Approx(kPi * kPi / 2).epsilon(1e-12));
    CHECK(r.value.v[1].imag() == doctest::Approx(-kPi * kPi).epsilon(1e-12));
}
