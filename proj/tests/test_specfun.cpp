#include <cmath>
#include <numbers>
#include <random>

#include "cellload/errors.hpp"
#include "cellload/quadrature.hpp"
#include "cellload/specfun.hpp"
#include "doctest.h"

using namespace cellload;

namespace {

constexpr double kPi = std::numbers::pi;

// Power series in long double; 400 terms covers x <= 100.
long double i0_series_oracle(long double x) {
    long double term = 1.0L, sum = 1.0L;
    for (int k = 1; k < 400; ++k) {
        term *= (x * x / 4.0L) / (static_cast<long double>(k) * k);
        sum += term;
    }
    return sum;
}

// Q1(a,b) = exp(-(a^2+b^2)/2) sum_{k>=0} (a/b)^k I_k(ab) for a < b, and the
// complementary form 1 - exp(...) sum_{k>=1} (b/a)^k I_k(ab) for a >= b.
double marcum_series_oracle(double a, double b) {
    const double pre = std::exp(-0.5 * (a * a + b * b));
    double sum = 0.0;
    if (a < b) {
        for (int k = 0; k < 200; ++k) sum += std::pow(a / b, k) * std::cyl_bessel_i(static_cast<double>(k), a * b);
        return pre * sum;
    }
    for (int k = 1; k < 200; ++k) sum += std::pow(b / a, k) * std::cyl_bessel_i(static_cast<double>(k), a * b);
    return 1.0 - pre * sum;
}

}  // namespace

TEST_CASE("bessel_i0_scaled matches the power-series oracle") {
    CHECK(bessel_i0_scaled(0.0) == 1.0);
    for (double x : {1e-3, 0.5, 1.0, 2.5, 7.0, 15.0, 29.9, 30.1, 45.0, 80.0}) {
        const long double oracle = std::exp(-static_cast<long double>(x)) * i0_series_oracle(x);
        CHECK(std::abs(bessel_i0_scaled(x) - oracle) / oracle < 1e-12);
    }
    CHECK(bessel_i0_scaled(1.0) == doctest::Approx(std::exp(-1.0) * 1.2660658777520082).epsilon(1e-14));
}

TEST_CASE("bessel_i0_scaled large-argument behaviour") {
    const double v700 = bessel_i0_scaled(700.0);
    CHECK(std::isfinite(v700));
    CHECK(v700 == doctest::Approx(1.0 / std::sqrt(2 * kPi * 700.0)).epsilon(2e-4));
    // libstdc++ I0 is finite up to ~709.
    CHECK(v700 == doctest::Approx(std::exp(-700.0) * std::cyl_bessel_i(0.0, 700.0)).epsilon(1e-12));
    for (double x = 1.0; x <= 1e6; x *= 3.7) {
        const double v = bessel_i0_scaled(x);
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(bessel_i0_scaled(std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(bessel_i0_scaled(std::nan("")), DomainError);
}

TEST_CASE("marcum_q1 limits and oracle values") {
    for (double b : {0.1, 1.0, 2.5, 6.0}) CHECK(marcum_q1(0.0, b) == doctest::Approx(std::exp(-b * b / 2)).epsilon(1e-14));
    for (double a : {0.0, 0.3, 2.0, 40.0}) CHECK(marcum_q1(a, 0.0) == 1.0);
    const double q11 = marcum_q1(1.0, 1.0);
    CHECK(q11 > 0.0);
    CHECK(q11 < 1.0);
    CHECK(q11 == doctest::Approx(marcum_series_oracle(1.0, 1.0)).epsilon(1e-10));
    for (double a : {0.2, 1.0, 3.0, 8.0})
        for (double b : {0.1, 0.9, 2.0, 4.0, 9.0})
            CHECK(std::abs(marcum_q1(a, b) - marcum_series_oracle(a, b)) < 1e-10);
    CHECK_THROWS_AS(marcum_q1(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(marcum_q1(1.0, -1.0), DomainError);
}

TEST_CASE("marcum_q1 is a CCDF in b and non-decreasing in a") {
    for (double a : {0.0, 0.5, 2.0, 10.0, 50.0}) {
        double prev = 1.0;
        for (double b = 0.0; b <= a + 12.0; b += 0.25) {
            const double q = marcum_q1(a, b);
            CHECK(q >= 0.0);
            CHECK(q <= 1.0);
            CHECK(q <= prev + 1e-12);
            prev = q;
        }
        CHECK(marcum_q1(a, a + 40.0) < 1e-12);
    }
    for (double b : {0.5, 2.0, 6.0}) {
        double prev = 0.0;
        for (double a = 0.0; a <= 10.0; a += 0.5) {
            const double q = marcum_q1(a, b);
            CHECK(q >= prev - 1e-12);
            prev = q;
        }
    }
}

TEST_CASE("lens_area closed cases and Monte Carlo oracle") {
    CHECK(lens_area({1, 1, 0}) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(lens_area({1, 1, 2}) == 0.0);
    CHECK(lens_area({1, 3, 1.5}) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(lens_area({0, 3, 1.5}) == 0.0);

    // Hit-or-miss oracle for (1, 1, 1): 1e7 uniform samples in [-1, 2] x [-1, 1].
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> ux(-1.0, 2.0), uy(-1.0, 1.0);
    const int n = 10'000'000;
    long hits = 0;
    for (int i = 0; i < n; ++i) {
        const double x = ux(rng), y = uy(rng);
        if (x * x + y * y <= 1.0 && (x - 1) * (x - 1) + y * y <= 1.0) ++hits;
    }
    const double box = 6.0;
    const double p = static_cast<double>(hits) / n;
    const double est = box * p;
    const double se = box * std::sqrt(p * (1 - p) / n);
    const double exact = lens_area({1, 1, 1});
    CHECK(exact == doctest::Approx(1.2284).epsilon(1e-4));
    CHECK(std::abs(est - exact) < 3 * se);
    CHECK(union_area({1, 1, 1}) == doctest::Approx(2 * kPi - exact).epsilon(1e-15));
}

TEST_CASE("union_area bounds and disjoint discs") {
    CHECK(union_area({1, 1, 0}) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(union_area({1, 2, 5}) == doctest::Approx(5 * kPi).epsilon(1e-15));
}

TEST_CASE("lens/union identity and bounds on random disc pairs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 2000; ++i) {
        DiscPair p{u(rng), u(rng), 2 * u(rng)};
        const double ai = lens_area(p), au = union_area(p);
        CHECK(std::abs(ai + au - kPi * (p.r1 * p.r1 + p.r2 * p.r2)) < 1e-12);
        CHECK(ai >= 0.0);
        CHECK(ai <= kPi * std::min(p.r1, p.r2) * std::min(p.r1, p.r2) + 1e-12);
        CHECK(au >= kPi * std::max(p.r1, p.r2) * std::max(p.r1, p.r2) - 1e-12);
    }
}

TEST_CASE("lens_area is continuous at internal and external tangency") {
    for (auto [r1, r2] : {std::pair{1.0, 1.0}, std::pair{0.4, 1.3}, std::pair{2.0, 0.7}}) {
        const double inner = std::abs(r1 - r2), outer = r1 + r2;
        for (double eps : {1e-12, 1e-14}) {
            CHECK(std::abs(lens_area({r1, r2, inner + eps}) - lens_area({r1, r2, inner})) < 1e-9);
            CHECK(std::abs(lens_area({r1, r2, outer - eps}) - lens_area({r1, r2, outer})) < 1e-9);
        }
    }
    CHECK_THROWS_AS(lens_area({-1, 1, 1}), DomainError);
}

TEST_CASE("cell_radius_pdf is a normalised Nakagami(3.5, 1) density") {
    auto total = integrate_semi_infinite([](double r) { return cell_radius_pdf(r); }, 0.0);
    CHECK(std::abs(total.value - 1.0) < 1e-9);
    // E[pi lambda_b R_c^2] = E[r^2] = Omega = 1.
    auto second = integrate_semi_infinite([](double r) { return r * r * cell_radius_pdf(r); }, 0.0);
    CHECK(std::abs(second.value - 1.0) < 1e-9);
    // Mode at sqrt(6/7): central difference of the density vanishes there.
    const double mode = std::sqrt(6.0 / 7.0), h = 1e-5;
    CHECK(std::abs(cell_radius_pdf(mode + h) - cell_radius_pdf(mode - h)) / (2 * h) < 1e-8);
    CHECK(cell_radius_pdf(mode) > cell_radius_pdf(mode * 0.99));
    CHECK(cell_radius_pdf(mode) > cell_radius_pdf(mode * 1.01));
    CHECK_THROWS_AS(cell_radius_pdf(-0.1), DomainError);
}

TEST_CASE("cell_radius_ccdf agrees with quadrature of the density") {
    for (double r : {0.0, 0.3, 0.9, 1.5, 2.4}) {
        auto tail = integrate_semi_infinite([](double x) { return cell_radius_pdf(x); }, r);
        CHECK(cell_radius_ccdf(r) == doctest::Approx(tail.value).epsilon(1e-9));
    }
    const double q = cell_radius_quantile_upper(1e-10);
    CHECK(cell_radius_ccdf(q) <= 1e-10);
    CHECK(cell_radius_ccdf(q * 0.999) > 1e-10);
}
