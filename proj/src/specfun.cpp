#include "cellload/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cellload/errors.hpp"
#include "cellload/quadrature.hpp"

namespace cellload {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNakagamiShape = 3.5;

void require_non_negative(double x, const char* what) {
    if (!std::isfinite(x) || x < 0.0) throw DomainError(std::string(what) + ": argument must be finite and >= 0");
}

// Series sum_k (x/2)^{2k} / (k!)^2, all terms positive.
double i0_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

// e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8x)^k), truncated at the
// smallest term.
double i0_scaled_asymptotic(double x) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double f = (2.0 * k - 1.0) * (2.0 * k - 1.0) / (k * 8.0 * x);
        if (f >= 1.0) break;
        term *= f;
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum / std::sqrt(2.0 * kPi * x);
}

// x - sin x without cancellation for small x.
double x_minus_sin(double x) {
    if (std::abs(x) > 0.1) return x - std::sin(x);
    const double x2 = x * x;
    return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))));
}

}  // namespace

void DiscPair::validate() const {
    require_non_negative(r1, "DiscPair.r1");
    require_non_negative(r2, "DiscPair.r2");
    require_non_negative(d, "DiscPair.d");
}

double bessel_i0_scaled(double x) {
    if (!std::isfinite(x)) throw DomainError("bessel_i0_scaled: non-finite argument");
    x = std::abs(x);
    if (x <= 30.0) return std::exp(-x) * i0_series(x);
    return i0_scaled_asymptotic(x);
}

double marcum_q1(double a, double b) {
    require_non_negative(a, "marcum_q1(a)");
    require_non_negative(b, "marcum_q1(b)");
    if (b == 0.0) return 1.0;
    if (a == 0.0) return std::exp(-0.5 * b * b);

    // y e^{-(y^2+a^2)/2} I0(a y) rewritten with the scaled Bessel factor.
    auto density = [a](double y) { return y * std::exp(-0.5 * (y - a) * (y - a)) * bessel_i0_scaled(a * y); };
    const QuadSpec spec{1e-12, 1e-15, 2000};
    double q;
    if (b < a) {
        // Integrate the shorter side below the peak and take the complement.
        q = 1.0 - integrate_adaptive<double>(density, 0.0, b, spec).value;
    } else {
        // Integrand ~ exp(-(y-a)^2/2) beyond the peak; 14 units past b is below 1e-40.
        q = integrate_adaptive<double>(density, b, b + 14.0, spec).value;
    }
    return std::clamp(q, 0.0, 1.0);
}

double lens_area(const DiscPair& p) {
    p.validate();
    const double r1 = p.r1, r2 = p.r2, d = p.d;
    const double rmin = std::min(r1, r2);
    if (d >= r1 + r2) return 0.0;
    if (d <= std::abs(r1 - r2)) return kPi * rmin * rmin;
    // Sum of two circular segments. Half-angles from atan2 with t = 2 d h
    // (h the half chord); every factor of t^2 is a difference of exact inputs,
    // so the lens stays accurate near tangency.
    const double t2 = (r1 + r2 - d) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    const double t = std::sqrt(std::max(0.0, t2));
    const double half1 = std::atan2(t, d * d + r1 * r1 - r2 * r2);
    const double half2 = std::atan2(t, d * d + r2 * r2 - r1 * r1);
    const double area = 0.5 * (r1 * r1 * x_minus_sin(2.0 * half1) + r2 * r2 * x_minus_sin(2.0 * half2));
    return std::clamp(area, 0.0, kPi * rmin * rmin);
}

double union_area(const DiscPair& p) {
    return kPi * (p.r1 * p.r1 + p.r2 * p.r2) - lens_area(p);
}

double cell_radius_pdf(double r) {
    require_non_negative(r, "cell_radius_pdf");
    static const double norm = 2.0 * std::pow(kNakagamiShape, kNakagamiShape) / std::tgamma(kNakagamiShape);
    const double r2 = r * r;
    return norm * r2 * r2 * r2 * std::exp(-kNakagamiShape * r2);
}

double cell_radius_ccdf(double r) {
    require_non_negative(r, "cell_radius_ccdf");
    // P(R > r) = Gamma(3.5, 3.5 r^2) / Gamma(3.5) using
    // Gamma(1/2, x) = sqrt(pi) erfc(sqrt x) and Gamma(a+1, x) = a Gamma(a, x) + x^a e^{-x}.
    const double x = kNakagamiShape * r * r;
    double upper = std::sqrt(kPi) * std::erfc(std::sqrt(x));
    double a = 0.5;
    for (int i = 0; i < 3; ++i) {
        upper = a * upper + std::pow(x, a) * std::exp(-x);
        a += 1.0;
    }
    return std::clamp(upper / std::tgamma(kNakagamiShape), 0.0, 1.0);
}

double cell_radius_quantile_upper(double tail) {
    if (!(tail > 0.0 && tail < 1.0)) throw DomainError("cell_radius_quantile_upper: tail must be in (0,1)");
    double lo = 0.0, hi = 1.0;
    while (cell_radius_ccdf(hi) > tail) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cell_radius_ccdf(mid) > tail ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace cellload
