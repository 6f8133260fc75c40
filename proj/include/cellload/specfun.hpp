#pragma once

// Scalar special functions and two-disc geometry used by the load formulas.
// Everything here is unit-agnostic and pure.

namespace cellload {

/// Two discs of radii r1, r2 whose centres are d apart.
struct DiscPair {
    double r1;
    double r2;
    double d;

    /// Throws DomainError unless all fields are finite and non-negative.
    void validate() const;
};

/// e^{-x} I0(x), finite for every x >= 0.
double bessel_i0_scaled(double x);

/// First-order Marcum Q-function Q1(a, b) = \int_b^\infty y e^{-(y^2+a^2)/2} I0(a y) dy.
double marcum_q1(double a, double b);

/// Area of the intersection of the two discs.
double lens_area(const DiscPair& p);

/// Area of the union of the two discs.
double union_area(const DiscPair& p);

/// Density of the normalised equal-area radius of the typical cell,
/// Nakagami(m = 3.5, Omega = 1):  2 * 3.5^3.5 / Gamma(3.5) * r^6 * exp(-3.5 r^2).
double cell_radius_pdf(double r);

/// Upper tail P(R > r) of the same distribution, via the closed-form
/// incomplete gamma for half-integer shape.
double cell_radius_ccdf(double r);

/// Smallest r with cell_radius_ccdf(r) <= tail.
double cell_radius_quantile_upper(double tail);

}  // namespace cellload
