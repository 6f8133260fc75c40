#include "cellload/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cellload/errors.hpp"
#include "cellload/quadrature.hpp"
#include "cellload/specfun.hpp"

namespace cellload {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double v, const char* field) {
    if (!std::isfinite(v) || !(v > 0.0)) throw ValidationError(field, "must be finite and > 0");
}

void require_non_negative(double x, const char* what) {
    if (!std::isfinite(x) || x < 0.0) throw DomainError(std::string(what) + ": argument must be finite and >= 0");
}

double matern_chi2(double x, double z, double radius) {
    const double c = std::clamp((x * x + z * z - radius * radius) / (2.0 * x * z), -1.0, 1.0);
    return 2.0 * x / (kPi * radius * radius) * std::acos(c);
}

}  // namespace

void UserModel::validate() const {
    require_positive(lambda_p, "lambda_p");
    if (!std::isfinite(m_bar) || m_bar < 0.0) throw ValidationError("mbar", "must be finite and >= 0");
    std::visit(Overloaded{[](const Thomas& t) { require_positive(t.sigma, "sigma"); },
                          [](const Matern& m) { require_positive(m.radius, "cluster_radius"); }},
               kind);
}

double UserModel::cluster_scale() const {
    return std::visit(Overloaded{[](const Thomas& t) { return t.sigma; }, [](const Matern& m) { return m.radius; }},
                      kind);
}

void NetworkModel::validate() const {
    require_positive(lambda_b, "lambda_b");
    users.validate();
}

NetworkModel NetworkModel::normalized() const {
    const double scale = std::sqrt(lambda_b);
    NetworkModel out = *this;
    out.lambda_b = 1.0;
    out.users.lambda_p = users.lambda_p / lambda_b;
    out.users.kind = std::visit(Overloaded{[scale](const Thomas& t) -> ClusterKind { return Thomas{t.sigma * scale}; },
                                           [scale](const Matern& m) -> ClusterKind { return Matern{m.radius * scale}; }},
                                users.kind);
    return out;
}

double conditional_distance_pdf(const UserModel& model, double x, double z) {
    require_non_negative(x, "conditional_distance_pdf(x)");
    require_non_negative(z, "conditional_distance_pdf(z)");
    return std::visit(
        Overloaded{[x, z](const Thomas& t) {
                       const double s2 = t.sigma * t.sigma;
                       // x/s2 * exp(-(x^2+z^2)/2s2) I0(xz/s2) with the exponent folded into the scaled Bessel.
                       return x / s2 * std::exp(-0.5 * (x - z) * (x - z) / s2) * bessel_i0_scaled(x * z / s2);
                   },
                   [x, z](const Matern& m) {
                       const double radius = m.radius;
                       if (z <= radius && x <= radius - z) return 2.0 * x / (radius * radius);
                       if (x > std::abs(radius - z) && x <= radius + z) return matern_chi2(x, z, radius);
                       return 0.0;
                   }},
        model.kind);
}

double cluster_cdf(const UserModel& model, double r, double v) {
    require_non_negative(r, "cluster_cdf(r)");
    require_non_negative(v, "cluster_cdf(v)");
    if (r == 0.0) return 0.0;
    return std::visit(
        Overloaded{[r, v](const Thomas& t) { return 1.0 - marcum_q1(v / t.sigma, r / t.sigma); },
                   [r, v](const Matern& m) {
                       const double radius = m.radius;
                       const double inner = std::min(r, std::max(radius - v, 0.0));
                       double xi = inner * inner;
                       const double lo = std::min(r, std::abs(radius - v));
                       const double hi = std::min(r, radius + v);
                       if (hi > lo && v > 0.0) {
                           auto arc = [v, radius](double u) {
                               if (u <= 0.0) return 0.0;
                               const double c = std::clamp((u * u + v * v - radius * radius) / (2.0 * u * v), -1.0, 1.0);
                               return u * std::acos(c);
                           };
                           const QuadSpec spec{1e-11, 1e-14 * radius * radius, 2000};
                           xi += 2.0 / kPi * integrate_adaptive<double>(arc, lo, hi, spec).value;
                       }
                       return std::clamp(xi / (radius * radius), 0.0, 1.0);
                   }},
        model.kind);
}

double pair_correlation_excess(const UserModel& model, double r) {
    require_non_negative(r, "pair_correlation_density(r)");
    const double pair_mass = model.lambda_p * model.m_bar * model.m_bar;
    return std::visit(Overloaded{[r, pair_mass](const Thomas& t) {
                                     const double s2 = t.sigma * t.sigma;
                                     return pair_mass / (4.0 * kPi * s2) * std::exp(-r * r / (4.0 * s2));
                                 },
                                 [r, pair_mass](const Matern& m) {
                                     const double radius = m.radius;
                                     if (r > 2.0 * radius) return 0.0;
                                     const double r4 = radius * radius * radius * radius;
                                     return pair_mass * lens_area({radius, radius, r}) / (kPi * kPi * r4);
                                 }},
                      model.kind);
}

double pair_correlation_density(const UserModel& model, double r) {
    const double lu = model.lambda_u();
    return lu * lu + pair_correlation_excess(model, r);
}

double cluster_truncation_radius(const UserModel& model) {
    return std::visit(Overloaded{[](const Thomas& t) { return 6.0 * t.sigma; }, [](const Matern& m) { return m.radius; }},
                      model.kind);
}

}  // namespace cellload
