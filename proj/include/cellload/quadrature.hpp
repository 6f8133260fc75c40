#pragma once

// Adaptive Gauss-Kronrod (10/21) integration.
//
// The engine is generic over the integrand's value type so that the same
// subdivision logic serves scalar integrals, complex integrals and batches of
// complex integrals (the PGF on all DFT nodes at once). A value type V needs
// V + V, V - V, double * V and an overload of `quad_norm(const V&)`.
//
// Subdivision is global: the segment with the largest error estimate is split
// first. Segments are summed in position order at the end so the result is a
// deterministic function of (integrand, interval, spec).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "cellload/errors.hpp"

namespace cellload {

struct QuadSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    std::size_t max_subdivisions = 4000;

    /// Throws ValidationError on non-positive tolerances or a zero budget.
    void validate() const;

    /// Same spec with both tolerances scaled; used for inner levels of nested rules.
    QuadSpec tightened(double factor) const {
        return QuadSpec{rel_tol * factor, abs_tol * factor, max_subdivisions};
    }
};

template <class V>
struct BasicIntegrationResult {
    V value{};
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

using IntegrationResult = BasicIntegrationResult<double>;

inline double quad_norm(double v) { return std::abs(v); }
inline double quad_norm(const std::complex<double>& v) { return std::abs(v); }

/// Fixed-length batch of complex values integrated component-wise under a
/// single subdivision (norm = largest component modulus).
struct ComplexBatch {
    std::vector<std::complex<double>> v;

    ComplexBatch() = default;
    explicit ComplexBatch(std::size_t n) : v(n) {}

    friend ComplexBatch operator+(ComplexBatch l, const ComplexBatch& r) {
        for (std::size_t i = 0; i < l.v.size(); ++i) l.v[i] += r.v[i];
        return l;
    }
    friend ComplexBatch operator-(ComplexBatch l, const ComplexBatch& r) {
        for (std::size_t i = 0; i < l.v.size(); ++i) l.v[i] -= r.v[i];
        return l;
    }
    friend ComplexBatch operator*(double s, ComplexBatch r) {
        for (auto& z : r.v) z *= s;
        return r;
    }
};

inline double quad_norm(const ComplexBatch& b) {
    double m = 0.0;
    for (const auto& z : b.v) m = std::max(m, std::abs(z));
    return m;
}

namespace detail {

// QUADPACK qk21 abscissae (descending) and weights.
inline constexpr std::array<double, 11> kGk21Nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Weights of the embedded 10-point Gauss rule, on nodes 1, 3, 5, 7, 9.
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class V>
struct Segment {
    double a;
    double b;
    V value;
    double error;
};

template <class V, class F>
Segment<V> gk21(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    V fc = f(center);
    V kronrod = kKronrodWeights[10] * fc;
    V gauss = 0.0 * fc;
    for (std::size_t j = 0; j < 10; ++j) {
        const double dx = half * kGk21Nodes[j];
        V sum = f(center - dx) + f(center + dx);
        kronrod = kronrod + kKronrodWeights[j] * sum;
        if (j % 2 == 1) gauss = gauss + kGaussWeights[j / 2] * sum;
    }
    kronrod = half * kronrod;
    gauss = half * gauss;
    const double err = quad_norm(kronrod - gauss);
    return Segment<V>{a, b, std::move(kronrod), err};
}

struct ByError {
    template <class S>
    bool operator()(const S& l, const S& r) const {
        if (l.error != r.error) return l.error < r.error;
        return l.a > r.a;
    }
};

}  // namespace detail

/// Adaptive integration of a (possibly vector-valued) integrand over [a, b].
/// Throws ConvergenceError (with the scalar norm of the best estimate) when
/// the tolerance is not met within spec.max_subdivisions bisections.
template <class V, class F>
BasicIntegrationResult<V> integrate_adaptive(F&& f, double a, double b, const QuadSpec& spec) {
    spec.validate();
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
        throw DomainError("integrate_adaptive: need finite a <= b");

    using Seg = detail::Segment<V>;
    auto eval = [&f](double x) -> V { return f(x); };

    std::vector<Seg> heap;
    heap.push_back(detail::gk21<V>(eval, a, b));
    std::size_t evaluations = 21;
    V total = heap.front().value;
    double total_err = heap.front().error;

    std::size_t splits = 0;
    auto tolerance = [&spec](const V& v) { return std::max(spec.abs_tol, spec.rel_tol * quad_norm(v)); };
    const detail::ByError by_error;

    while (total_err > tolerance(total)) {
        if (splits >= spec.max_subdivisions) {
            throw ConvergenceError("adaptive quadrature did not converge within max_subdivisions",
                                   quad_norm(total), total_err);
        }
        std::pop_heap(heap.begin(), heap.end(), by_error);
        Seg worst = std::move(heap.back());
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw ConvergenceError("adaptive quadrature hit floating-point resolution",
                                   quad_norm(total), total_err);
        }
        Seg left = detail::gk21<V>(eval, worst.a, mid);
        Seg right = detail::gk21<V>(eval, mid, worst.b);
        evaluations += 42;
        total = total - worst.value + left.value + right.value;
        total_err = total_err - worst.error + left.error + right.error;
        heap.push_back(std::move(left));
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(std::move(right));
        std::push_heap(heap.begin(), heap.end(), by_error);
        ++splits;
        // Resum periodically; the running difference loses digits otherwise.
        if (splits % 32 == 0) {
            total = 0.0 * total;
            total_err = 0.0;
            for (const auto& seg : heap) {
                total = total + seg.value;
                total_err += seg.error;
            }
        }
    }

    std::sort(heap.begin(), heap.end(), [](const Seg& l, const Seg& r) { return l.a < r.a; });
    V value = 0.0 * heap.front().value;
    double err = 0.0;
    for (const auto& seg : heap) {
        value = value + seg.value;
        err += seg.error;
    }
    return BasicIntegrationResult<V>{std::move(value), err, evaluations};
}

/// Integral over [a, +inf) through the map x = a + s / (1 - s), s in [0, 1).
template <class V, class F>
BasicIntegrationResult<V> integrate_adaptive_semi_infinite(F&& f, double a, const QuadSpec& spec) {
    if (!std::isfinite(a)) throw DomainError("integrate_semi_infinite: lower limit must be finite");
    auto mapped = [&f, a](double s) -> V {
        const double one_minus = 1.0 - s;
        const double x = a + s / one_minus;
        const double jac = 1.0 / (one_minus * one_minus);
        if (!std::isfinite(x) || !std::isfinite(jac)) return 0.0 * f(a);
        return jac * f(x);
    };
    return integrate_adaptive<V>(mapped, 0.0, 1.0, spec);
}

using Integrand = std::function<double(double)>;

IntegrationResult integrate_finite(const Integrand& f, double a, double b, const QuadSpec& spec = {});

IntegrationResult integrate_semi_infinite(const Integrand& f, double a, const QuadSpec& spec = {});

/// Limits of one axis of a nested integral. `outer` holds the values of the
/// enclosing variables, outermost first. An upper limit of +inf selects the
/// semi-infinite rule for that axis.
using AxisLimits = std::function<std::pair<double, double>(std::span<const double> outer)>;

/// Iterated integral, outermost axis first. `f` receives all variables in the
/// same order. Inner errors are propagated by integrating the inner error
/// estimates alongside the values.
IntegrationResult integrate_nested(const std::function<double(std::span<const double>)>& f,
                                   std::span<const AxisLimits> axes, const QuadSpec& spec = {});

}  // namespace cellload
