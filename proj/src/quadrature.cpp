#include "cellload/quadrature.hpp"

#include <vector>

namespace cellload {

void QuadSpec::validate() const {
    if (!(rel_tol > 0.0)) throw ValidationError("quad.rel_tol", "must be > 0");
    if (!(abs_tol > 0.0)) throw ValidationError("quad.abs_tol", "must be > 0");
    if (max_subdivisions < 1) throw ValidationError("quad.max_subdivisions", "must be >= 1");
}

IntegrationResult integrate_finite(const Integrand& f, double a, double b, const QuadSpec& spec) {
    return integrate_adaptive<double>(f, a, b, spec);
}

IntegrationResult integrate_semi_infinite(const Integrand& f, double a, const QuadSpec& spec) {
    return integrate_adaptive_semi_infinite<double>(f, a, spec);
}

namespace {

// Value plus the accumulated error of the inner levels that produced it.
struct Estimate {
    double value = 0.0;
    double inner_error = 0.0;

    friend Estimate operator+(Estimate l, const Estimate& r) {
        return {l.value + r.value, l.inner_error + r.inner_error};
    }
    friend Estimate operator-(Estimate l, const Estimate& r) {
        return {l.value - r.value, l.inner_error - r.inner_error};
    }
    friend Estimate operator*(double s, Estimate r) { return {s * r.value, s * r.inner_error}; }
};

double quad_norm(const Estimate& e) { return std::abs(e.value); }

class NestedRule {
  public:
    NestedRule(const std::function<double(std::span<const double>)>& f, std::span<const AxisLimits> axes,
               const QuadSpec& spec)
        : f_(f), axes_(axes), spec_(spec), vars_(axes.size(), 0.0) {}

    BasicIntegrationResult<Estimate> level(std::size_t k) {
        const auto [lo, hi] = axes_[k](std::span<const double>(vars_.data(), k));
        const QuadSpec spec = k == 0 ? spec_ : spec_.tightened(0.1);
        auto integrand = [this, k](double x) -> Estimate {
            vars_[k] = x;
            if (k + 1 == axes_.size()) return {f_(vars_), 0.0};
            auto inner = level(k + 1);
            vars_[k] = x;
            evaluations_ += inner.evaluations;
            return {inner.value.value, inner.error_estimate};
        };
        if (std::isinf(hi) && hi > 0) return integrate_adaptive_semi_infinite<Estimate>(integrand, lo, spec);
        if (!(hi >= lo)) return {};
        return integrate_adaptive<Estimate>(integrand, lo, hi, spec);
    }

    std::size_t inner_evaluations() const { return evaluations_; }

  private:
    const std::function<double(std::span<const double>)>& f_;
    std::span<const AxisLimits> axes_;
    QuadSpec spec_;
    std::vector<double> vars_;
    std::size_t evaluations_ = 0;
};

}  // namespace

IntegrationResult integrate_nested(const std::function<double(std::span<const double>)>& f,
                                   std::span<const AxisLimits> axes, const QuadSpec& spec) {
    spec.validate();
    if (axes.empty() || axes.size() > 3) throw DomainError("integrate_nested: supports 1 to 3 axes");
    NestedRule rule(f, axes, spec);
    auto r = rule.level(0);
    return IntegrationResult{r.value.value, r.error_estimate + std::abs(r.value.inner_error),
                             r.evaluations + rule.inner_evaluations()};
}

}  // namespace cellload
