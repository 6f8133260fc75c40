#include "cellload/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "cellload/errors.hpp"
#include "cellload/fft.hpp"
#include "cellload/specfun.hpp"

namespace cellload {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// e^z - 1 without cancellation for small |z|.
std::complex<double> expm1(std::complex<double> z) {
    const double x = z.real(), y = z.imag();
    const double s = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

// exp(-A_u(x, x2, r)) where x2 is the distance of the second user from the
// origin when it sits at separation r and angle phi from the first.
double void_kernel(double x, double r, double phi) {
    const double x2 = std::sqrt(std::max(0.0, x * x + r * r + 2.0 * x * r * std::cos(phi)));
    return std::exp(-union_area({x, x2, r}));
}

// 4 pi \int_0^inf x \int_0^rmax r w(r) \int_0^pi exp(-A_u) dphi dr dx
// in lambda_b = 1 units.
IntegrationResult separation_integral(const std::function<double(double)>& weight, double r_max, const QuadSpec& spec) {
    const std::vector<AxisLimits> axes = {
        [](std::span<const double>) { return std::pair{0.0, kInf}; },
        [r_max](std::span<const double> o) {
            // A_u >= pi max(x, x2)^2 with x2 >= r - x; beyond r = x + 7 the kernel is < e^{-150}.
            return std::pair{0.0, std::min(r_max, o[0] + 7.0)};
        },
        [](std::span<const double>) { return std::pair{0.0, kPi}; },
    };
    auto f = [&weight](std::span<const double> v) { return v[0] * v[1] * weight(v[1]) * void_kernel(v[0], v[1], v[2]); };
    auto res = integrate_nested(f, axes, spec);
    res.value *= 4.0 * kPi;
    res.error_estimate *= 4.0 * kPi;
    return res;
}

double thomas_or_matern_excess_range(const UserModel& users) {
    // Thomas excess ~ exp(-r^2 / 4 sigma^2): 14 sigma leaves e^{-49}.
    return users.is_thomas() ? 14.0 * users.cluster_scale() : 2.0 * users.cluster_scale();
}

struct AreaMoment {
    double value;
    double error;
};

const AreaMoment& cached_area_moment() {
    static const AreaMoment moment = [] {
        auto r = separation_integral([](double) { return 1.0; }, kInf, QuadSpec{1e-9, 1e-12, 4000});
        return AreaMoment{r.value, r.error_estimate};
    }();
    return moment;
}

// \int_L^inf du / (1 + u^p), p > 1, via 1/(1+u^p) = sum_k (-1)^k u^{-p(k+1)}
// beyond u = 4 and quadrature below.
double beta_tail(double lower, double exponent) {
    if (exponent <= 1.0) throw SirFormulaAlarm("beta(t): integral of 1/(1+u^p) diverges for p <= 1");
    constexpr double kSeriesStart = 4.0;
    const double from = std::max(lower, kSeriesStart);
    double sum = 0.0;
    for (int k = 0; k < 400; ++k) {
        const double e = exponent * (k + 1) - 1.0;
        const double term = std::exp(-e * std::log(from)) / e;
        sum += (k % 2 == 0 ? term : -term);
        if (term < 1e-17 * std::abs(sum)) break;
    }
    if (lower < kSeriesStart) {
        sum += integrate_finite([exponent](double u) { return 1.0 / (1.0 + std::pow(u, exponent)); }, lower,
                                kSeriesStart, QuadSpec{1e-13, 1e-16, 4000})
                   .value;
    }
    return sum;
}

void require_alpha(double alpha) {
    if (!std::isfinite(alpha) || !(alpha > 2.0)) throw ValidationError("alpha", "must be > 2");
}

}  // namespace

// -- records -----------------------------------------------------------------

void NegBinParams::validate() const {
    if (r < 1) throw ValidationError("nb.r", "must be >= 1");
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("nb.t", "must be in (0, 1]");
}

double LoadPmf::mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) m += static_cast<double>(n) * probs[n];
    return m;
}

double LoadPmf::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) v += (static_cast<double>(n) - m) * (static_cast<double>(n) - m) * probs[n];
    return v;
}

double total_variation(const LoadPmf& p, const LoadPmf& q) {
    const std::size_t n = std::max(p.probs.size(), q.probs.size());
    double tv = 0.0;
    for (std::size_t i = 0; i < n; ++i) tv += std::abs(p.at(i) - q.at(i));
    return 0.5 * tv;
}

void RateConfig::validate() const {
    require_alpha(alpha);
    if (!(bandwidth_w > 0.0) || !std::isfinite(bandwidth_w)) throw ValidationError("bandwidth", "must be finite and > 0");
    if (!(backhaul_rb >= 0.0)) throw ValidationError("backhaul", "must be >= 0 (inf for no cap)");
    for (double rho : thresholds)
        if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("thresholds", "rate thresholds must be finite and > 0");
}

const char* to_string(BetaReading r) {
    switch (r) {
        case BetaReading::PlainExponent: return "plain-exponent";
        case BetaReading::SwappedExponent: return "swapped-exponent";
        case BetaReading::DeltaOffset: return "delta-offset";
    }
    return "unknown";
}

// -- moments -----------------------------------------------------------------

double mean_load(const NetworkModel& net) {
    net.validate();
    return net.users.m_bar * net.users.lambda_p / net.lambda_b;
}

double cell_area_second_moment() { return cached_area_moment().value; }

double second_moment_integrand(const NetworkModel& normalized, double x1, double x2, double theta) {
    const double d = std::sqrt(std::max(0.0, x1 * x1 + x2 * x2 - 2.0 * x1 * x2 * std::cos(theta)));
    return std::exp(-union_area({x1, x2, d})) * pair_correlation_density(normalized.users, d) * x1 * x2;
}

double second_moment_load(const NetworkModel& net, PairRoute route, const QuadSpec& spec, double* error) {
    net.validate();
    const NetworkModel n = net.normalized();
    const double lu = n.users.lambda_u();

    double value = 0.0, err = 0.0;
    if (route == PairRoute::Separation) {
        const auto& area = cached_area_moment();
        auto excess = separation_integral([&n](double r) { return pair_correlation_excess(n.users, r); },
                                          thomas_or_matern_excess_range(n.users), spec);
        value = lu + lu * lu * area.value + excess.value;
        err = lu * lu * area.error + excess.error_estimate;
    } else {
        // 2 pi \int_0^{2pi} \int_0^inf \int_0^inf (...) dx1 dx2 dtheta; the angle of the
        // first user contributes the leading 2 pi.
        const std::vector<AxisLimits> axes = {
            [](std::span<const double>) { return std::pair{0.0, 2.0 * kPi}; },
            [](std::span<const double>) { return std::pair{0.0, kInf}; },
            [](std::span<const double>) { return std::pair{0.0, kInf}; },
        };
        auto f = [&n](std::span<const double> v) { return second_moment_integrand(n, v[2], v[1], v[0]); };
        auto pair = integrate_nested(f, axes, spec);
        value = lu + 2.0 * kPi * pair.value;
        err = 2.0 * kPi * pair.error_estimate;
    }
    if (error) *error = err;
    return value;
}

double variance_load(const NetworkModel& net, const QuadSpec& spec) {
    const double m = mean_load(net);
    return second_moment_load(net, PairRoute::Separation, spec) - m * m;
}

LoadMoments load_moments(const NetworkModel& net, const QuadSpec& spec) {
    LoadMoments out;
    out.mean = mean_load(net);
    out.second_moment = second_moment_load(net, PairRoute::Separation, spec, &out.second_moment_error);
    out.variance = out.second_moment - out.mean * out.mean;
    out.variance_error = out.second_moment_error;
    return out;
}

double ppp_normalized_variance(const NetworkModel& net) {
    return 1.0 / mean_load(net) + cell_area_second_moment() - 1.0;
}

// -- negative binomial -------------------------------------------------------

NegBinParams nb_fit(const LoadMoments& m) {
    if (!(m.mean > 0.0)) throw InfeasibleError("nb_fit: mean must be > 0");
    if (!(m.variance > m.mean))
        throw InfeasibleError("nb_fit: variance must exceed the mean (got mean " + std::to_string(m.mean) +
                              ", variance " + std::to_string(m.variance) + ")");
    const double t = 1.0 - m.mean / m.variance;
    const double r = std::floor((1.0 - t) * m.mean / t);
    return NegBinParams{std::max(1L, static_cast<long>(r)), t};
}

double nb_pmf(const NegBinParams& nb, long n) {
    nb.validate();
    if (n < 0) return 0.0;
    if (nb.t == 1.0) return 0.0;
    const double r = static_cast<double>(nb.r);
    const double dn = static_cast<double>(n);
    const double log_p = std::lgamma(r + dn) - std::lgamma(dn + 1.0) - std::lgamma(r) + r * std::log1p(-nb.t) +
                         (n == 0 ? 0.0 : dn * std::log(nb.t));
    return std::exp(log_p);
}

LoadPmf nb_load_pmf(const NegBinParams& nb, std::size_t size) {
    LoadPmf out;
    out.probs.resize(size);
    for (std::size_t n = 0; n < size; ++n) out.probs[n] = nb_pmf(nb, static_cast<long>(n));
    out.dft_size = 0;
    out.raw_sum = 0.0;
    for (double p : out.probs) out.raw_sum += p;
    return out;
}

// -- PGF ---------------------------------------------------------------------

std::vector<std::complex<double>> load_pgf_batch(const NetworkModel& net, std::span<const std::complex<double>> thetas,
                                                 const QuadSpec& spec) {
    net.validate();
    const NetworkModel n = net.normalized();
    const UserModel& users = n.users;
    const std::size_t k = thetas.size();
    if (k == 0) return {};
    if (users.m_bar == 0.0) return std::vector<std::complex<double>>(k, 1.0);

    std::vector<std::complex<double>> coeff(k);
    for (std::size_t i = 0; i < k; ++i) coeff[i] = -users.m_bar * (1.0 - thetas[i]);

    const double r_max = cell_radius_quantile_upper(1e-10);
    const double reach = users.is_thomas() ? 10.0 * users.cluster_scale() : users.cluster_scale();
    const double two_pi_lp = 2.0 * kPi * users.lambda_p;
    const QuadSpec inner_spec = spec.tightened(0.1);

    // \int_0^inf (1 - exp(-m (1 - theta) F(rho | v))) v dv for every theta at once.
    auto inner = [&](double rho) {
        auto integrand = [&](double v) {
            ComplexBatch b(k);
            const double cdf = cluster_cdf(users, rho, v);
            if (cdf == 0.0) return b;
            for (std::size_t i = 0; i < k; ++i) b.v[i] = -expm1(coeff[i] * cdf) * v;
            return b;
        };
        auto near = integrate_adaptive<ComplexBatch>(integrand, 0.0, rho, inner_spec);
        auto far = integrate_adaptive<ComplexBatch>(integrand, rho, rho + reach, inner_spec);
        return near.value + far.value;
    };

    auto outer = [&](double r) {
        ComplexBatch b(k);
        const double density = cell_radius_pdf(r);
        if (density == 0.0) return b;
        // r is the normalized radius sqrt(pi) R_c; the disc radius in lambda_b = 1 units is r / sqrt(pi).
        const ComplexBatch mass = inner(r / std::sqrt(kPi));
        for (std::size_t i = 0; i < k; ++i) b.v[i] = std::exp(-two_pi_lp * mass.v[i]) * density;
        return b;
    };

    auto res = integrate_adaptive<ComplexBatch>(outer, 0.0, r_max, spec);
    std::vector<std::complex<double>> out = std::move(res.value.v);
    for (std::size_t i = 0; i < k; ++i)
        if (thetas[i] == 1.0) out[i] = 1.0;  // exact: the integrand collapses to the density
    return out;
}

std::complex<double> load_pgf(const NetworkModel& net, std::complex<double> theta, const QuadSpec& spec) {
    if (theta == 1.0) {
        net.validate();
        return 1.0;
    }
    return load_pgf_batch(net, std::span<const std::complex<double>>(&theta, 1), spec).front();
}

std::size_t default_dft_size(const LoadMoments& m) {
    const double target = m.mean + 10.0 * std::sqrt(std::max(0.0, m.variance));
    std::size_t n = 128;
    while (static_cast<double>(n) < target) n <<= 1;
    return n;
}

double aliasing_bound(const LoadMoments& m, std::size_t dft_size) {
    const double gap = static_cast<double>(dft_size) - m.mean;
    if (gap <= 0.0) return 1.0;
    return m.variance / (m.variance + gap * gap);
}

LoadPmf invert_pgf(const PgfBatch& pgf, const InversionOptions& opts) {
    const std::size_t size = opts.dft_size;
    if (size < 2 || !is_power_of_two(size)) throw ValidationError("dft_size", "must be a power of two >= 2");
    if (!(opts.radius > 0.0) || !std::isfinite(opts.radius))
        throw ValidationError("inversion_radius", "must be finite and > 0");

    // Coefficients are real, so G(conj z) = conj G(z): evaluate m = 0..N/2 only.
    const std::size_t half = size / 2;
    std::vector<std::complex<double>> nodes(half + 1);
    for (std::size_t m = 0; m <= half; ++m)
        nodes[m] = std::polar(opts.radius, 2.0 * kPi * static_cast<double>(m) / static_cast<double>(size));
    const auto values = pgf(nodes);
    if (values.size() != nodes.size()) throw InversionError("PGF batch returned the wrong number of values");

    std::vector<std::complex<double>> samples(size);
    for (std::size_t m = 0; m <= half; ++m) samples[m] = values[m];
    for (std::size_t m = half + 1; m < size; ++m) samples[m] = std::conj(values[size - m]);
    fft_forward(samples);

    LoadPmf out;
    out.dft_size = size;
    out.inversion_radius = opts.radius;
    out.probs.resize(size);
    out.raw_sum = 0.0;
    out.raw_min = 0.0;
    const double log_radius = std::log(opts.radius);
    for (std::size_t n = 0; n < size; ++n) {
        const double p = samples[n].real() / static_cast<double>(size) * std::exp(-static_cast<double>(n) * log_radius);
        out.raw_sum += p;
        out.raw_min = std::min(out.raw_min, p);
        out.probs[n] = std::max(0.0, p);
    }
    if (opts.radius == 1.0 && std::abs(out.raw_sum - 1.0) > 1e-3)
        throw InversionError("inverted PMF sums to " + std::to_string(out.raw_sum));
    return out;
}

LoadPmf invert_pgf(const NetworkModel& net, const InversionOptions& opts, const QuadSpec& spec) {
    net.validate();
    return invert_pgf([&](std::span<const std::complex<double>> z) { return load_pgf_batch(net, z, spec); }, opts);
}

// -- SIR and rate ------------------------------------------------------------

double sir_beta(double alpha, double t, const SirModel& sir) {
    require_alpha(alpha);
    if (!(t > 0.0)) throw DomainError("sir_beta: t must be > 0");
    const double lower = 1.0 / t;
    switch (sir.reading) {
        case BetaReading::PlainExponent: return t * beta_tail(lower, 2.0 / alpha);
        case BetaReading::SwappedExponent: return t * beta_tail(lower, alpha / 2.0);
        case BetaReading::DeltaOffset:
            // t * tail -> 0 as t -> 0; below 1e-300 the tail overflows harmlessly to 0.
            return sir.delta + (lower > 1e300 ? 0.0 : t * beta_tail(lower, alpha / 2.0));
    }
    throw DomainError("sir_beta: unknown reading");
}

double sir_ccdf(double alpha, double tau, const SirModel& sir) {
    require_alpha(alpha);
    if (!(tau > 0.0) || std::isnan(tau)) throw DomainError("sir_ccdf: tau must be > 0");
    if (std::isinf(tau)) return 0.0;
    const double s = std::pow(tau, 2.0 / alpha);
    const double half_alpha = alpha / 2.0;
    auto integrand = [&](double t) {
        if (t == 0.0) {
            if (sir.reading == BetaReading::DeltaOffset) return 1.0 / (sir.delta * sir.delta);
            return kInf;
        }
        const double b = sir_beta(alpha, t, sir);
        return 1.0 / ((1.0 + std::pow(t, half_alpha)) * b * b);
    };

    double integral;
    try {
        const QuadSpec spec{1e-10, 1e-14, 2000};
        integral = s > 1e8 ? integrate_semi_infinite(integrand, 0.0, spec).value
                           : integrate_finite(integrand, 0.0, s, spec).value;
    } catch (const ConvergenceError& e) {
        throw SirFormulaAlarm(std::string("sir_ccdf: integral does not converge under reading ") + to_string(sir.reading));
    }
    const double pc = sir.delta * sir.delta / s * integral;
    if (!std::isfinite(pc) || pc < -1e-6 || pc > 1.0 + 1e-6)
        throw SirFormulaAlarm(std::string("sir_ccdf: P_c outside [0, 1] under reading ") + to_string(sir.reading));
    return std::clamp(pc, 0.0, 1.0);
}

namespace {

// Sum over n of P_c(2^{n rho / W} - 1) p_n / (1 - p_0), with SIR values memoised.
class RateEvaluator {
  public:
    RateEvaluator(const RateConfig& cfg, const LoadPmf& pmf, const SirModel& sir) : cfg_(cfg), pmf_(pmf), sir_(sir) {
        cfg_.validate();
        if (pmf.probs.empty()) throw InfeasibleError("rate_coverage: empty PMF");
        active_ = 1.0 - pmf.probs.front();
        if (!(active_ > 1e-15)) throw InfeasibleError("rate_coverage: P(load = 0) = 1, conditional rate undefined");
    }

    double operator()(double rho) {
        if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("rate_coverage: rho must be finite and > 0");
        std::size_t n_max = pmf_.probs.size() - 1;
        if (std::isfinite(cfg_.backhaul_rb)) {
            const double cap = std::floor(cfg_.backhaul_rb / rho);
            n_max = std::min<std::size_t>(n_max, cap < 0.0 ? 0 : static_cast<std::size_t>(std::min(cap, 1e9)));
        }
        double total = 0.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            const double p = pmf_.probs[n];
            if (p == 0.0) continue;
            const double tau = std::expm1(static_cast<double>(n) * rho / cfg_.bandwidth_w * std::numbers::ln2);
            total += coverage(tau) * p;
        }
        return std::clamp(total / active_, 0.0, 1.0);
    }

  private:
    double coverage(double tau) {
        auto it = cache_.find(tau);
        if (it != cache_.end()) return it->second;
        const double pc = sir_ccdf(cfg_.alpha, tau, sir_);
        cache_.emplace(tau, pc);
        return pc;
    }

    RateConfig cfg_;
    const LoadPmf& pmf_;
    SirModel sir_;
    double active_;
    std::map<double, double> cache_;
};

}  // namespace

double rate_coverage(const RateConfig& cfg, const LoadPmf& pmf, double rho, const SirModel& sir) {
    RateEvaluator eval(cfg, pmf, sir);
    return eval(rho);
}

std::vector<double> rate_coverage_curve(const RateConfig& cfg, const LoadPmf& pmf, const SirModel& sir) {
    RateEvaluator eval(cfg, pmf, sir);
    std::vector<double> out;
    out.reserve(cfg.thresholds.size());
    for (double rho : cfg.thresholds) out.push_back(eval(rho));
    return out;
}

}  // namespace cellload
