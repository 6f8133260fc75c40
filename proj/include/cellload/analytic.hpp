#pragma once

// Typical-cell load statistics: exact first two moments, the negative-binomial
// moment fit, the equal-area-circle PGF and its DFT inversion, the SIR CCDF of
// a uniformly chosen in-cell user, and the resulting rate coverage.
//
// Public functions take models in user units and rescale to lambda_b = 1
// internally; counts and probabilities are scale-free.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cellload/model.hpp"
#include "cellload/quadrature.hpp"

namespace cellload {

struct LoadMoments {
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
    double mean_error = 0.0;
    double second_moment_error = 0.0;
    double variance_error = 0.0;

    double normalized_variance() const { return variance / (mean * mean); }
    bool operator==(const LoadMoments&) const = default;
};

struct NegBinParams {
    long r;    ///< number of failures, >= 1
    double t;  ///< success probability in (0, 1]

    void validate() const;
    double mean() const { return static_cast<double>(r) * t / (1.0 - t); }
    double variance() const { return static_cast<double>(r) * t / ((1.0 - t) * (1.0 - t)); }
    bool operator==(const NegBinParams&) const = default;
};

/// Finite-support PMF {p_n, 0 <= n < N}. For inverted PGFs the raw DFT output
/// is kept as diagnostics; `probs` are clipped at zero.
struct LoadPmf {
    std::vector<double> probs;
    double inversion_radius = 1.0;
    std::size_t dft_size = 0;
    double raw_sum = 1.0;  ///< sum of unclipped terms
    double raw_min = 0.0;  ///< most negative unclipped term (0 if none)

    double mean() const;
    double variance() const;
    double at(std::size_t n) const { return n < probs.size() ? probs[n] : 0.0; }
};

/// Total-variation distance, sum |p - q| / 2 over the union of supports.
double total_variation(const LoadPmf& p, const LoadPmf& q);

struct RateConfig {
    double alpha = 4.0;
    double bandwidth_w = 1e6;                                      ///< Hz
    double backhaul_rb = std::numeric_limits<double>::infinity();  ///< bps, +inf for no cap
    std::vector<double> thresholds;                                ///< bps

    void validate() const;
};

/// Form of the auxiliary function beta(t) inside the SIR CCDF. Only
/// DeltaOffset is finite for alpha > 2; the other two raise SirFormulaAlarm.
enum class BetaReading {
    PlainExponent,    ///< t \int_{1/t}^inf du / (1 + u^{2/alpha})
    SwappedExponent,  ///< t \int_{1/t}^inf du / (1 + u^{alpha/2})
    DeltaOffset,      ///< delta + t \int_{1/t}^inf du / (1 + u^{alpha/2})
};

const char* to_string(BetaReading r);

struct SirModel {
    double delta = 9.0 / 7.0;
    BetaReading reading = BetaReading::DeltaOffset;
};

/// Raised when a beta(t) reading yields a divergent or out-of-range CCDF.
class SirFormulaAlarm : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// -- moments -----------------------------------------------------------------

/// m_bar lambda_p / lambda_b.
double mean_load(const NetworkModel& net);

/// Coordinates for the pair integral of the second moment.
enum class PairRoute {
    /// (x, r, phi): position of one user, separation and its angle. The
    /// clustering excess is concentrated in r, which keeps small clusters cheap.
    Separation,
    /// (theta, x2, x1): both users in polar form, as in the textbook formula.
    PolarPair,
};

/// E[(lambda_b |C_o|)^2] for the typical Poisson-Voronoi cell, from the
/// union-of-discs void kernel. Computed once and cached.
double cell_area_second_moment();

/// Integrand of the pair term in (x1, x2, theta) form, in normalized units:
/// exp(-A_u(x1, x2, d)) rho2(d) x1 x2 with d^2 = x1^2 + x2^2 - 2 x1 x2 cos(theta).
double second_moment_integrand(const NetworkModel& normalized, double x1, double x2, double theta);

/// E[load^2]. `error` (if non-null) receives the quadrature error estimate.
double second_moment_load(const NetworkModel& net, PairRoute route = PairRoute::Separation,
                          const QuadSpec& spec = {}, double* error = nullptr);

/// second_moment_load - mean_load^2.
double variance_load(const NetworkModel& net, const QuadSpec& spec = {});

LoadMoments load_moments(const NetworkModel& net, const QuadSpec& spec = {});

/// Normalized variance of the load when users are a PPP of the same density:
/// 1/mean + E[(lambda_b |C_o|)^2] - 1.
double ppp_normalized_variance(const NetworkModel& net);

// -- negative binomial fit ---------------------------------------------------

/// t = 1 - mean/var, r = floor((1 - t) mean / t), clamped to r >= 1.
/// Throws InfeasibleError when variance <= mean.
NegBinParams nb_fit(const LoadMoments& m);

/// C(r+n-1, n) (1-t)^r t^n.
double nb_pmf(const NegBinParams& nb, long n);

LoadPmf nb_load_pmf(const NegBinParams& nb, std::size_t size);

// -- PGF and inversion -------------------------------------------------------

/// Values of a PGF at a batch of complex points.
using PgfBatch = std::function<std::vector<std::complex<double>>(std::span<const std::complex<double>>)>;

/// Accuracy used for PGF evaluation unless overridden.
inline constexpr QuadSpec kPgfQuad{1e-10, 1e-12, 4000};

/// Equal-area-circle PGF of the load at every point in `thetas`. One shared
/// adaptive pass integrates all points together.
std::vector<std::complex<double>> load_pgf_batch(const NetworkModel& net, std::span<const std::complex<double>> thetas,
                                                 const QuadSpec& spec = kPgfQuad);

std::complex<double> load_pgf(const NetworkModel& net, std::complex<double> theta, const QuadSpec& spec = kPgfQuad);

struct InversionOptions {
    std::size_t dft_size = 128;
    double radius = 1.0;
};

/// Smallest power of two >= mean + 10 sd, at least 128.
std::size_t default_dft_size(const LoadMoments& m);

/// Cantelli bound on P(load >= N), the mass that can alias into [0, N).
double aliasing_bound(const LoadMoments& m, std::size_t dft_size);

/// p_n = R^{-n} / N * sum_m G(R w^m) w^{-nm}, w = e^{2 pi j / N}.
/// Throws ValidationError for a non-power-of-two size or non-positive radius,
/// InversionError when sum p_n deviates from 1 by more than 1e-3 (R = 1 only).
LoadPmf invert_pgf(const PgfBatch& pgf, const InversionOptions& opts);

LoadPmf invert_pgf(const NetworkModel& net, const InversionOptions& opts = {}, const QuadSpec& spec = kPgfQuad);

// -- SIR and rate ------------------------------------------------------------

/// beta(t) under the given reading. Throws SirFormulaAlarm when the defining
/// integral diverges.
double sir_beta(double alpha, double t, const SirModel& sir = {});

/// P(SIR > tau) for a user chosen uniformly in the typical cell, Rayleigh
/// fading, interference-limited. Independent of lambda_b.
double sir_ccdf(double alpha, double tau, const SirModel& sir = {});

/// P(rate > rho | load > 0) under independence of SIR and load.
double rate_coverage(const RateConfig& cfg, const LoadPmf& pmf, double rho, const SirModel& sir = {});

/// rate_coverage at every cfg.thresholds entry, sharing SIR evaluations.
std::vector<double> rate_coverage_curve(const RateConfig& cfg, const LoadPmf& pmf, const SirModel& sir = {});

}  // namespace cellload
