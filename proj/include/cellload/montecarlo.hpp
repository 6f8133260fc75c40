#pragma once

// Palm-distribution simulator for the typical-cell load: a BS at the origin
// plus a PPP of other BSs in a disc, users from the exact cluster process, and
// membership by the nearest-BS rule.
//
// Every realization draws from its own generator seeded by (seed, index), so
// results do not depend on how the work is split across threads.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "cellload/analytic.hpp"
#include "cellload/model.hpp"

namespace cellload {

struct SimConfig {
    std::size_t realizations = 10000;
    double window_radius = 0.0;     ///< km; 0 picks default_window_radius
    std::uint64_t seed = 1;
    std::size_t parallel_chunks = 0;  ///< 0 uses the hardware thread count
    std::size_t area_probes = 0;      ///< hit-or-miss probes for the cell-area diagnostic; 0 skips it

    /// Throws ValidationError (fields under "sim.") on a zero realization
    /// count or a window that violates the escape or interference bounds.
    /// `alpha` is given when SIR samples are requested.
    void validate(const NetworkModel& net, std::optional<double> alpha = std::nullopt) const;

    /// Copy with window_radius and parallel_chunks filled in.
    SimConfig resolved(const NetworkModel& net, std::optional<double> alpha = std::nullopt) const;
};

/// Upper bound on P(typical cell not inside b(o, W/2)).
double window_escape_bound(double lambda_b, double window_radius);

/// Mean interference from BSs beyond W over that from the annulus [1/sqrt(lambda_b), W].
double interference_tail_ratio(double lambda_b, double window_radius, double alpha);

/// Smallest window meeting both bounds (escape < 1e-6; tail < 1% when alpha >= 3).
double default_window_radius(double lambda_b, std::optional<double> alpha = std::nullopt);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    bool operator==(const Estimate&) const = default;
};

struct Point {
    double x;
    double y;
    double norm() const;
};

using PointSet = std::vector<Point>;
using Rng = std::mt19937_64;

/// Generator for realization `index` of a run seeded with `seed`.
Rng realization_rng(std::uint64_t seed, std::uint64_t index);

/// PPP of the given intensity in b(o, radius). Zero intensity gives an empty set.
PointSet sample_ppp(double intensity, double radius, Rng& rng);

/// Cluster process restricted to b(o, radius), with parents drawn from the
/// disc expanded by cluster_truncation_radius.
PointSet sample_pcp(const UserModel& model, double radius, Rng& rng);

struct Realization {
    std::size_t index = 0;
    long load = 0;
    std::optional<double> sir;        ///< representative user's SIR, when load > 0 and requested
    std::optional<double> rate;       ///< bps, alongside sir
    std::optional<double> cell_area;  ///< km^2, when area probes were requested
    bool truncated = false;           ///< cell bound reached beyond W/2; load may be inexact
};

/// One draw of the typical-cell load. `cfg` must be resolved.
Realization sample_typical_cell_load(const NetworkModel& net, const SimConfig& cfg, Rng& rng);

/// Load plus the SIR and rate of a user drawn uniformly from the cell.
Realization sample_sir_rate(const NetworkModel& net, const SimConfig& cfg, const RateConfig& rate, Rng& rng);

/// SIR at a location drawn uniformly from the typical cell, the quantity
/// sir_ccdf describes. Unlike sample_sir_rate this does not depend on how
/// users are spread inside the cell. `cfg` must be resolved for `alpha`.
double sample_uniform_location_sir(double lambda_b, const SimConfig& cfg, double alpha, Rng& rng);

/// sample_uniform_location_sir for realizations 0..cfg.realizations-1.
std::vector<double> run_uniform_location_sir(double lambda_b, const SimConfig& cfg, double alpha);

/// Fraction of samples above tau, with its binomial standard error.
Estimate empirical_ccdf(std::span<const double> samples, double tau);

/// Realizations 0..cfg.realizations-1 in index order. With `rate` set, SIR
/// and rate samples are drawn as well.
std::vector<Realization> run_simulation(const NetworkModel& net, const SimConfig& cfg,
                                        const RateConfig* rate = nullptr);

/// Normalized histogram of the loads.
LoadPmf empirical_pmf(std::span<const Realization> rs);

struct LoadStatistics {
    std::size_t realizations = 0;
    std::size_t truncated = 0;
    Estimate mean;
    Estimate second_moment;
    Estimate variance;
    Estimate normalized_variance;
    double void_probability = 0.0;
    bool operator==(const LoadStatistics&) const = default;
};

/// Sample moments. Standard errors of the mean and second moment are the
/// usual ones; variance-type errors come from 20 batch means in index order.
LoadStatistics load_statistics(std::span<const Realization> rs);

/// P(SIR > tau | load > 0) over realizations carrying an SIR sample.
Estimate empirical_sir_ccdf(std::span<const Realization> rs, double tau);

/// P(rate > rho | load > 0) for each threshold.
std::vector<Estimate> empirical_rate_ccdf(std::span<const Realization> rs, std::span<const double> thresholds);

/// Raw dump: realization_index,load,sir,rate (empty fields when absent).
void write_raw_csv(std::ostream& out, std::span<const Realization> rs);

}  // namespace cellload
