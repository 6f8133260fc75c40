#pragma once

// End-to-end runs behind each CLI subcommand: analytic results, optional
// Monte Carlo estimates, and the analytic-versus-simulation comparison.

#include <cstddef>
#include <vector>

#include "cellload/analytic.hpp"
#include "cellload/montecarlo.hpp"
#include "cellload/report.hpp"

namespace cellload {

struct RunConfig {
    NetworkModel network{1.0, UserModel{5.0, 5.0, Thomas{0.1}}};
    SimConfig sim;
    RateConfig rate;
    SirModel sir;
    std::size_t dft_size = 0;  ///< 0 picks default_dft_size
    double inversion_radius = 1.0;
    bool mc = false;
    std::vector<double> taus{0.1, 1.0, 10.0};  ///< SIR thresholds reported next to rate curves

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// Thresholds (bps) used when none are given.
std::vector<double> default_rate_thresholds();

/// Tolerances used by run_compare.
struct CompareTolerances {
    double mean_standard_errors = 3.0;
    double normalized_variance_relative = 0.05;
    double pmf_total_variation = 0.05;
    double sir_absolute = 0.03;
    double rate_absolute = 0.05;
};

MomentsReport run_moments(const RunConfig& cfg);
PmfReport run_pmf(const RunConfig& cfg);
RateReport run_rate(const RunConfig& cfg);

/// `raw`, when non-null, receives every realization.
SimulateReport run_simulate(const RunConfig& cfg, std::vector<Realization>* raw = nullptr);

/// Analytic pipeline and one seeded simulation of the same configuration.
/// SIR checks use the uniform-location sampler; the rest use the user process.
CompareReport run_compare(const RunConfig& cfg, const CompareTolerances& tol = {});

/// Inverts the PGF of NB(25, 0.5) and checks every term against the closed form.
CompareReport run_nb_selftest(std::size_t dft_size = 128);

}  // namespace cellload
