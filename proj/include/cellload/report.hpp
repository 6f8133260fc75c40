#pragma once

// Report records emitted by the command-line tool, with JSON and CSV codecs.
//
// JSON is a nested object per report. CSV carries the same content: every
// scalar field as a "# /json/pointer=value" line, then the report's series
// (if any) as a table with a header row. Both forms parse back to an equal
// record.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellload/analytic.hpp"
#include "cellload/model.hpp"
#include "cellload/montecarlo.hpp"

namespace cellload {

enum class Format { Json, Csv };

/// Parses "json" or "csv"; throws ValidationError("format", ...) otherwise.
Format parse_format(std::string_view s);

/// Throws ValidationError("beta_reading", ...) on an unknown name.
BetaReading parse_beta_reading(std::string_view s);

/// Thrown when a report document is malformed or of the wrong kind.
class ReportParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct McSummary {
    std::uint64_t seed = 0;
    std::size_t realizations = 0;
    double window_radius = 0.0;
    LoadStatistics stats;

    bool operator==(const McSummary&) const = default;
};

struct MomentsReport {
    NetworkModel model;
    LoadMoments analytic;
    double ppp_normalized_variance = 0.0;
    std::optional<NegBinParams> nb_fit;
    std::optional<McSummary> mc;

    bool operator==(const MomentsReport&) const = default;
};

struct PmfReport {
    NetworkModel model;
    LoadMoments moments;
    std::size_t dft_size = 0;
    double inversion_radius = 1.0;
    double aliasing_bound = 0.0;
    double raw_sum = 1.0;
    double raw_min = 0.0;
    std::optional<NegBinParams> nb_fit;
    std::optional<McSummary> mc;
    std::optional<double> tv_analytic_empirical;
    std::optional<double> tv_nb_empirical;
    // Series, indexed by load n.
    std::vector<double> analytic;
    std::vector<std::optional<double>> nb;
    std::vector<std::optional<double>> empirical;

    bool operator==(const PmfReport&) const = default;
};

struct SirPoint {
    double tau = 0.0;
    double analytic = 0.0;
    std::optional<double> empirical;
    std::optional<double> empirical_se;

    bool operator==(const SirPoint&) const = default;
};

struct RateReport {
    NetworkModel model;
    double alpha = 4.0;
    double bandwidth_w = 1e6;
    std::optional<double> backhaul_rb;  ///< unset means unbounded
    double delta = 9.0 / 7.0;
    BetaReading reading = BetaReading::DeltaOffset;
    std::size_t dft_size = 0;
    double void_probability = 0.0;
    std::optional<McSummary> mc;
    std::vector<SirPoint> sir;
    // Series, indexed by threshold.
    std::vector<double> thresholds;
    std::vector<double> analytic;
    std::vector<std::optional<double>> empirical;
    std::vector<std::optional<double>> empirical_se;

    bool operator==(const RateReport&) const = default;
};

struct SimulateReport {
    NetworkModel model;
    McSummary mc;
    std::optional<double> alpha;  ///< set when SIR samples were drawn
    std::vector<SirPoint> sir;
    // Series, indexed by load n.
    std::vector<double> empirical;

    bool operator==(const SimulateReport&) const = default;
};

struct Check {
    std::string name;
    double analytic = 0.0;
    double empirical = 0.0;
    double gap = 0.0;
    double tolerance = 0.0;
    bool passed = false;

    bool operator==(const Check&) const = default;
};

struct CompareReport {
    std::optional<NetworkModel> model;  ///< unset for the synthetic self-test
    std::uint64_t seed = 0;
    std::size_t realizations = 0;
    double delta = 9.0 / 7.0;
    bool passed = false;
    std::vector<Check> checks;

    bool operator==(const CompareReport&) const = default;
};

std::string render(const MomentsReport& r, Format f);
std::string render(const PmfReport& r, Format f);
std::string render(const RateReport& r, Format f);
std::string render(const SimulateReport& r, Format f);
std::string render(const CompareReport& r, Format f);

MomentsReport parse_moments_report(std::string_view text, Format f);
PmfReport parse_pmf_report(std::string_view text, Format f);
RateReport parse_rate_report(std::string_view text, Format f);
SimulateReport parse_simulate_report(std::string_view text, Format f);
CompareReport parse_compare_report(std::string_view text, Format f);

}  // namespace cellload
