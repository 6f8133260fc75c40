// cellload: typical-cell load statistics from the command line.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure,
// 4 analytic and simulated results disagree (compare, pmf --nb-selftest).

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cellload/errors.hpp"
#include "cellload/pipeline.hpp"
#include "cellload/report.hpp"

using namespace cellload;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitMismatch = 4;

struct Options {
    std::string kind = "tcp";
    double lambda_b = 1.0;
    double lambda_p = 5.0;
    double mbar = 5.0;
    std::optional<double> sigma;
    std::optional<double> cluster_radius;
    double alpha = 4.0;
    double bandwidth = 1e6;
    std::string backhaul = "inf";
    std::vector<double> thresholds;
    std::vector<double> taus{0.1, 1.0, 10.0};
    std::size_t realizations = 10000;
    std::uint64_t seed = 1;
    double window = 0.0;
    std::size_t threads = 0;
    std::size_t area_probes = 0;
    std::size_t dft_size = 0;
    double inversion_radius = 1.0;
    double delta = 9.0 / 7.0;
    std::string beta_reading = "delta-offset";
    std::string out = "-";
    std::string format = "json";
    bool mc = false;
    bool nb_selftest = false;
    std::string raw;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--kind", o.kind, "User cluster process")->check(CLI::IsMember({"tcp", "mcp"}));
    cmd->add_option("--lambda-b", o.lambda_b, "BS density (km^-2)");
    cmd->add_option("--lambda-p", o.lambda_p, "Cluster-centre density (km^-2)");
    cmd->add_option("--mbar", o.mbar, "Mean users per cluster");
    cmd->add_option("--sigma", o.sigma, "Thomas scattering deviation (km), default 0.1");
    cmd->add_option("--cluster-radius", o.cluster_radius, "Matern cluster radius (km), default 0.2");
    cmd->add_option("--alpha", o.alpha, "Path-loss exponent");
    cmd->add_option("--bandwidth", o.bandwidth, "Bandwidth W (Hz)");
    cmd->add_option("--backhaul", o.backhaul, "Backhaul cap R_b (bps) or 'inf'");
    cmd->add_option("--thresholds", o.thresholds, "Rate thresholds (bps)")->delimiter(',');
    cmd->add_option("--taus", o.taus, "SIR thresholds")->delimiter(',');
    cmd->add_option("--realizations", o.realizations, "Monte Carlo realizations");
    cmd->add_option("--seed", o.seed, "Monte Carlo seed");
    cmd->add_option("--window", o.window, "Simulation window radius (km), 0 for automatic");
    cmd->add_option("--threads", o.threads, "Worker threads, 0 for all cores");
    cmd->add_option("--dft-size", o.dft_size, "DFT size N (power of two), 0 for automatic");
    cmd->add_option("--inversion-radius", o.inversion_radius, "Inversion circle radius R");
    cmd->add_option("--delta", o.delta, "delta inside the SIR coverage formula");
    cmd->add_option("--beta-reading", o.beta_reading, "beta(t) reading")
        ->check(CLI::IsMember({"delta-offset", "swapped-exponent", "plain-exponent"}));
    cmd->add_option("--out", o.out, "Output path, '-' for stdout");
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

double parse_backhaul(const std::string& s) {
    if (s == "inf" || s == "unbounded") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("backhaul", "must be a number or 'inf'");
}

RunConfig build_config(const Options& o) {
    RunConfig cfg;
    ClusterKind kind;
    if (o.kind == "tcp") {
        if (o.cluster_radius) throw ValidationError("cluster_radius", "only applies to --kind mcp");
        kind = Thomas{o.sigma.value_or(0.1)};
    } else {
        if (o.sigma) throw ValidationError("sigma", "only applies to --kind tcp");
        kind = Matern{o.cluster_radius.value_or(0.2)};
    }
    cfg.network = NetworkModel{o.lambda_b, UserModel{o.lambda_p, o.mbar, kind}};
    cfg.rate.alpha = o.alpha;
    cfg.rate.bandwidth_w = o.bandwidth;
    cfg.rate.backhaul_rb = parse_backhaul(o.backhaul);
    cfg.rate.thresholds = o.thresholds;
    cfg.taus = o.taus;
    cfg.sim.realizations = o.realizations;
    cfg.sim.seed = o.seed;
    cfg.sim.window_radius = o.window;
    cfg.sim.parallel_chunks = o.threads;
    cfg.sim.area_probes = o.area_probes;
    cfg.dft_size = o.dft_size;
    cfg.inversion_radius = o.inversion_radius;
    cfg.sir.delta = o.delta;
    cfg.sir.reading = parse_beta_reading(o.beta_reading);
    cfg.mc = o.mc;
    cfg.validate();
    return cfg;
}

void emit(const Options& o, const std::string& text) {
    if (o.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw ValidationError("out", "cannot open '" + o.out + "' for writing");
    f << text;
}

int run(const std::string& command, const Options& o) {
    const Format fmt = parse_format(o.format);
    if (command == "pmf" && o.nb_selftest) {
        const CompareReport r = run_nb_selftest(o.dft_size ? o.dft_size : 128);
        emit(o, render(r, fmt));
        return r.passed ? kExitOk : kExitMismatch;
    }
    const RunConfig cfg = build_config(o);
    if (command == "moments") {
        emit(o, render(run_moments(cfg), fmt));
    } else if (command == "pmf") {
        emit(o, render(run_pmf(cfg), fmt));
    } else if (command == "rate") {
        emit(o, render(run_rate(cfg), fmt));
    } else if (command == "simulate") {
        std::vector<Realization> raw;
        const SimulateReport r = run_simulate(cfg, o.raw.empty() ? nullptr : &raw);
        if (!o.raw.empty()) {
            std::ofstream f(o.raw, std::ios::binary);
            if (!f) throw ValidationError("raw", "cannot open '" + o.raw + "' for writing");
            write_raw_csv(f, raw);
        }
        emit(o, render(r, fmt));
    } else if (command == "compare") {
        const CompareReport r = run_compare(cfg);
        emit(o, render(r, fmt));
        return r.passed ? kExitOk : kExitMismatch;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Typical-cell load, PMF and rate coverage for PPP base stations with clustered users"};
    app.require_subcommand(1);
    Options o;

    auto* moments = app.add_subcommand("moments", "Mean, variance and negative-binomial fit of the load");
    auto* pmf = app.add_subcommand("pmf", "Load PMF by PGF inversion");
    auto* rate = app.add_subcommand("rate", "Rate coverage over a threshold grid");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo load, SIR and rate samples");
    auto* compare = app.add_subcommand("compare", "Analytic versus Monte Carlo with pass/fail checks");
    for (auto* cmd : {moments, pmf, rate, simulate, compare}) add_common(cmd, o);
    for (auto* cmd : {moments, pmf, rate}) cmd->add_flag("--mc", o.mc, "Append Monte Carlo estimates");
    pmf->add_flag("--nb-selftest", o.nb_selftest, "Invert a synthetic NB(25, 0.5) PGF instead of the model");
    simulate->add_option("--raw", o.raw, "Write per-realization samples to this CSV file");
    simulate->add_option("--area-probes", o.area_probes, "Hit-or-miss probes for the cell-area diagnostic");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, o);
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << " (best estimate " << e.best_estimate() << ", error "
                  << e.error_estimate() << ")\n";
        return kExitConvergence;
    } catch (const InversionError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const SirFormulaAlarm& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
