#include "cellload/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "cellload/errors.hpp"
#include "cellload/fft.hpp"

namespace cellload {

namespace {

std::optional<double> finite_or_none(double v) {
    if (std::isfinite(v)) return v;
    return std::nullopt;
}

std::optional<NegBinParams> try_nb_fit(const LoadMoments& m) {
    try {
        return nb_fit(m);
    } catch (const InfeasibleError&) {
        return std::nullopt;
    }
}

McSummary summarize(const RunConfig& cfg, std::span<const Realization> rs, std::optional<double> alpha) {
    McSummary mc;
    mc.seed = cfg.sim.seed;
    mc.realizations = rs.size();
    mc.window_radius = cfg.sim.resolved(cfg.network, alpha).window_radius;
    mc.stats = load_statistics(rs);
    return mc;
}

std::size_t dft_size_for(const RunConfig& cfg, const LoadMoments& m) {
    return cfg.dft_size ? cfg.dft_size : default_dft_size(m);
}

struct AnalyticPmf {
    LoadMoments moments;
    LoadPmf pmf;
};

AnalyticPmf analytic_pmf(const RunConfig& cfg) {
    AnalyticPmf out;
    out.moments = load_moments(cfg.network);
    out.pmf = invert_pgf(cfg.network, InversionOptions{dft_size_for(cfg, out.moments), cfg.inversion_radius});
    return out;
}

std::vector<double> thresholds_of(const RunConfig& cfg) {
    return cfg.rate.thresholds.empty() ? default_rate_thresholds() : cfg.rate.thresholds;
}

std::string tau_label(double tau) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", tau);
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    network.validate();
    rate.validate();
    if (dft_size != 0 && (dft_size < 2 || !is_power_of_two(dft_size)))
        throw ValidationError("dft_size", "must be a power of two >= 2");
    if (!(inversion_radius > 0.0) || !std::isfinite(inversion_radius))
        throw ValidationError("inversion_radius", "must be finite and > 0");
    if (!(sir.delta >= 0.0) || !std::isfinite(sir.delta)) throw ValidationError("delta", "must be finite and >= 0");
    for (double t : taus)
        if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("taus", "SIR thresholds must be finite and > 0");
    sim.validate(network);
}

std::vector<double> default_rate_thresholds() {
    return {5e3, 1e4, 2e4, 4e4, 6e4, 8e4, 1e5, 1.5e5, 2e5, 3e5, 5e5};
}

MomentsReport run_moments(const RunConfig& cfg) {
    cfg.validate();
    MomentsReport r;
    r.model = cfg.network;
    r.analytic = load_moments(cfg.network);
    r.ppp_normalized_variance = ppp_normalized_variance(cfg.network);
    r.nb_fit = try_nb_fit(r.analytic);
    if (cfg.mc) r.mc = summarize(cfg, run_simulation(cfg.network, cfg.sim), std::nullopt);
    return r;
}

PmfReport run_pmf(const RunConfig& cfg) {
    cfg.validate();
    const AnalyticPmf a = analytic_pmf(cfg);
    PmfReport r;
    r.model = cfg.network;
    r.moments = a.moments;
    r.dft_size = a.pmf.dft_size;
    r.inversion_radius = a.pmf.inversion_radius;
    r.aliasing_bound = aliasing_bound(a.moments, a.pmf.dft_size);
    r.raw_sum = a.pmf.raw_sum;
    r.raw_min = a.pmf.raw_min;
    r.nb_fit = try_nb_fit(a.moments);

    std::optional<LoadPmf> nb, empirical;
    if (r.nb_fit) nb = nb_load_pmf(*r.nb_fit, a.pmf.dft_size);
    if (cfg.mc) {
        const auto rs = run_simulation(cfg.network, cfg.sim);
        r.mc = summarize(cfg, rs, std::nullopt);
        empirical = empirical_pmf(rs);
        r.tv_analytic_empirical = total_variation(a.pmf, *empirical);
        if (nb) r.tv_nb_empirical = total_variation(*nb, *empirical);
    }

    const std::size_t size = std::max(a.pmf.probs.size(), empirical ? empirical->probs.size() : 0);
    for (std::size_t n = 0; n < size; ++n) {
        r.analytic.push_back(a.pmf.at(n));
        r.nb.push_back(nb ? std::optional<double>(nb->at(n)) : std::nullopt);
        r.empirical.push_back(empirical ? std::optional<double>(empirical->at(n)) : std::nullopt);
    }
    return r;
}

RateReport run_rate(const RunConfig& cfg_in) {
    cfg_in.validate();
    RunConfig cfg = cfg_in;
    cfg.rate.thresholds = thresholds_of(cfg);
    const AnalyticPmf a = analytic_pmf(cfg);

    RateReport r;
    r.model = cfg.network;
    r.alpha = cfg.rate.alpha;
    r.bandwidth_w = cfg.rate.bandwidth_w;
    r.backhaul_rb = finite_or_none(cfg.rate.backhaul_rb);
    r.delta = cfg.sir.delta;
    r.reading = cfg.sir.reading;
    r.dft_size = a.pmf.dft_size;
    r.void_probability = a.pmf.at(0);
    r.thresholds = cfg.rate.thresholds;
    r.analytic = rate_coverage_curve(cfg.rate, a.pmf, cfg.sir);
    for (double tau : cfg.taus) r.sir.push_back(SirPoint{tau, sir_ccdf(cfg.rate.alpha, tau, cfg.sir), {}, {}});

    if (cfg.mc) {
        const auto rs = run_simulation(cfg.network, cfg.sim, &cfg.rate);
        r.mc = summarize(cfg, rs, cfg.rate.alpha);
        for (const auto& e : empirical_rate_ccdf(rs, cfg.rate.thresholds)) {
            r.empirical.push_back(e.value);
            r.empirical_se.push_back(e.std_error);
        }
        for (auto& p : r.sir) {
            const auto e = empirical_sir_ccdf(rs, p.tau);
            p.empirical = e.value;
            p.empirical_se = e.std_error;
        }
    } else {
        r.empirical.assign(r.thresholds.size(), std::nullopt);
        r.empirical_se.assign(r.thresholds.size(), std::nullopt);
    }
    return r;
}

SimulateReport run_simulate(const RunConfig& cfg, std::vector<Realization>* raw) {
    cfg.validate();
    const auto rs = run_simulation(cfg.network, cfg.sim, &cfg.rate);
    SimulateReport r;
    r.model = cfg.network;
    r.mc = summarize(cfg, rs, cfg.rate.alpha);
    r.alpha = cfg.rate.alpha;
    for (double tau : cfg.taus) {
        const auto e = empirical_sir_ccdf(rs, tau);
        r.sir.push_back(SirPoint{tau, sir_ccdf(cfg.rate.alpha, tau, cfg.sir), e.value, e.std_error});
    }
    r.empirical = empirical_pmf(rs).probs;
    if (raw) *raw = rs;
    return r;
}

CompareReport run_compare(const RunConfig& cfg_in, const CompareTolerances& tol) {
    cfg_in.validate();
    RunConfig cfg = cfg_in;
    cfg.rate.thresholds = thresholds_of(cfg);

    CompareReport r;
    r.model = cfg.network;
    r.seed = cfg.sim.seed;
    r.realizations = cfg.sim.realizations;
    r.delta = cfg.sir.delta;

    auto add = [&r](std::string name, double analytic, double empirical, double gap, double tolerance) {
        r.checks.push_back(Check{std::move(name), analytic, empirical, gap, tolerance, gap <= tolerance});
    };

    const AnalyticPmf a = analytic_pmf(cfg);
    const auto rs = run_simulation(cfg.network, cfg.sim, &cfg.rate);
    const LoadStatistics stats = load_statistics(rs);

    add("mean", a.moments.mean, stats.mean.value, std::abs(a.moments.mean - stats.mean.value),
        tol.mean_standard_errors * stats.mean.std_error);
    const double nv = a.moments.normalized_variance();
    add("normalized_variance", nv, stats.normalized_variance.value,
        std::abs(nv - stats.normalized_variance.value) / stats.normalized_variance.value,
        tol.normalized_variance_relative);
    const LoadPmf empirical = empirical_pmf(rs);
    add("pmf_total_variation", 0.0, 0.0, total_variation(a.pmf, empirical), tol.pmf_total_variation);

    const auto sir_samples = run_uniform_location_sir(cfg.network.lambda_b, cfg.sim, cfg.rate.alpha);
    for (double tau : cfg.taus) {
        const double an = sir_ccdf(cfg.rate.alpha, tau, cfg.sir);
        const double em = empirical_ccdf(sir_samples, tau).value;
        add("sir_ccdf_tau_" + tau_label(tau), an, em, std::abs(an - em), tol.sir_absolute);
    }

    const auto curve = rate_coverage_curve(cfg.rate, a.pmf, cfg.sir);
    const auto emp_rate = empirical_rate_ccdf(rs, cfg.rate.thresholds);
    std::size_t worst = 0;
    for (std::size_t i = 0; i < curve.size(); ++i)
        if (std::abs(curve[i] - emp_rate[i].value) > std::abs(curve[worst] - emp_rate[worst].value)) worst = i;
    add("rate_max_gap", curve[worst], emp_rate[worst].value, std::abs(curve[worst] - emp_rate[worst].value),
        tol.rate_absolute);

    r.passed = std::all_of(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.passed; });
    return r;
}

CompareReport run_nb_selftest(std::size_t dft_size) {
    const NegBinParams nb{25, 0.5};
    PgfBatch pgf = [&nb](std::span<const std::complex<double>> z) {
        std::vector<std::complex<double>> out;
        for (auto w : z) out.push_back(std::pow((1.0 - nb.t) / (1.0 - nb.t * w), static_cast<double>(nb.r)));
        return out;
    };
    const LoadPmf pmf = invert_pgf(pgf, InversionOptions{dft_size, 1.0});
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t n = 0; n < pmf.probs.size(); ++n) {
        const double e = std::abs(pmf.probs[n] - nb_pmf(nb, static_cast<long>(n)));
        if (e > worst) {
            worst = e;
            at = n;
        }
    }
    CompareReport r;
    r.checks.push_back(Check{"nb_inversion_max_error", pmf.at(at), nb_pmf(nb, static_cast<long>(at)), worst, 1e-10,
                             worst <= 1e-10});
    r.passed = r.checks.front().passed;
    return r;
}

}  // namespace cellload
