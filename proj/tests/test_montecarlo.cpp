#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "cellload/errors.hpp"
#include "cellload/montecarlo.hpp"
#include "cellload/quadrature.hpp"
#include "doctest.h"

using namespace cellload;

namespace {
constexpr double kPi = std::numbers::pi;

NetworkModel tcp_net(double sigma, double m_bar = 5.0) { return NetworkModel{1.0, UserModel{5.0, m_bar, Thomas{sigma}}}; }
NetworkModel mcp_net(double radius) { return NetworkModel{1.0, UserModel{5.0, 5.0, Matern{radius}}}; }

Realization with_load(long n) {
    Realization r;
    r.load = n;
    return r;
}

// Mean number of other points within r of a typical point, from the pair density.
double expected_neighbours(const UserModel& m, double r) {
    const double lu = m.lambda_u();
    auto f = [&m](double s) { return 2.0 * kPi * s * pair_correlation_density(m, s); };
    return integrate_finite(f, 0.0, r, QuadSpec{1e-10, 1e-12, 2000}).value / lu;
}

// Pooled neighbour counts around points at least r inside the window.
struct NeighbourCount {
    double mean;
    double std_error;
};

NeighbourCount neighbour_count(const std::vector<PointSet>& samples, double window, double r) {
    std::vector<double> counts;
    for (const auto& pts : samples) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].norm() > window - r) continue;
            double c = 0.0;
            for (std::size_t j = 0; j < pts.size(); ++j)
                if (j != i && std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) < r) c += 1.0;
            counts.push_back(c);
        }
    }
    double m = 0.0;
    for (double c : counts) m += c;
    m /= static_cast<double>(counts.size());
    // Counts around points of one sample are correlated; use per-sample means for the error.
    std::vector<double> per;
    std::size_t k = 0;
    for (const auto& pts : samples) {
        double s = 0.0, n = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].norm() > window - r) continue;
            s += counts[k++];
            n += 1.0;
        }
        if (n > 0) per.push_back(s / n);
    }
    double pm = 0.0, ss = 0.0;
    for (double v : per) pm += v;
    pm /= static_cast<double>(per.size());
    for (double v : per) ss += (v - pm) * (v - pm);
    return {m, std::sqrt(ss / static_cast<double>(per.size() - 1) / static_cast<double>(per.size()))};
}
}  // namespace

TEST_CASE("PPP sampler") {
    Rng rng = realization_rng(3, 0);
    CHECK(sample_ppp(0.0, 5.0, rng).empty());

    const double lambda = 2.0, w = 3.0;
    double total = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const auto pts = sample_ppp(lambda, w, rng);
        for (const auto& p : pts) REQUIRE(p.norm() <= w);
        total += static_cast<double>(pts.size());
    }
    const double expected = lambda * kPi * w * w;
    CHECK(std::abs(total / draws - expected) < 3.0 * std::sqrt(expected / draws));
}

TEST_CASE("PPP has Ripley K close to pi r^2") {
    Rng rng = realization_rng(11, 0);
    std::vector<PointSet> samples;
    for (int i = 0; i < 400; ++i) samples.push_back(sample_ppp(20.0, 2.0, rng));
    for (double r : {0.1, 0.3}) {
        const auto nc = neighbour_count(samples, 2.0, r);
        // K(r) = E[neighbours] / lambda.
        CHECK(std::abs(nc.mean / 20.0 - kPi * r * r) < 4.0 * nc.std_error / 20.0);
    }
}

TEST_CASE("cluster sampler intensity and emptiness") {
    Rng rng = realization_rng(5, 1);
    CHECK(sample_pcp(UserModel{5.0, 0.0, Thomas{0.1}}, 3.0, rng).empty());
    for (const auto& m : {UserModel{5.0, 5.0, Thomas{0.1}}, UserModel{5.0, 5.0, Matern{0.2}}}) {
        const double w = 2.0;
        const int draws = 10000;
        double total = 0.0, total2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double n = static_cast<double>(sample_pcp(m, w, rng).size());
            total += n;
            total2 += n * n;
        }
        const double mean = total / draws;
        const double se = std::sqrt((total2 / draws - mean * mean) / draws);
        CHECK(std::abs(mean - m.lambda_u() * kPi * w * w) < 3.0 * se);
    }
}

TEST_CASE("cluster sampler matches the pair correlation") {
    for (const auto& m : {UserModel{5.0, 5.0, Thomas{0.1}}, UserModel{5.0, 5.0, Matern{0.2}}}) {
        Rng rng = realization_rng(17, 2);
        std::vector<PointSet> samples;
        for (int i = 0; i < 1500; ++i) samples.push_back(sample_pcp(m, 1.5, rng));
        for (double r : {0.05, 0.2}) {
            const auto nc = neighbour_count(samples, 1.5, r);
            const double poisson_part = m.lambda_u() * kPi * r * r;
            const double expected = expected_neighbours(m, r);
            // Clustering shows as a clear excess over the Poisson count.
            CHECK(nc.mean > poisson_part + 5.0 * nc.std_error);
            CHECK(std::abs(nc.mean - expected) < 4.0 * nc.std_error);
        }
    }
}

TEST_CASE("window configuration") {
    const auto net = tcp_net(0.1);
    CHECK(window_escape_bound(1.0, default_window_radius(1.0)) <= 1e-6);
    CHECK(interference_tail_ratio(1.0, default_window_radius(1.0, 4.0), 4.0) <= 0.01);
    CHECK(default_window_radius(4.0) == doctest::Approx(default_window_radius(1.0) / 2.0));

    SimConfig cfg;
    cfg.window_radius = 4.0;
    CHECK_THROWS_AS(cfg.validate(net), ValidationError);
    cfg.window_radius = 9.5;
    CHECK_NOTHROW(cfg.validate(net));
    CHECK_THROWS_AS(cfg.validate(net, 4.0), ValidationError);
    cfg.realizations = 0;
    try {
        cfg.validate(net);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.field()) == "sim.realizations");
    }
    SimConfig unresolved;
    Rng rng = realization_rng(1, 0);
    CHECK_THROWS_AS(sample_typical_cell_load(net, unresolved, rng), ValidationError);
}

TEST_CASE("empirical PMF") {
    const std::vector<Realization> one = {with_load(3)};
    const auto p = empirical_pmf(one);
    REQUIRE(p.probs.size() == 4);
    CHECK(p.probs[3] == 1.0);
    CHECK(p.probs[0] == 0.0);

    const std::vector<Realization> four = {with_load(0), with_load(0), with_load(1), with_load(1)};
    const auto q = empirical_pmf(four);
    REQUIRE(q.probs.size() == 2);
    CHECK(q.probs[0] == 0.5);
    CHECK(q.probs[1] == 0.5);
    CHECK_THROWS_AS(empirical_pmf(std::span<const Realization>()), DomainError);

    const auto s = load_statistics(four);
    CHECK(s.mean.value == 0.5);
    CHECK(s.void_probability == 0.5);
    CHECK(s.variance.value == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("seeded runs are reproducible and chunk-independent") {
    const auto net = mcp_net(0.2);
    RateConfig rate;
    rate.backhaul_rb = 2e6;
    SimConfig cfg;
    cfg.realizations = 300;
    cfg.seed = 7;
    cfg.parallel_chunks = 1;
    const auto a = run_simulation(net, cfg, &rate);
    cfg.parallel_chunks = 4;
    const auto b = run_simulation(net, cfg, &rate);
    std::ostringstream sa, sb;
    write_raw_csv(sa, a);
    write_raw_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("realization_index,load,sir,rate\n", 0) == 0);

    cfg.seed = 8;
    const auto c = run_simulation(net, cfg, &rate);
    std::ostringstream sc;
    write_raw_csv(sc, c);
    CHECK(sa.str() != sc.str());

    for (const auto& r : a) {
        CHECK(r.sir.has_value() == (r.load > 0));
        if (r.rate) CHECK(*r.rate <= 2e6 / static_cast<double>(r.load) + 1e-9);
    }
}

TEST_CASE("mean load and window sufficiency") {
    const auto net = tcp_net(0.1);
    SimConfig cfg;
    cfg.realizations = 4000;
    cfg.seed = 21;
    const auto base = load_statistics(run_simulation(net, cfg));
    CHECK(std::abs(base.mean.value - 25.0) < 3.0 * base.mean.std_error);
    CHECK(base.truncated == 0);

    cfg.window_radius = 2.0 * default_window_radius(1.0);
    const auto wide = load_statistics(run_simulation(net, cfg));
    CHECK(std::abs(wide.mean.value - base.mean.value) < 3.0 * base.mean.std_error);
}

TEST_CASE("cell-area diagnostic") {
    const auto net = tcp_net(0.1);
    SimConfig cfg;
    cfg.realizations = 400;
    cfg.area_probes = 400;
    double total = 0.0;
    for (const auto& r : run_simulation(net, cfg)) {
        REQUIRE(r.cell_area.has_value());
        CHECK(*r.cell_area > 0.0);
        total += *r.cell_area;
    }
    // E|C| = 1 / lambda_b; area sd is about 0.53.
    CHECK(std::abs(total / 400.0 - 1.0) < 0.1);
    cfg.area_probes = 0;
    CHECK_FALSE(run_simulation(net, cfg).front().cell_area.has_value());
}

TEST_CASE("zero backhaul gives zero rate") {
    RateConfig rate;
    rate.backhaul_rb = 0.0;
    SimConfig cfg;
    cfg.realizations = 50;
    for (const auto& r : run_simulation(tcp_net(0.1), cfg, &rate))
        if (r.rate) CHECK(*r.rate == 0.0);
    const std::vector<double> grid = {1.0};
    const auto rs = run_simulation(tcp_net(0.1), cfg, &rate);
    CHECK(empirical_rate_ccdf(rs, grid).front().value == 0.0);
}

TEST_CASE("uniform-location SIR sampler") {
    SimConfig cfg;
    cfg.realizations = 4000;
    cfg.seed = 5;
    const auto a = run_uniform_location_sir(1.0, cfg, 4.0);
    cfg.parallel_chunks = 3;
    CHECK(run_uniform_location_sir(1.0, cfg, 4.0) == a);
    // Scale-free: the SIR law does not depend on lambda_b.
    cfg.window_radius = 0.0;
    const auto b = run_uniform_location_sir(9.0, cfg, 4.0);
    for (double tau : {0.1, 1.0, 10.0}) {
        const auto ea = empirical_ccdf(a, tau), eb = empirical_ccdf(b, tau);
        CHECK(std::abs(ea.value - eb.value) < 4.0 * std::hypot(ea.std_error, eb.std_error));
        CHECK(std::abs(ea.value - sir_ccdf(4.0, tau)) < 0.05);
    }
    CHECK_THROWS_AS(run_uniform_location_sir(1.0, cfg, 2.0), ValidationError);
}
